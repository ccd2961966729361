#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fgs/nfft.hpp"

using namespace fgs;
using std::complex;

namespace {

MatrixXd random_nodes(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  MatrixXd nodes(n, d);
  for (int j = 0; j < n; ++j)
    for (int t = 0; t < d; ++t) {
      double v = dist(rng);
      while (v >= 0.5) v = dist(rng);
      nodes(j, t) = v;
    }
  return nodes;
}

VectorXcd random_coeffs(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  VectorXcd f(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < f.size(); ++i)
    f(i) = complex<double>(dist(rng), dist(rng));
  return f;
}

} // namespace

TEST_CASE("frequency index set enumerates the centered cube") {
  FrequencyIndexSet one(1, 2);
  CHECK(one.size() == 2);
  CHECK(one.component(0, 0) == -1);
  CHECK(one.component(1, 0) == 0);

  FrequencyIndexSet cube(3, 4);
  CHECK(cube.size() == 64);
  // First dimension most significant; last dimension cycles fastest.
  CHECK(cube.component(0, 0) == -2);
  CHECK(cube.component(0, 2) == -2);
  CHECK(cube.component(1, 2) == -1);
  CHECK(cube.component(16, 0) == -1);
  CHECK(cube.component(63, 0) == 1);
  CHECK(cube.component(63, 2) == 1);
}

TEST_CASE("direct transform reproduces a pure exponential") {
  const int d = 2, N = 4;
  MatrixXd nodes = random_nodes(7, d, 11);
  FrequencyIndexSet freqs(d, N);
  for (std::size_t f : {std::size_t(0), std::size_t(5), std::size_t(15)}) {
    VectorXcd fhat = VectorXcd::Zero(static_cast<Eigen::Index>(freqs.size()));
    fhat(static_cast<Eigen::Index>(f)) = 1.0;
    VectorXcd out = direct_ndft(d, N, nodes, fhat);
    for (int j = 0; j < nodes.rows(); ++j) {
      double phase = 0.0;
      for (int t = 0; t < d; ++t) phase += freqs.component(f, t) * nodes(j, t);
      complex<double> expect = std::polar(1.0, 2.0 * std::numbers::pi * phase);
      CHECK(std::abs(out(j) - expect) < 1e-14);
    }
  }
}

TEST_CASE("adjoint oracle at the origin sums plainly") {
  MatrixXd nodes = MatrixXd::Zero(1, 1);
  VectorXcd x(1);
  x << complex<double>(1.0, 0.0);
  VectorXcd out = direct_adjoint_ndft(1, 8, nodes, x);
  for (Eigen::Index i = 0; i < out.size(); ++i)
    CHECK(std::abs(out(i) - 1.0) < 1e-15);
}

TEST_CASE("bessel series matches the standard library implementation") {
  for (double x : {0.0, 0.3, 1.0, 4.0, 12.5, 25.0, 40.0}) {
    double mine = bessel_i0(x);
    double ref = std::cyl_bessel_i(0.0, x);
    CHECK(std::abs(mine - ref) <= 1e-12 * ref);
  }
}

TEST_CASE("plan matches the direct transform at full cutoff") {
  for (int d : {1, 2, 3}) {
    for (int N : {2, 4, 16}) {
      int n = d == 3 ? 64 : 256;
      MatrixXd nodes = random_nodes(n, d, 100 * d + N);
      NfftPlan plan(d, N, 8, nodes);
      VectorXcd fhat = random_coeffs(plan.coefficient_count(), 7);

      VectorXcd fast = plan.forward(fhat);
      VectorXcd exact = direct_ndft(d, N, nodes, fhat);
      double budget = 1e-12 * fhat.cwiseAbs().sum();
      CHECK((fast - exact).cwiseAbs().maxCoeff() <= budget);

      VectorXcd x = random_coeffs(static_cast<std::size_t>(n), 13);
      VectorXcd fast_adj = plan.adjoint(x);
      VectorXcd exact_adj = direct_adjoint_ndft(d, N, nodes, x);
      double budget_adj = 1e-12 * x.cwiseAbs().sum();
      CHECK((fast_adj - exact_adj).cwiseAbs().maxCoeff() <= budget_adj);
    }
  }
}

TEST_CASE("forward and adjoint are exact transposes") {
  const int d = 2, N = 16, n = 120;
  MatrixXd nodes = random_nodes(n, d, 21);
  NfftPlan plan(d, N, 4, nodes);
  VectorXcd fhat = random_coeffs(plan.coefficient_count(), 3);
  VectorXcd x = random_coeffs(n, 5);

  // <forward(f), x> = <f, adjoint(x)> under the conjugate-linear pairing;
  // Eigen's dot() conjugates its left operand.
  complex<double> lhs = x.dot(plan.forward(fhat));
  complex<double> rhs = plan.adjoint(x).dot(fhat);
  CHECK(std::abs(lhs - rhs) <=
        1e-10 * (std::abs(lhs) + std::abs(rhs) + 1e-300));
}

TEST_CASE("plan is linear up to rounding") {
  const int d = 1, N = 32, n = 50;
  MatrixXd nodes = random_nodes(n, d, 31);
  NfftPlan plan(d, N, 6, nodes);
  VectorXcd f = random_coeffs(plan.coefficient_count(), 1);
  VectorXcd g = random_coeffs(plan.coefficient_count(), 2);
  complex<double> a(1.7, -0.3), b(-0.2, 2.5);
  VectorXcd combined = plan.forward(a * f + b * g);
  VectorXcd split = a * plan.forward(f) + b * plan.forward(g);
  double scale = combined.cwiseAbs().maxCoeff();
  CHECK((combined - split).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("accuracy improves monotonically with the cutoff") {
  const int d = 2, N = 16, n = 100;
  MatrixXd nodes = random_nodes(n, d, 77);
  VectorXcd fhat = random_coeffs(FrequencyIndexSet(d, N).size(), 9);
  VectorXcd exact = direct_ndft(d, N, nodes, fhat);
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {2, 4, 8}) {
    NfftPlan plan(d, N, m, nodes);
    double err = (plan.forward(fhat) - exact).cwiseAbs().maxCoeff();
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("equispaced nodes reduce to the inverse DFT") {
  const int N = 16;
  MatrixXd nodes(N, 1);
  for (int j = 0; j < N; ++j) nodes(j, 0) = static_cast<double>(j - N / 2) / N;
  NfftPlan plan(1, N, 8, nodes);
  VectorXcd fhat = random_coeffs(N, 4);
  VectorXcd fast = plan.forward(fhat);
  // Inverse-DFT evaluation summed explicitly at the grid points.
  for (int j = 0; j < N; ++j) {
    complex<double> acc = 0.0;
    for (int a = 0; a < N; ++a)
      acc += fhat(a) * std::polar(1.0, 2.0 * std::numbers::pi * (a - N / 2) *
                                           nodes(j, 0));
    CHECK(std::abs(fast(j) - acc) <= 1e-12 * fhat.cwiseAbs().sum());
  }
}

TEST_CASE("real-part convenience honors conjugate symmetry") {
  const int N = 8, n = 40;
  MatrixXd nodes = random_nodes(n, 1, 55);
  NfftPlan plan(1, N, 8, nodes);
  // Conjugate-symmetric coefficients: c_{-l} = conj(c_l), c_0 real, and the
  // unpaired mode l = -N/2 zero, so the transform is real-valued.
  VectorXcd fhat = VectorXcd::Zero(N);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> dist;
  for (int l = 1; l < N / 2; ++l) {
    complex<double> c(dist(rng), dist(rng));
    fhat(N / 2 + l) = c;
    fhat(N / 2 - l) = std::conj(c);
  }
  fhat(N / 2) = dist(rng);
  VectorXd re = plan.forward_real(fhat);
  VectorXcd full = plan.forward(fhat);
  CHECK((re - full.real()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(full.imag().cwiseAbs().maxCoeff() <= 1e-10 * full.real().cwiseAbs().maxCoeff());
}

TEST_CASE("invalid inputs are rejected") {
  MatrixXd good = random_nodes(4, 2, 1);
  CHECK_THROWS_AS(NfftPlan(4, 8, 4, MatrixXd::Zero(2, 4)), ParameterError);
  CHECK_THROWS_AS(NfftPlan(2, 7, 4, good), ParameterError);
  CHECK_THROWS_AS(NfftPlan(2, 8, 0, good), ParameterError);
  CHECK_THROWS_AS(NfftPlan(2, 8, 4, good, 0.5), ParameterError);

  MatrixXd bad = good;
  bad(1, 0) = 0.5; // the right endpoint is excluded
  CHECK_THROWS_AS(NfftPlan(2, 8, 4, bad), RangeError);

  NfftPlan plan(2, 8, 4, good);
  CHECK_THROWS_AS(plan.forward(VectorXcd::Zero(63)), ShapeError);
  CHECK_THROWS_AS(plan.adjoint(VectorXcd::Zero(3)), ShapeError);
  CHECK_THROWS_AS(direct_ndft(2, 8, good, VectorXcd::Zero(5)), ShapeError);
}
