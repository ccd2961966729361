#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "fgs/kernels.hpp"
#include "fgs/nfft.hpp"

using namespace fgs;

namespace {

const std::vector<KernelSpec> kCatalog = {
    KernelSpec::gaussian(1.0), KernelSpec::gaussian(3.5),
    KernelSpec::laplacian_rbf(2.0), KernelSpec::multiquadric(1.5),
    KernelSpec::inverse_multiquadric(0.8)};

// First derivative of K^(j) by central differencing, the independent check
// for the series-based derivative evaluation.
double fd_next_derivative(const KernelSpec& spec, double r, int j, double h) {
  auto lo = kernel_radial_derivatives(spec, r - h, j + 1);
  auto hi = kernel_radial_derivatives(spec, r + h, j + 1);
  return (hi[j] - lo[j]) / (2.0 * h);
}

} // namespace

TEST_CASE("kernel values match closed forms") {
  CHECK(eval_kernel(KernelSpec::gaussian(3.5), 3.5) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(eval_kernel(KernelSpec::laplacian_rbf(2.0), 2.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(eval_kernel(KernelSpec::multiquadric(4.0), 3.0) ==
        doctest::Approx(5.0).epsilon(1e-15));
  CHECK(eval_kernel(KernelSpec::inverse_multiquadric(2.0), 0.0) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), ParameterError);
  CHECK_THROWS_AS(KernelSpec::multiquadric(-1.0), ParameterError);
  CHECK_THROWS_AS(eval_kernel(kCatalog[0], -0.1), RangeError);
}

TEST_CASE("radial derivatives agree with finite differences order by order") {
  for (const auto& spec : kCatalog) {
    for (double r : {0.1, 0.37, 1.0, 2.3}) {
      auto derivs = kernel_radial_derivatives(spec, r, 8);
      for (int j = 0; j + 1 < 8; ++j) {
        double fd = fd_next_derivative(spec, r, j, 1e-5);
        double scale = std::max({std::abs(derivs[j + 1]), std::abs(derivs[j]), 1.0});
        CHECK(std::abs(derivs[j + 1] - fd) <= 1e-5 * scale);
      }
    }
  }
}

TEST_CASE("degenerate blend is the left-endpoint constant") {
  Polynomial t = two_point_taylor(KernelSpec::gaussian(1.0), 0.125, 1);
  CHECK(t.degree() == 0);
  double expect = eval_kernel(KernelSpec::gaussian(1.0), 0.375);
  CHECK(t.value(0.4) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(t.value(0.5) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("quadratic blend hits the documented conditions") {
  KernelSpec g = KernelSpec::gaussian(1.0);
  Polynomial t = two_point_taylor(g, 0.125, 2);
  auto d = kernel_radial_derivatives(g, 0.375, 2);
  CHECK(std::abs(t.value(0.375) - d[0]) <= 1e-10);
  CHECK(std::abs(t.derivative(0.375, 1) - d[1]) <= 1e-10);
  CHECK(std::abs(t.derivative(0.5, 1)) <= 1e-10);
}

namespace {

// Rounding mass of evaluating the order-th derivative from stored monomial
// coefficients; high derivatives of high-degree blends cannot be checked more
// tightly than a few hundred ulp of this in double precision.
double derivative_eval_noise(const Polynomial& t, int order) {
  double acc = 0.0;
  const VectorXd& c = t.coefficients();
  for (Eigen::Index k = order; k < c.size(); ++k) {
    double fall = 1.0;
    for (int i = 0; i < order; ++i) fall *= static_cast<double>(k - i);
    acc += std::abs(c(k)) * fall;
  }
  return acc / std::pow(t.scale(), order) * 1e-13;
}

} // namespace

TEST_CASE("blend conditions hold across the catalog up to order 8") {
  for (const auto& spec : kCatalog) {
    for (int p : {2, 4, 8}) {
      double eps_b = 0.1;
      double a = 0.5 - eps_b;
      Polynomial t = two_point_taylor(spec, eps_b, p);
      CHECK(t.degree() <= 2 * p - 1);
      auto derivs = kernel_radial_derivatives(spec, a, p);
      for (int i = 0; i < p; ++i) {
        double tol = 1e-8 * std::max(std::abs(derivs[i]), 1.0) +
                     derivative_eval_noise(t, i);
        CHECK(std::abs(t.derivative(a, i) - derivs[i]) <= tol);
      }
      for (int i = 1; i < p; ++i) {
        double tol = 1e-8 * std::max(std::abs(derivs[i]), 1.0) +
                     derivative_eval_noise(t, i);
        CHECK(std::abs(t.derivative(0.5, i)) <= tol);
      }
      // The first-derivative tail is flat well beyond rounding either way.
      CHECK(std::abs(t.derivative(0.5, 1)) <=
            1e-10 * std::max(std::abs(derivs[0]) / eps_b, 1.0));
    }
  }
}

TEST_CASE("regularized kernel switches branches at the documented radii") {
  KernelSpec g = KernelSpec::gaussian(1.0);
  RegularizedKernel reg(g, 0.125, 4);
  CHECK(reg.value(0.2) == doctest::Approx(eval_kernel(g, 0.2)).epsilon(1e-15));
  // Continuity across the inner boundary.
  CHECK(std::abs(reg.value(0.375 - 1e-12) - reg.value(0.375 + 1e-12)) <= 1e-9);
  // Constant tail outside radius 1/2.
  CHECK(reg.value(0.6) == doctest::Approx(reg.tail_value()).epsilon(1e-15));
  CHECK(reg.value(0.86) == reg.value(0.51));

  VectorXd y(3);
  y << 0.5, 0.5, 0.5;  // cube corner, radius sqrt(3)/2
  CHECK(reg.value_at(y) == doctest::Approx(reg.tail_value()).epsilon(1e-15));
}

TEST_CASE("zero blend width truncates the kernel sharply") {
  KernelSpec g = KernelSpec::gaussian(0.2);
  RegularizedKernel reg(g, 0.0, 4);
  CHECK(reg.value(0.3) == doctest::Approx(eval_kernel(g, 0.3)).epsilon(1e-15));
  CHECK(reg.value(0.7) == doctest::Approx(eval_kernel(g, 0.5)).epsilon(1e-15));
}

TEST_CASE("coefficients interpolate the regularized kernel on the grid") {
  // The inverse-transform identity at the sampling grid pins down the
  // normalization of the coefficient transform exactly.
  for (int d : {1, 2}) {
    int N = d == 1 ? 32 : 16;
    RegularizedKernel reg(KernelSpec::gaussian(0.25), 2.0 / N, 2);
    KernelCoefficients coeffs = kernel_fourier_coefficients(reg, d, N);

    double max_imag = 0.0;
    for (Eigen::Index i = 0; i < coeffs.values.size(); ++i)
      max_imag = std::max(max_imag, std::abs(coeffs.values(i).imag()));
    CHECK(max_imag <= 1e-12 * coeffs.values.cwiseAbs().maxCoeff());

    FrequencyIndexSet freqs(d, N);
    VectorXd y(d);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, N - 1);
    for (int trial = 0; trial < 20; ++trial) {
      for (int t = 0; t < d; ++t)
        y(t) = static_cast<double>(pick(rng) - N / 2) / N;
      std::complex<double> val = trig_polynomial_value(coeffs, y);
      CHECK(std::abs(val.real() - reg.value_at(y)) <= 1e-12);
      CHECK(std::abs(val.imag()) <= 1e-12);
    }
  }
}

TEST_CASE("coefficients match the quadratic-cost transform in one dimension") {
  const int N = 16;
  RegularizedKernel reg(KernelSpec::inverse_multiquadric(0.6), 0.125, 3);
  KernelCoefficients coeffs = kernel_fourier_coefficients(reg, 1, N);
  for (int a = 0; a < N; ++a) {
    int l = a - N / 2;
    std::complex<double> acc = 0.0;
    for (int jj = 0; jj < N; ++jj) {
      int j = jj - N / 2;
      acc += reg.value(std::abs(static_cast<double>(j) / N)) *
             std::polar(1.0, -2.0 * std::numbers::pi * j * l / double(N));
    }
    acc /= N;
    CHECK(std::abs(coeffs.values(a) - acc) <= 1e-13);
  }
}

TEST_CASE("sampled approximation error shrinks with the bandwidth") {
  // Narrow scaled Gaussian as produced by node rescaling.
  KernelSpec g = KernelSpec::gaussian(0.09);
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {16, 32, 64}) {
    RegularizedKernel reg(g, 0.0, 4);
    KernelCoefficients coeffs = kernel_fourier_coefficients(reg, 2, N);
    double err = kernel_approx_error(reg, coeffs, 200, 17);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev <= 1e-9);  // N = 64 resolves this kernel nearly to machine terms
}
