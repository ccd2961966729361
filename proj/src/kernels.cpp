#include "fgs/kernels.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "fgs/detail/fftw.hpp"

namespace fgs {

namespace {

constexpr double kPi = std::numbers::pi;

KernelSpec make_spec(KernelFamily family, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw ParameterError("kernel shape parameter must be positive and finite");
  return KernelSpec{family, shape};
}

void validate_spec(const KernelSpec& spec) {
  if (!(spec.shape > 0.0) || !std::isfinite(spec.shape))
    throw ParameterError("kernel shape parameter must be positive and finite");
}

// Taylor coefficients of exp(g0 + g1 t + g2 t^2) around t = 0.
std::vector<double> exp_series(double g0, double g1, double g2, int count) {
  std::vector<double> w(count);
  w[0] = std::exp(g0);
  for (int k = 1; k < count; ++k) {
    double acc = g1 * w[k - 1];
    if (k >= 2) acc += 2.0 * g2 * w[k - 2];
    w[k] = acc / k;
  }
  return w;
}

// Taylor coefficients of (u0 + u1 t + u2 t^2)^alpha around t = 0; u0 > 0.
std::vector<double> pow_series(double u0, double u1, double u2, double alpha,
                               int count) {
  std::vector<double> w(count);
  w[0] = std::pow(u0, alpha);
  for (int k = 1; k < count; ++k) {
    double acc = ((alpha + 1.0) * 1.0 - k) * u1 * w[k - 1];
    if (k >= 2) acc += ((alpha + 1.0) * 2.0 - k) * u2 * w[k - 2];
    w[k] = acc / (k * u0);
  }
  return w;
}

} // namespace

KernelSpec KernelSpec::gaussian(double sigma) {
  return make_spec(KernelFamily::Gaussian, sigma);
}
KernelSpec KernelSpec::laplacian_rbf(double sigma) {
  return make_spec(KernelFamily::LaplacianRbf, sigma);
}
KernelSpec KernelSpec::multiquadric(double c) {
  return make_spec(KernelFamily::Multiquadric, c);
}
KernelSpec KernelSpec::inverse_multiquadric(double c) {
  return make_spec(KernelFamily::InverseMultiquadric, c);
}

const char* kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::LaplacianRbf: return "laplacian-rbf";
    case KernelFamily::Multiquadric: return "multiquadric";
    case KernelFamily::InverseMultiquadric: return "inv-multiquadric";
  }
  return "unknown";
}

double eval_kernel(const KernelSpec& spec, double r) {
  validate_spec(spec);
  if (!(r >= 0.0)) throw RangeError("kernel radius must be nonnegative");
  switch (spec.family) {
    case KernelFamily::Gaussian:
      return std::exp(-(r * r) / (spec.shape * spec.shape));
    case KernelFamily::LaplacianRbf:
      return std::exp(-r / spec.shape);
    case KernelFamily::Multiquadric:
      return std::sqrt(r * r + spec.shape * spec.shape);
    case KernelFamily::InverseMultiquadric:
      return 1.0 / std::sqrt(r * r + spec.shape * spec.shape);
  }
  throw ParameterError("unknown kernel family");
}

std::vector<double> kernel_radial_derivatives(const KernelSpec& spec, double r0,
                                              int count) {
  validate_spec(spec);
  if (!(r0 >= 0.0)) throw RangeError("kernel radius must be nonnegative");
  if (count < 1 || count > 16)
    throw ParameterError("derivative count must lie in [1, 16]");

  std::vector<double> series;
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      double s2 = spec.shape * spec.shape;
      series = exp_series(-r0 * r0 / s2, -2.0 * r0 / s2, -1.0 / s2, count);
      break;
    }
    case KernelFamily::LaplacianRbf:
      series = exp_series(-r0 / spec.shape, -1.0 / spec.shape, 0.0, count);
      break;
    case KernelFamily::Multiquadric:
      series = pow_series(r0 * r0 + spec.shape * spec.shape, 2.0 * r0, 1.0,
                          0.5, count);
      break;
    case KernelFamily::InverseMultiquadric:
      series = pow_series(r0 * r0 + spec.shape * spec.shape, 2.0 * r0, 1.0,
                          -0.5, count);
      break;
  }
  // K^(j)(r0) = j! * (j-th Taylor coefficient).
  double factorial = 1.0;
  for (int j = 0; j < count; ++j) {
    if (j > 0) factorial *= j;
    series[j] *= factorial;
  }
  return series;
}

Polynomial::Polynomial(double center, double scale, VectorXd coeffs)
    : center_(center), scale_(scale), coeffs_(std::move(coeffs)) {
  if (!(scale_ > 0.0)) throw ParameterError("polynomial scale must be positive");
  if (coeffs_.size() == 0) throw ParameterError("polynomial needs coefficients");
  Eigen::Index last = coeffs_.size() - 1;
  while (last > 0 && coeffs_(last) == 0.0) --last;
  coeffs_.conservativeResize(last + 1);
}

double Polynomial::value(double r) const {
  double s = (r - center_) / scale_;
  double acc = 0.0;
  for (Eigen::Index k = coeffs_.size() - 1; k >= 0; --k)
    acc = acc * s + coeffs_(k);
  return acc;
}

double Polynomial::derivative(double r, int order) const {
  if (order < 0) throw ParameterError("derivative order must be nonnegative");
  VectorXd c = coeffs_;
  for (int o = 0; o < order; ++o) {
    if (c.size() == 1) return 0.0;
    VectorXd next(c.size() - 1);
    for (Eigen::Index k = 1; k < c.size(); ++k)
      next(k - 1) = static_cast<double>(k) * c(k);
    c = std::move(next);
  }
  double s = (r - center_) / scale_;
  double acc = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) acc = acc * s + c(k);
  return acc / std::pow(scale_, order);
}

Polynomial two_point_taylor(const KernelSpec& spec, double eps_b, int p) {
  validate_spec(spec);
  if (!(eps_b > 0.0) || !(eps_b < 0.5))
    throw ParameterError("blend width must lie in (0, 1/2)");
  if (p < 1 || p > 8) throw ParameterError("smoothness order must lie in [1, 8]");

  const double a = 0.5 - eps_b;
  const double mid = 0.5 * (a + 0.5);
  const double h = 0.5 * eps_b;

  // Work in s = (r - mid)/h, so the interpolation points sit at s = -1, +1.
  // The interpolant's s-derivative U = P' must vanish to order p at s = +1,
  // hence U(s) = (s - 1)^p sum_j q_j (s + 1)^j with deg <= 2p - 2; matching
  // U^(i)(-1) = h^(i+1) K^(i+1)(a) for i < p - 1 is a triangular system in q
  // (Leibniz leaves the single term with the (s+1)-factor fully
  // differentiated), so the coefficients come from forward substitution
  // instead of a general solve and stay accurate up to p = 8.
  std::vector<double> derivs = kernel_radial_derivatives(spec, a, p);
  VectorXd q = VectorXd::Zero(std::max(p - 1, 1));
  double hpow = h;
  for (int i = 0; i + 1 < p; ++i) {
    double rhs = hpow * derivs[i + 1];
    hpow *= h;
    for (int j = 0; j < i; ++j) {
      double binom = 1.0;
      for (int t = 0; t < i - j; ++t) binom = binom * (i - t) / (t + 1.0);
      double fall = 1.0;  // (p)_(i-j) falling factorial from (s-1)^p
      for (int t = 0; t < i - j; ++t) fall *= p - t;
      double fact = 1.0;
      for (int t = 2; t <= j; ++t) fact *= t;
      rhs -= q(j) * binom * fall * std::pow(-2.0, p - i + j) * fact;
    }
    double fact_i = 1.0;
    for (int t = 2; t <= i; ++t) fact_i *= t;
    q(i) = rhs / (std::pow(-2.0, p) * fact_i);
  }

  // Expand U = (s-1)^p sum_j q_j (s+1)^j into monomial coefficients of s.
  VectorXd left = VectorXd::Zero(p + 1);  // (s-1)^p
  left(0) = 1.0;
  for (int t = 0; t < p; ++t) {
    VectorXd next = VectorXd::Zero(p + 1);
    for (int k = 0; k <= t; ++k) {
      next(k + 1) += left(k);
      next(k) -= left(k);
    }
    left = next;
  }
  VectorXd u = VectorXd::Zero(2 * p - 1);
  VectorXd right = VectorXd::Zero(p - 1 > 0 ? p - 1 : 1);  // sum_j q_j (s+1)^j
  right(0) = p > 1 ? q(0) : 0.0;
  for (int j = 1; j + 1 < p; ++j) {
    // Add q_j (s+1)^j by binomial expansion.
    double binom = 1.0;
    for (int k = 0; k <= j; ++k) {
      right(k) += q(j) * binom;
      binom = binom * (j - k) / (k + 1.0);
    }
  }
  for (Eigen::Index ka = 0; ka <= p; ++ka)
    for (Eigen::Index kb = 0; kb < right.size(); ++kb)
      if (ka + kb < u.size()) u(ka + kb) += left(ka) * right(kb);

  // Integrate: P(s) = K(a) + int_{-1}^{s} U.
  VectorXd coeffs = VectorXd::Zero(2 * p);
  for (Eigen::Index k = 0; k < u.size(); ++k)
    coeffs(k + 1) = u(k) / static_cast<double>(k + 1);
  double at_minus1 = 0.0;
  double spow = -1.0;
  for (Eigen::Index k = 1; k < coeffs.size(); ++k) {
    at_minus1 += coeffs(k) * spow;
    spow = -spow;
  }
  coeffs(0) = derivs[0] - at_minus1;
  return Polynomial(mid, h, coeffs);
}

RegularizedKernel::RegularizedKernel(const KernelSpec& spec, double eps_b, int p)
    : spec_(spec), eps_b_(eps_b), p_(p) {
  validate_spec(spec);
  if (!(eps_b >= 0.0) || !(eps_b < 0.5))
    throw ParameterError("blend width must lie in [0, 1/2)");
  if (p < 1 || p > 8) throw ParameterError("smoothness order must lie in [1, 8]");
  if (eps_b_ > 0.0) {
    blend_ = two_point_taylor(spec, eps_b, p);
    tail_ = blend_.value(0.5);
  } else {
    tail_ = eval_kernel(spec, 0.5);
  }
}

double RegularizedKernel::value(double r) const {
  if (!(r >= 0.0)) throw RangeError("kernel radius must be nonnegative");
  if (eps_b_ == 0.0) return eval_kernel(spec_, std::min(r, 0.5));
  if (r <= 0.5 - eps_b_) return eval_kernel(spec_, r);
  if (r <= 0.5) return blend_.value(r);
  return tail_;
}

double RegularizedKernel::value_at(const VectorXd& y) const {
  return value(y.norm());
}

KernelCoefficients kernel_fourier_coefficients(const RegularizedKernel& kernel,
                                               int dims, int bandwidth) {
  if (dims < 1 || dims > 3)
    throw ParameterError("dims must be 1, 2, or 3");
  if (bandwidth < 2 || bandwidth % 2 != 0)
    throw ParameterError("bandwidth must be even and >= 2");

  const int N = bandwidth;
  const int half = N / 2;
  std::size_t total = 1;
  for (int t = 0; t < dims; ++t) total *= static_cast<std::size_t>(N);

  detail::FftwBuffer in(total), out(total);
  {
    VectorXd y(dims);
    std::size_t flat = 0;
    int idx[3] = {0, 0, 0};
    for (flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      for (int t = dims - 1; t >= 0; --t) {
        idx[t] = static_cast<int>(rest % N);
        rest /= N;
      }
      for (int t = 0; t < dims; ++t)
        y(t) = static_cast<double>(idx[t] - half) / N;
      in.p[flat][0] = kernel.value_at(y);
      in.p[flat][1] = 0.0;
    }
  }

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    int dims_arr[3] = {N, N, N};
    plan = fftw_plan_dft(dims, dims_arr, in.p, out.p, FFTW_FORWARD,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!plan) throw NumericalError("FFT planning failed");
  fftw_execute_dft(plan, in.p, out.p);
  {
    std::lock_guard<std::mutex> lock(detail::planner_mutex());
    fftw_destroy_plan(plan);
  }

  // The samples were taken at j/N with j = idx - N/2, so undo the index shift
  // by the alternating phase (-1)^(sum_t l_t) and normalize by N^-d.
  KernelCoefficients result;
  result.dims = dims;
  result.bandwidth = N;
  result.values.resize(static_cast<Eigen::Index>(total));
  const double norm = 1.0 / static_cast<double>(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    int lsum = 0;
    std::size_t bin = 0;
    for (int t = dims - 1; t >= 0; --t) {
      int a = static_cast<int>(rest % N);
      rest /= N;
      int l = a - half;
      lsum += l;
      std::size_t stride = 1;
      for (int q = t + 1; q < dims; ++q) stride *= static_cast<std::size_t>(N);
      bin += static_cast<std::size_t>((l + N) % N) * stride;
    }
    double sign = (lsum % 2 == 0) ? 1.0 : -1.0;
    result.values(static_cast<Eigen::Index>(flat)) =
        std::complex<double>(out.p[bin][0], out.p[bin][1]) * (sign * norm);
  }
  return result;
}

std::complex<double> trig_polynomial_value(const KernelCoefficients& coeffs,
                                           const VectorXd& y) {
  const int d = coeffs.dims;
  const int N = coeffs.bandwidth;
  if (y.size() != d) throw ShapeError("evaluation point has wrong dimension");

  // Per-dimension phase tables exp(2 pi i l y_t), l = -N/2..N/2-1.
  std::vector<std::complex<double>> phase(static_cast<std::size_t>(d) * N);
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < N; ++a)
      phase[static_cast<std::size_t>(t) * N + a] =
          std::polar(1.0, 2.0 * kPi * (a - N / 2) * y(t));

  std::complex<double> acc = 0.0;
  Eigen::Index flat = 0;
  if (d == 1) {
    for (int a = 0; a < N; ++a, ++flat) acc += coeffs.values(flat) * phase[a];
  } else if (d == 2) {
    for (int a = 0; a < N; ++a)
      for (int c = 0; c < N; ++c, ++flat)
        acc += coeffs.values(flat) * (phase[a] * phase[N + c]);
  } else {
    for (int a = 0; a < N; ++a)
      for (int c = 0; c < N; ++c) {
        std::complex<double> pac = phase[a] * phase[N + c];
        for (int e = 0; e < N; ++e, ++flat)
          acc += coeffs.values(flat) * (pac * phase[2 * N + e]);
      }
  }
  return acc;
}

double kernel_approx_error(const RegularizedKernel& kernel,
                           const KernelCoefficients& coeffs, int sample_count,
                           std::uint64_t seed) {
  if (sample_count < 1) throw ParameterError("sample count must be positive");
  const int d = coeffs.dims;
  const double radius = 0.5 - kernel.eps_b();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double worst = 0.0;
  VectorXd y(d);
  for (int s = 0; s < sample_count; ++s) {
    double norm2 = 0.0;
    for (int t = 0; t < d; ++t) {
      y(t) = gauss(rng);
      norm2 += y(t) * y(t);
    }
    double len = std::sqrt(norm2);
    double r = radius * std::pow(unif(rng), 1.0 / d);
    if (len > 0.0) y *= r / len;
    else y.setZero();
    double err = std::abs(eval_kernel(kernel.spec(), y.norm()) -
                          trig_polynomial_value(coeffs, y).real());
    worst = std::max(worst, err);
  }
  return worst;
}

} // namespace fgs
