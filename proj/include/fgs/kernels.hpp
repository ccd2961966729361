#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "fgs/errors.hpp"

namespace fgs {

using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Radial kernel catalog.  Every kernel is a function of r = ||y||_2:
///   Gaussian             exp(-r^2 / sigma^2)
///   LaplacianRbf         exp(-r / sigma)
///   Multiquadric         sqrt(r^2 + c^2)
///   InverseMultiquadric  1 / sqrt(r^2 + c^2)
enum class KernelFamily {
  Gaussian,
  LaplacianRbf,
  Multiquadric,
  InverseMultiquadric,
};

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double shape = 1.0;  ///< sigma for the RBF kernels, c for the multiquadrics

  static KernelSpec gaussian(double sigma);
  static KernelSpec laplacian_rbf(double sigma);
  static KernelSpec multiquadric(double c);
  static KernelSpec inverse_multiquadric(double c);
};

const char* kernel_family_name(KernelFamily family);

/// Kernel value at radius r >= 0.
double eval_kernel(const KernelSpec& spec, double r);

/// Radial derivatives K^(j)(r0) for j = 0, ..., count - 1, evaluated through
/// exact Taylor-series recurrences (no finite differencing).
std::vector<double> kernel_radial_derivatives(const KernelSpec& spec, double r0,
                                              int count);

/// Univariate polynomial in the scaled variable s = (r - center) / scale.
class Polynomial {
public:
  Polynomial() = default;
  Polynomial(double center, double scale, VectorXd coeffs);

  double value(double r) const;
  /// Value of the order-th derivative with respect to r.
  double derivative(double r, int order) const;
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const VectorXd& coefficients() const { return coeffs_; }
  double center() const { return center_; }
  double scale() const { return scale_; }

private:
  double center_ = 0.0;
  double scale_ = 1.0;
  VectorXd coeffs_ = VectorXd::Zero(1);
};

/// Hermite interpolant bridging the kernel to a constant tail on
/// [1/2 - eps_b, 1/2]: it matches the kernel's value and first p - 1 radial
/// derivatives at the left end while its derivatives of orders 1, ..., p
/// vanish at 1/2, which determines a unique polynomial of degree <= 2p - 1
/// (p = 1 degenerates to the constant K(1/2 - eps_b)).  The 2p conditions are
/// resolved in the midpoint-scaled variable, where the derivative factors as
/// (s - 1)^p times a polynomial found by forward substitution, keeping the
/// construction well conditioned through p = 8.
Polynomial two_point_taylor(const KernelSpec& spec, double eps_b, int p);

/// Kernel regularized for periodization: unchanged inside radius
/// 1/2 - eps_b, blended by two_point_taylor() across the boundary ring, and
/// frozen at the ring's outer value beyond radius 1/2.  eps_b = 0 skips the
/// blend and truncates the kernel at radius 1/2.
class RegularizedKernel {
public:
  RegularizedKernel(const KernelSpec& spec, double eps_b, int p);

  double value(double r) const;
  double value_at(const VectorXd& y) const;  ///< value(||y||)
  const KernelSpec& spec() const { return spec_; }
  double eps_b() const { return eps_b_; }
  int smoothness() const { return p_; }
  double tail_value() const { return tail_; }
  const Polynomial& blend() const { return blend_; }

private:
  KernelSpec spec_;
  double eps_b_ = 0.0;
  int p_ = 1;
  Polynomial blend_;
  double tail_ = 0.0;
};

/// Fourier coefficients of the periodized regularized kernel on the centered
/// index cube, bhat_l = N^-d sum_{j in I_N} K_R(j/N) exp(-2 pi i j.l / N),
/// stored in FrequencyIndexSet order.  Computed with one d-dimensional FFT.
struct KernelCoefficients {
  int dims = 0;
  int bandwidth = 0;
  VectorXcd values;
};

KernelCoefficients kernel_fourier_coefficients(const RegularizedKernel& kernel,
                                               int dims, int bandwidth);

/// Direct evaluation of sum_l bhat_l exp(+2 pi i l.y); O(N^d) per point.
std::complex<double> trig_polynomial_value(const KernelCoefficients& coeffs,
                                           const VectorXd& y);

/// Sampled sup estimate of |K(||y||) - Re sum_l bhat_l exp(2 pi i l.y)| over
/// the ball ||y|| <= 1/2 - eps_b where the regularization leaves the kernel
/// unchanged.  Drives the a-posteriori error reporting; it underestimates the
/// true sup norm by at most the sampling resolution.
double kernel_approx_error(const RegularizedKernel& kernel,
                           const KernelCoefficients& coeffs, int sample_count,
                           std::uint64_t seed);

} // namespace fgs
