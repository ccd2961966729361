#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "fgs/kernels.hpp"
#include "fgs/nfft.hpp"

namespace fgs {

/// Discretization parameters of the fast kernel summation.
struct FastsumParams {
  int bandwidth = 32;   ///< N, even; trigonometric degree of the kernel model
  int cutoff = 4;       ///< m, window taps of the underlying transforms
  int smoothness = 4;   ///< p, boundary blend order
  double eps_b = 0.0;   ///< blend width; 0 truncates the kernel at radius 1/2
  double oversampling = 2.0;

  /// Accuracy ladder used throughout the experiments: 1 -> (N=16, m=2),
  /// 2 -> (N=32, m=4), 3 -> (N=64, m=7); the blend order follows the cutoff.
  static FastsumParams preset(int level, double eps_b = 0.0);
};

/// Fast approximate multiplication by the full kernel matrix
/// Wtilde_ji = K(v_j - v_i) (diagonal K(0) included).
///
/// Construction rescales all nodes by a common factor rho <= 1 so they fit in
/// the ball of radius 1/4 - eps_b/2, adjusts the kernel shape parameter to
/// compensate (sigma -> rho sigma, c -> rho c; the multiquadrics additionally
/// scale the output by 1/rho resp. rho), and expands the regularized kernel
/// into Fourier coefficients.  apply() then costs one adjoint and one forward
/// nonequispaced transform, O(m^d n + (2N)^d log N) per vector.
class FastsumPlan {
public:
  FastsumPlan(const MatrixXd& nodes, const KernelSpec& kernel,
              const FastsumParams& params);
  ~FastsumPlan();
  FastsumPlan(FastsumPlan&&) noexcept;
  FastsumPlan& operator=(FastsumPlan&&) noexcept;
  FastsumPlan(const FastsumPlan&) = delete;
  FastsumPlan& operator=(const FastsumPlan&) = delete;

  Eigen::Index size() const;
  int dims() const;
  const MatrixXd& nodes() const;             ///< original, unscaled nodes
  const FastsumParams& params() const;
  const KernelSpec& kernel() const;          ///< kernel as requested
  const KernelSpec& scaled_kernel() const;   ///< shape-adjusted kernel
  double scaling() const;                    ///< rho
  double output_factor() const;
  double kernel_zero() const;                ///< K(0) of the requested kernel
  const KernelCoefficients& coefficients() const;

  /// result_j ~= sum_i K(v_j - v_i) x_i.  Deterministic; safe to call
  /// concurrently with distinct argument vectors.
  VectorXd apply(const VectorXd& x) const;

  /// Sampled sup-norm estimate of the pointwise kernel approximation error as
  /// it enters the matvec (output rescaling included).  A bound on the
  /// per-vector error follows as ||x||_1 times this value.
  double kernel_error_estimate(int sample_count, std::uint64_t seed) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact O(n^2) kernel summation, the reference oracle for FastsumPlan.
VectorXd direct_apply(const MatrixXd& nodes, const KernelSpec& kernel,
                      const VectorXd& x);

/// Exact max row sum of the approximation-error matrix E = Wtilde_E - Wtilde,
/// assembled column by column; O(n^2 + n) plan applications.
double error_matrix_norm(const FastsumPlan& plan);

} // namespace fgs
