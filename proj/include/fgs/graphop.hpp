#pragma once

// Matrix-free normalized graph operators over a fully connected kernel graph.
//
// The weight matrix W has entries K(v_i - v_j) off the diagonal and zeros on
// it; it is never materialized.  One fast-summation product per application
// yields the normalized adjacency A = D^{-1/2} W D^{-1/2} and the symmetric
// Laplacian L_s = I - A, where D holds the node degrees.  A direct
// quadratic-cost backend with the same interface serves as reference.

#include <cstdint>
#include <memory>
#include <optional>

#include "fgs/fastsum.hpp"

namespace fgs {

enum class AdjacencyBackend {
  Fastsum,  ///< NFFT-based approximate products, O(n) per apply.
  Direct,   ///< Exact quadratic-cost summation; reference oracle.
};

enum class EstimateMode {
  Sampled,  ///< Cheap: sampled kernel error, approximate degrees.
  Exact,    ///< O(n^2): column-by-column error matrix and exact degrees.
};

/// Diagnostics for how the fast-summation perturbation E = W_approx - W
/// propagates into the normalized adjacency.  With eta = d_min / ‖W‖_inf and
/// epsilon = ‖E‖_inf / ‖W‖_inf, the propagated error ‖A - A_approx‖_inf is
/// bounded by eta*(1+eta)-style expression whenever epsilon < eta; otherwise
/// no bound is available and `bound` is empty.
struct PropagationEstimate {
  double eta = 0.0;
  double epsilon = 0.0;
  std::optional<double> bound;
};

/// Evaluates the propagation bound epsilon*(1+eta) / (eta*(eta-epsilon)).
/// Returns an empty optional when epsilon >= eta (bound not applicable).
/// Requires eta > 0 and epsilon >= 0.
std::optional<double> propagation_bound(double eta, double epsilon);

class AdjacencyOperator {
 public:
  /// Builds the operator for the given point cloud (one node per row) and
  /// kernel.  Degrees are computed from one product with the all-ones
  /// vector; construction fails with NumericalError, naming the offending
  /// node, if any degree is not strictly positive (remedy: increase the
  /// fast-summation bandwidth/cutoff or widen the kernel).
  AdjacencyOperator(const MatrixXd& nodes, const KernelSpec& kernel,
                    const FastsumParams& params,
                    AdjacencyBackend backend = AdjacencyBackend::Fastsum);
  ~AdjacencyOperator();
  AdjacencyOperator(AdjacencyOperator&&) noexcept;
  AdjacencyOperator& operator=(AdjacencyOperator&&) noexcept;
  AdjacencyOperator(const AdjacencyOperator&) = delete;
  AdjacencyOperator& operator=(const AdjacencyOperator&) = delete;

  Eigen::Index size() const;
  int dims() const;
  const MatrixXd& nodes() const;
  const KernelSpec& kernel() const;
  AdjacencyBackend backend() const;
  double kernel_zero() const;

  /// Node degrees d_j = sum_{i != j} K(v_j - v_i); strictly positive.
  const VectorXd& degrees() const;

  /// Kernel-matrix product including the diagonal: (W + K(0) I) x.
  VectorXd apply_kernel(const VectorXd& x) const;

  /// Weight-matrix product with zero diagonal: W x.
  VectorXd apply_weight(const VectorXd& x) const;

  /// Normalized adjacency product A x = D^{-1/2} W D^{-1/2} x.
  VectorXd apply_normalized(const VectorXd& x) const;

  /// Symmetric Laplacian product L_s x = x - A x.
  VectorXd apply_sym_laplacian(const VectorXd& x) const;

  /// Underlying fast-summation plan, or nullptr for the direct backend.
  const FastsumPlan* plan() const;

  /// Estimates eta, epsilon and the propagation bound.  Sampled mode costs
  /// O(sample_count) kernel-error probes and uses the stored (approximate)
  /// degrees; exact mode runs a quadratic-cost column sweep computing the
  /// exact degrees and the exact row-sum norm of the error matrix.
  PropagationEstimate estimate_eta_epsilon(EstimateMode mode,
                                           int sample_count = 1000,
                                           std::uint64_t seed = 7) const;

 private:
  struct Impl;
  std::unique_ptr<const Impl> impl_;
};

}  // namespace fgs
