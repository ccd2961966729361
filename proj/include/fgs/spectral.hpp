#pragma once

// Eigensolvers and linear solvers over abstract symmetric operators:
// Lanczos with full reorthogonalization, sampled (traditional) Nystrom,
// the sketch-based Nystrom-Gaussian method driven by fast operator
// products, conjugate gradients, and dense reference oracles.

#include <cstdint>
#include <functional>
#include <memory>

#include "fgs/graphop.hpp"

namespace fgs {

/// Abstraction over anything that can apply a symmetric linear map:
/// matrix-free graph operators, dense matrices, or test stubs.  The apply
/// callable must be deterministic for a fixed handle.
struct SymmetricOperatorHandle {
  Eigen::Index dimension = 0;
  std::function<VectorXd(const VectorXd&)> apply;
};

/// Wraps a dense symmetric matrix (shared ownership; the handle keeps the
/// matrix alive).
SymmetricOperatorHandle dense_handle(MatrixXd matrix);

/// Views of an adjacency operator; non-owning, `op` must outlive the handle.
SymmetricOperatorHandle adjacency_handle(const AdjacencyOperator& op);
SymmetricOperatorHandle laplacian_handle(const AdjacencyOperator& op);

/// Eigenvalues in descending order with orthonormal eigenvectors as columns;
/// each column is sign-normalized so its largest-magnitude entry is positive.
struct EigenPairs {
  VectorXd values;
  MatrixXd vectors;
  Eigen::Index count() const { return values.size(); }
};

/// Sorts pairs descending by eigenvalue and applies the sign convention.
EigenPairs make_eigenpairs(VectorXd values, MatrixXd vectors);

/// Reinterprets adjacency eigenpairs (descending) as eigenpairs of the
/// symmetric Laplacian: values become 1 - lambda in ascending order with the
/// matching column order.
EigenPairs adjacency_to_laplacian(const EigenPairs& pairs);

struct LanczosOptions {
  int max_iter = 1000;
  /// Relative Ritz-residual threshold; the residual estimate of each wanted
  /// pair must drop below tol times the Ritz value magnitude.  Residual
  /// floors reported against an exact reference then reflect the accuracy
  /// of the operator products, not of the iteration.
  double tol = 1e-12;
  std::uint64_t seed = 1;
};

struct LanczosInfo {
  int iterations = 0;
  bool converged = false;
};

/// Computes the k largest-eigenvalue Ritz pairs of a symmetric operator.
/// Full reorthogonalization (two Gram-Schmidt passes against the whole
/// stored basis) keeps the basis orthonormal to ~1e-10 and suppresses ghost
/// eigenvalues.  On breakdown the basis is extended with a fresh random
/// vector orthogonal to everything computed so far.
EigenPairs lanczos_largest(const SymmetricOperatorHandle& op, int k,
                           const LanczosOptions& opts = {},
                           LanczosInfo* info = nullptr);

/// Per-pair residuals ||A v_j - lambda_j v_j||_2 against a reference
/// operator (typically dense/exact).
VectorXd residual_norms(const SymmetricOperatorHandle& reference,
                        const EigenPairs& pairs);

/// Maximum of residual_norms; an empty set of pairs yields 0.
double max_residual(const SymmetricOperatorHandle& reference,
                    const EigenPairs& pairs);

struct NystromOptions {
  int k = 10;       ///< requested eigenpairs
  int L = 100;      ///< sample / sketch size
  int M = 10;       ///< inversion rank (sketch-based method only), k <= M <= L
  std::uint64_t seed = 1;
};

struct NystromCore {
  EigenPairs pairs;  ///< eigenpairs of the normalized low-rank reconstruction
  VectorXd degrees;  ///< row sums of the reconstruction (normalization)
};

/// Core of the sampled Nystrom method on explicit blocks: given the sampled
/// rows [W_XX W_XY] of a symmetric nonnegative matrix, reconstructs the
/// rank-L approximation W_E = [W_XX; W_YX] W_XX^{-1} [W_XX W_XY], normalizes
/// by its row sums, and returns the top-k eigenpairs of the normalized
/// reconstruction via the QR route (rows ordered as [X block; Y block]).
/// Fails if W_XX is numerically singular (condition above 1e14) or a row sum
/// is not positive.
NystromCore nystrom_from_blocks(const MatrixXd& w_xx, const MatrixXd& w_xy,
                                int k);

/// Sampled Nystrom approximation of the normalized adjacency eigenpairs for
/// a kernel graph: L node indices drawn uniformly without replacement, blocks
/// evaluated explicitly with zero diagonal, then nystrom_from_blocks with the
/// rows scattered back to the original node order.  Uses opts.k, opts.L,
/// opts.seed (opts.M is not used by this method).
EigenPairs nystrom_traditional(const MatrixXd& nodes, const KernelSpec& kernel,
                               const NystromOptions& opts);

/// Sketch-based Nystrom with Gaussian probes over an abstract operator:
/// Y = A G for a seeded standard-normal n-by-L matrix G, Q = orth(Y),
/// B1 = A Q, B2 = sym(Q^T B1); the top-M positive eigenpairs of B2 and a QR
/// factorization of B1 U_M yield the final pairs.  O(n L^2) beyond the 2L
/// operator products.  Fails if B2 has fewer than M positive eigenvalues
/// (increase L).
EigenPairs nystrom_gaussian(const SymmetricOperatorHandle& op,
                            const NystromOptions& opts);

enum class CgStatus {
  Converged,
  MaxIterations,
  Indefinite,  ///< a search direction had nonpositive curvature; aborted
};

struct CgResult {
  VectorXd x;
  int iterations = 0;
  CgStatus status = CgStatus::MaxIterations;
  bool converged() const { return status == CgStatus::Converged; }
};

/// Conjugate gradients for symmetric positive definite operators.
/// Convergence is declared on the true relative residual
/// ||b - A x|| / ||b|| <= tol (recomputed, not the recurrence value).  On
/// nonpositive curvature the current iterate is returned with status
/// Indefinite.
CgResult cg_solve(const SymmetricOperatorHandle& op, const VectorXd& b,
                  double tol = 1e-8, int max_iter = 1000);

enum class DenseMode {
  Materialize,  ///< store the dense normalized adjacency (O(n^2) memory)
  Recompute,    ///< re-evaluate kernel rows on every apply (O(n^2) time)
};

/// Exact normalized adjacency of the kernel graph as an operator handle.
/// Materialize mode refuses (ResourceError) when the dense matrix would
/// exceed a 4 GiB budget.
SymmetricOperatorHandle dense_reference_apply(
    const MatrixXd& nodes, const KernelSpec& kernel,
    DenseMode mode = DenseMode::Materialize);

/// Ground-truth eigenpairs of the normalized adjacency.  Small problems use
/// a full dense eigensolver; larger ones run Lanczos at tolerance 1e-13 over
/// exact dense products.
EigenPairs dense_reference_eig(const MatrixXd& nodes, const KernelSpec& kernel,
                               int k);

}  // namespace fgs
