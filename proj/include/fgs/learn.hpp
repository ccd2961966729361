#pragma once

// Application layer on top of the matrix-free operators: spectral
// clustering, phase-field semi-supervised learning with convexity
// splitting, Laplacian-regularized kernel SSL, and kernel ridge regression.

#include <cstdint>
#include <vector>

#include "fgs/spectral.hpp"

namespace fgs {

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 100;
  std::uint64_t seed = 1;
};

struct KMeansResult {
  std::vector<int> labels;
  MatrixXd centroids;  // k x d
  double wcss = 0.0;   // within-cluster sum of squared distances
};

/// Lloyd iterations from k-means++ seeding, best of `restarts` runs by
/// wcss.  Empty clusters are re-seeded at the point farthest from its
/// current centroid.  Deterministic for a fixed seed.
KMeansResult kmeans(const MatrixXd& points, int k,
                    const KMeansOptions& opts = {});

/// Clusters nodes by their rows in the eigenvector matrix: rows are
/// normalized to unit length (exactly-zero rows stay zero and end up with
/// the nearest centroid), then k-means partitions them.
std::vector<int> spectral_cluster(const EigenPairs& pairs, int k_clusters,
                                  const KMeansOptions& opts = {});

/// Seeded per-class training sample for semi-supervised tasks; index lists
/// are disjoint across classes.
struct TrainingSelection {
  std::vector<std::vector<Eigen::Index>> per_class;
};

/// Draws `per_class_count` training indices per class uniformly without
/// replacement from the ground-truth labels.
TrainingSelection select_training(const std::vector<int>& labels,
                                  int n_classes, int per_class_count,
                                  std::uint64_t seed);

/// One-vs-rest fidelity: +1 on training nodes of `positive_class`, -1 on
/// training nodes of every other class, 0 elsewhere.
VectorXd fidelity_vector(const TrainingSelection& selection, Eigen::Index n,
                         int positive_class);

/// Diagonal of the fidelity weight matrix: omega0 on all training nodes.
VectorXd fidelity_mask(const TrainingSelection& selection, Eigen::Index n,
                       double omega0);

struct AllenCahnParams {
  double tau = 0.1;        ///< time step
  double eps_ac = 10.0;    ///< interface parameter
  double omega0 = 1e4;     ///< fidelity strength
  double c = 2.0 / 10.0 + 1e4;  ///< convexity-splitting constant, 2/eps + omega0
  double tol = 1e-10;      ///< squared-relative-change stopping threshold
  int max_steps = 500;
};

struct AllenCahnInfo {
  int steps = 0;        ///< largest step count over channels
  bool converged = false;
};

/// One implicit-explicit time step in spectral coordinates.  `pairs` holds
/// ascending Laplacian eigenpairs, `coeffs` the current spectral
/// coefficients of the phase field, `fidelity`/`mask` the node-space
/// supervision.  The double-well force can be switched off to expose the
/// pure linear flow for diagnostics.
VectorXd allen_cahn_step(const EigenPairs& pairs, const VectorXd& coeffs,
                         const VectorXd& fidelity, const VectorXd& mask,
                         const AllenCahnParams& params,
                         bool with_potential = true);

/// Phase-field semi-supervised classification over the k smallest Laplacian
/// eigenpairs.  Two classes use one +/-1 channel decided by sign; more
/// classes run independent one-vs-rest channels decided by argmax.
/// Throws NumericalError if a phase field stops being finite.
std::vector<int> allen_cahn_ssl(const EigenPairs& laplacian_pairs,
                                const TrainingSelection& selection,
                                const AllenCahnParams& params, int n_classes,
                                AllenCahnInfo* info = nullptr);

/// Laplacian-regularized SSL: solves (I + beta L_s) u = f by conjugate
/// gradients over the matrix-free operator; u is in result.x and carries the
/// CG status (beta = 0 returns f directly).
CgResult kernel_ssl_solve(const AdjacencyOperator& op, const VectorXd& f,
                          double beta, double tol = 1e-4, int max_iter = 1000);

/// Same system solved in closed form over a truncated eigenbasis of the
/// adjacency: diagonal solve in spectral coordinates plus a 1/(1+beta)
/// rescaling of the orthogonal complement.
VectorXd kernel_ssl_truncated(const EigenPairs& adjacency_pairs,
                              const VectorXd& f, double beta);

struct RidgeModel {
  MatrixXd train_nodes;
  KernelSpec kernel;
  FastsumParams params;
  double beta = 0.0;
  VectorXd alpha;      ///< dual coefficients
  int cg_iterations = 0;
  double cg_tol = 0.0;
};

/// Kernel ridge regression: solves (K + beta I) alpha = f matrix-free,
/// where K is the full Gram matrix (diagonal K(0) included).  Throws
/// NumericalError if the Gram operator turns out indefinite (possible for
/// the multiquadric kernel); a dense regularized normal-equations solve is
/// the suggested fallback in that case.
RidgeModel krr_fit(const MatrixXd& train_nodes, const KernelSpec& kernel,
                   double beta, const VectorXd& f, const FastsumParams& params,
                   double tol = 1e-6, int max_iter = 1000);

/// Predictions F(x) = sum_i alpha_i K(x_i, x) at arbitrary query nodes via
/// one fast-summation plan over the union of training and query nodes with
/// an input vector supported on the training block.
VectorXd krr_predict(const RidgeModel& model, const MatrixXd& query_nodes);

/// Fraction of mismatched labels.
double misclassification_rate(const std::vector<int>& predicted,
                              const std::vector<int>& truth);

/// Fraction of mismatched labels minimized over relabelings of the
/// predicted classes (exhaustive; at most 8 classes).
double misclassification_rate_permuted(const std::vector<int>& predicted,
                                       const std::vector<int>& truth);

}  // namespace fgs
