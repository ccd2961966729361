#include "fgs/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "fgs/errors.hpp"

namespace fgs {

namespace {

int nearest_centroid(const MatrixXd& centroids, const Eigen::RowVectorXd& p) {
  int best = 0;
  double best_dist = (centroids.row(0) - p).squaredNorm();
  for (int c = 1; c < centroids.rows(); ++c) {
    double dist = (centroids.row(c) - p).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

MatrixXd plus_plus_init(const MatrixXd& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  std::uniform_int_distribution<Eigen::Index> any(0, n - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MatrixXd centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  Eigen::Index first = any(rng);
  centroids.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = true;
  VectorXd dist2 =
      (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();

  for (int c = 1; c < k; ++c) {
    double total = dist2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double target = unif(rng) * total;
      double running = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        running += dist2(i);
        if (running >= target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // All remaining distances vanish (duplicate points); fall back to a
      // uniform draw among the unchosen indices.
      std::vector<Eigen::Index> open;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) open.push_back(i);
      if (open.empty())
        pick = any(rng);
      else
        pick = open[std::uniform_int_distribution<std::size_t>(
            0, open.size() - 1)(rng)];
    }
    centroids.row(c) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    dist2 = dist2.cwiseMin(
        (points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

KMeansResult lloyd_run(const MatrixXd& points, int k, int max_iter,
                       std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  MatrixXd centroids = plus_plus_init(points, k, rng);
  std::vector<int> labels(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int c = nearest_centroid(centroids, points.row(i));
      if (c != labels[static_cast<std::size_t>(i)]) {
        labels[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }

    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    MatrixXd sums = MatrixXd::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      int c = labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) =
            sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        // Re-seed an empty cluster at the point farthest from its centroid.
        Eigen::Index far = 0;
        double far_dist = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          double dist =
              (points.row(i) -
               centroids.row(labels[static_cast<std::size_t>(i)]))
                  .squaredNorm();
          if (dist > far_dist) {
            far_dist = dist;
            far = i;
          }
        }
        centroids.row(c) = points.row(far);
        labels[static_cast<std::size_t>(far)] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }

  KMeansResult result;
  result.labels = std::move(labels);
  result.centroids = std::move(centroids);
  result.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    result.wcss +=
        (points.row(i) -
         result.centroids.row(result.labels[static_cast<std::size_t>(i)]))
            .squaredNorm();
  return result;
}

}  // namespace

KMeansResult kmeans(const MatrixXd& points, int k, const KMeansOptions& opts) {
  if (points.rows() < 1) throw ShapeError("k-means needs at least one point");
  if (k < 1 || k > points.rows())
    throw ParameterError("cluster count must lie in [1, point count]");
  if (opts.restarts < 1 || opts.max_iter < 1)
    throw ParameterError("restarts and max_iter must be positive");

  std::mt19937_64 rng(opts.seed);
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < opts.restarts; ++attempt) {
    KMeansResult run = lloyd_run(points, k, opts.max_iter, rng);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

std::vector<int> spectral_cluster(const EigenPairs& pairs, int k_clusters,
                                  const KMeansOptions& opts) {
  if (pairs.count() < k_clusters)
    throw ParameterError("need at least as many eigenvectors as clusters");
  MatrixXd rows = pairs.vectors;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  return kmeans(rows, k_clusters, opts).labels;
}

TrainingSelection select_training(const std::vector<int>& labels,
                                  int n_classes, int per_class_count,
                                  std::uint64_t seed) {
  if (n_classes < 1) throw ParameterError("need at least one class");
  if (per_class_count < 1)
    throw ParameterError("need at least one sample per class");
  std::vector<std::vector<Eigen::Index>> members(
      static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int label = labels[i];
    if (label < 0 || label >= n_classes)
      throw RangeError("label " + std::to_string(label) + " at position " +
                       std::to_string(i) + " is outside [0, n_classes)");
    members[static_cast<std::size_t>(label)].push_back(
        static_cast<Eigen::Index>(i));
  }
  std::mt19937_64 rng(seed);
  TrainingSelection selection;
  selection.per_class.resize(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    auto& pool = members[static_cast<std::size_t>(c)];
    if (static_cast<int>(pool.size()) < per_class_count)
      throw ParameterError("class " + std::to_string(c) + " has only " +
                           std::to_string(pool.size()) +
                           " members; cannot draw " +
                           std::to_string(per_class_count));
    std::shuffle(pool.begin(), pool.end(), rng);
    selection.per_class[static_cast<std::size_t>(c)]
        .assign(pool.begin(), pool.begin() + per_class_count);
  }
  return selection;
}

VectorXd fidelity_vector(const TrainingSelection& selection, Eigen::Index n,
                         int positive_class) {
  if (positive_class < 0 ||
      positive_class >= static_cast<int>(selection.per_class.size()))
    throw ParameterError("positive class index out of range");
  VectorXd f = VectorXd::Zero(n);
  for (std::size_t c = 0; c < selection.per_class.size(); ++c) {
    double value = (static_cast<int>(c) == positive_class) ? 1.0 : -1.0;
    for (Eigen::Index i : selection.per_class[c]) {
      if (i < 0 || i >= n) throw RangeError("training index out of range");
      f(i) = value;
    }
  }
  return f;
}

VectorXd fidelity_mask(const TrainingSelection& selection, Eigen::Index n,
                       double omega0) {
  if (!(omega0 >= 0.0)) throw ParameterError("omega0 must be nonnegative");
  VectorXd mask = VectorXd::Zero(n);
  for (const auto& indices : selection.per_class)
    for (Eigen::Index i : indices) {
      if (i < 0 || i >= n) throw RangeError("training index out of range");
      mask(i) = omega0;
    }
  return mask;
}

namespace {

// Core update with the previous phase field supplied explicitly.  The explicit
// force terms are evaluated at `field`, which equals the reconstruction
// V_k * coeffs for a generic step but is the raw initial vector u(0) = f on
// the very first step (before the state has been projected into the basis).
VectorXd step_with_field(const EigenPairs& pairs, const VectorXd& coeffs,
                         const VectorXd& field, const VectorXd& fidelity,
                         const VectorXd& mask, const AllenCahnParams& params,
                         bool with_potential) {
  const Eigen::Index n = pairs.vectors.rows();
  const Eigen::Index k = pairs.count();
  if (coeffs.size() != k)
    throw ShapeError("coefficient count does not match eigenpairs");
  if (fidelity.size() != n || mask.size() != n || field.size() != n)
    throw ShapeError("fidelity/mask length does not match node count");

  VectorXd force = mask.cwiseProduct(fidelity - field);
  if (with_potential) {
    // Double-well force psi'(u) = 4 u (u^2 - 1), treated explicitly.
    VectorXd well =
        4.0 * field.cwiseProduct(field.cwiseProduct(field) -
                                 VectorXd::Ones(n));
    force -= well / params.eps_ac;
  }
  VectorXd projected = pairs.vectors.transpose() * force;

  const double gain = 1.0 / params.tau + params.c;
  VectorXd next(k);
  for (Eigen::Index j = 0; j < k; ++j)
    next(j) = (gain * coeffs(j) + projected(j)) /
              (1.0 / params.tau + params.eps_ac * pairs.values(j) + params.c);
  return next;
}

}  // namespace

VectorXd allen_cahn_step(const EigenPairs& pairs, const VectorXd& coeffs,
                         const VectorXd& fidelity, const VectorXd& mask,
                         const AllenCahnParams& params, bool with_potential) {
  if (coeffs.size() != pairs.count())
    throw ShapeError("coefficient count does not match eigenpairs");
  VectorXd field = pairs.vectors * coeffs;
  return step_with_field(pairs, coeffs, field, fidelity, mask, params,
                         with_potential);
}

namespace {

struct ChannelRun {
  VectorXd field;
  int steps = 0;
  bool converged = false;
};

ChannelRun run_channel(const EigenPairs& pairs, const VectorXd& fidelity,
                       const VectorXd& mask, const AllenCahnParams& params) {
  VectorXd coeffs = pairs.vectors.transpose() * fidelity;
  // The trajectory starts at u(0) = f itself; the first step evaluates the
  // explicit forces there.  Afterwards the state lives in the spectral basis
  // and the field is reconstructed from the coefficients each step.
  VectorXd field = fidelity;
  ChannelRun run;
  for (int step = 1; step <= params.max_steps; ++step) {
    VectorXd next =
        step_with_field(pairs, coeffs, field, fidelity, mask, params, true);
    if (!next.allFinite())
      throw NumericalError("phase field diverged after " +
                           std::to_string(step) + " steps");
    run.steps = step;
    double denom = next.squaredNorm();
    double change = (next - coeffs).squaredNorm();
    coeffs = std::move(next);
    field = pairs.vectors * coeffs;
    if (denom == 0.0 ? change == 0.0 : change / denom <= params.tol) {
      run.converged = true;
      break;
    }
  }
  run.field = field;
  return run;
}

void validate_allen_cahn(const AllenCahnParams& params) {
  if (!(params.tau > 0.0) || !(params.eps_ac > 0.0) || !(params.c > 0.0) ||
      !(params.omega0 > 0.0) || !(params.tol > 0.0) || params.max_steps < 1)
    throw ParameterError("phase-field parameters must be positive");
}

}  // namespace

std::vector<int> allen_cahn_ssl(const EigenPairs& laplacian_pairs,
                                const TrainingSelection& selection,
                                const AllenCahnParams& params, int n_classes,
                                AllenCahnInfo* info) {
  validate_allen_cahn(params);
  if (n_classes < 2) throw ParameterError("need at least two classes");
  if (static_cast<int>(selection.per_class.size()) != n_classes)
    throw ShapeError("selection does not cover the requested classes");
  const Eigen::Index n = laplacian_pairs.vectors.rows();
  if (laplacian_pairs.count() < 1)
    throw ParameterError("need at least one eigenpair");

  VectorXd mask = fidelity_mask(selection, n, params.omega0);
  AllenCahnInfo aggregate;
  aggregate.converged = true;
  std::vector<int> labels(static_cast<std::size_t>(n), 0);

  if (n_classes == 2) {
    VectorXd f = fidelity_vector(selection, n, 0);
    ChannelRun run = run_channel(laplacian_pairs, f, mask, params);
    aggregate.steps = run.steps;
    aggregate.converged = run.converged;
    for (Eigen::Index i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = run.field(i) >= 0.0 ? 0 : 1;
  } else {
    MatrixXd fields(n, n_classes);
    for (int c = 0; c < n_classes; ++c) {
      VectorXd f = fidelity_vector(selection, n, c);
      ChannelRun run = run_channel(laplacian_pairs, f, mask, params);
      aggregate.steps = std::max(aggregate.steps, run.steps);
      aggregate.converged = aggregate.converged && run.converged;
      fields.col(c) = run.field;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index at = 0;
      fields.row(i).maxCoeff(&at);
      labels[static_cast<std::size_t>(i)] = static_cast<int>(at);
    }
  }
  if (info) *info = aggregate;
  return labels;
}

CgResult kernel_ssl_solve(const AdjacencyOperator& op, const VectorXd& f,
                          double beta, double tol, int max_iter) {
  if (!(beta >= 0.0)) throw ParameterError("beta must be nonnegative");
  if (f.size() != op.size())
    throw ShapeError("fidelity length does not match operator dimension");
  if (beta == 0.0) {
    CgResult direct;
    direct.x = f;
    direct.status = CgStatus::Converged;
    return direct;
  }
  SymmetricOperatorHandle system;
  system.dimension = op.size();
  system.apply = [&op, beta](const VectorXd& x) {
    return (x + beta * op.apply_sym_laplacian(x)).eval();
  };
  return cg_solve(system, f, tol, max_iter);
}

VectorXd kernel_ssl_truncated(const EigenPairs& adjacency_pairs,
                              const VectorXd& f, double beta) {
  if (!(beta >= 0.0)) throw ParameterError("beta must be nonnegative");
  if (adjacency_pairs.count() > 0 &&
      adjacency_pairs.vectors.rows() != f.size())
    throw ShapeError("fidelity length does not match eigenvectors");
  VectorXd coords = adjacency_pairs.vectors.transpose() * f;
  VectorXd inside = coords.array() /
                    (1.0 + beta * (1.0 - adjacency_pairs.values.array()));
  VectorXd projected = adjacency_pairs.vectors * coords;
  return adjacency_pairs.vectors * inside + (f - projected) / (1.0 + beta);
}

RidgeModel krr_fit(const MatrixXd& train_nodes, const KernelSpec& kernel,
                   double beta, const VectorXd& f, const FastsumParams& params,
                   double tol, int max_iter) {
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (f.size() != train_nodes.rows())
    throw ShapeError("target length does not match training node count");

  FastsumPlan plan(train_nodes, kernel, params);
  SymmetricOperatorHandle system;
  system.dimension = train_nodes.rows();
  system.apply = [&plan, beta](const VectorXd& x) {
    return (plan.apply(x) + beta * x).eval();
  };
  CgResult cg = cg_solve(system, f, tol, max_iter);
  if (cg.status == CgStatus::Indefinite)
    throw NumericalError(
        "regularized Gram operator is indefinite for this kernel; solve "
        "dense regularized normal equations instead");

  RidgeModel model;
  model.train_nodes = train_nodes;
  model.kernel = kernel;
  model.params = params;
  model.beta = beta;
  model.alpha = cg.x;
  model.cg_iterations = cg.iterations;
  model.cg_tol = tol;
  return model;
}

VectorXd krr_predict(const RidgeModel& model, const MatrixXd& query_nodes) {
  if (query_nodes.cols() != model.train_nodes.cols())
    throw ShapeError("query dimension does not match training dimension");
  const Eigen::Index n_train = model.train_nodes.rows();
  const Eigen::Index n_query = query_nodes.rows();
  MatrixXd all(n_train + n_query, model.train_nodes.cols());
  all.topRows(n_train) = model.train_nodes;
  all.bottomRows(n_query) = query_nodes;

  FastsumPlan plan(all, model.kernel, model.params);
  VectorXd masked = VectorXd::Zero(n_train + n_query);
  masked.head(n_train) = model.alpha;
  return plan.apply(masked).tail(n_query);
}

double misclassification_rate(const std::vector<int>& predicted,
                              const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw ShapeError("label vectors differ in length");
  if (predicted.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] != truth[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

double misclassification_rate_permuted(const std::vector<int>& predicted,
                                       const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw ShapeError("label vectors differ in length");
  if (predicted.empty()) return 0.0;
  int classes = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || truth[i] < 0)
      throw RangeError("labels must be nonnegative");
    classes = std::max(classes, std::max(predicted[i], truth[i]) + 1);
  }
  if (classes > 8)
    throw ParameterError(
        "permutation matching supports at most 8 classes");

  std::vector<std::vector<std::size_t>> counts(
      static_cast<std::size_t>(classes),
      std::vector<std::size_t>(static_cast<std::size_t>(classes), 0));
  for (std::size_t i = 0; i < predicted.size(); ++i)
    ++counts[static_cast<std::size_t>(predicted[i])]
            [static_cast<std::size_t>(truth[i])];

  std::vector<int> mapping(static_cast<std::size_t>(classes));
  std::iota(mapping.begin(), mapping.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t matched = 0;
    for (int p = 0; p < classes; ++p)
      matched += counts[static_cast<std::size_t>(p)]
                       [static_cast<std::size_t>(mapping[static_cast<std::size_t>(p)])];
    best = std::max(best, matched);
  } while (std::next_permutation(mapping.begin(), mapping.end()));
  return 1.0 -
         static_cast<double>(best) / static_cast<double>(predicted.size());
}

}  // namespace fgs
