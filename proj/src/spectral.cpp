#include "fgs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "fgs/errors.hpp"

namespace fgs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_apply_input(const SymmetricOperatorHandle& op) {
  if (op.dimension < 1 || !op.apply)
    throw ParameterError("operator handle is empty");
}

VectorXd apply_checked(const SymmetricOperatorHandle& op, const VectorXd& x) {
  if (x.size() != op.dimension)
    throw ShapeError("vector length does not match operator dimension");
  return op.apply(x);
}

/// Dense normalized adjacency of the kernel graph; throws on nonpositive
/// degrees, naming the node.
MatrixXd dense_normalized_adjacency(const MatrixXd& nodes,
                                    const KernelSpec& kernel) {
  const Eigen::Index n = nodes.rows();
  MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double value = eval_kernel(kernel, (nodes.row(i) - nodes.row(j)).norm());
      w(i, j) = value;
      w(j, i) = value;
    }
  }
  VectorXd degrees = w.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(degrees(i) > 0.0))
      throw NumericalError("degree of node " + std::to_string(i) +
                           " is not positive in the dense reference");
  VectorXd inv_sqrt = degrees.array().rsqrt();
  return inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();
}

/// Draws a unit vector orthogonal to the given orthonormal columns; false if
/// none found.
bool random_orthogonal(std::mt19937_64& rng,
                       const Eigen::Ref<const MatrixXd>& basis, VectorXd& out) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Eigen::Index n = basis.rows();
  for (int attempt = 0; attempt < 8; ++attempt) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = unif(rng);
    for (int pass = 0; pass < 2; ++pass)
      v.noalias() -= basis * (basis.transpose() * v);
    double norm = v.norm();
    if (norm > 1e-8) {
      out = v / norm;
      return true;
    }
  }
  return false;
}

}  // namespace

SymmetricOperatorHandle dense_handle(MatrixXd matrix) {
  if (matrix.rows() != matrix.cols())
    throw ShapeError("dense operator must be square");
  auto shared = std::make_shared<MatrixXd>(std::move(matrix));
  SymmetricOperatorHandle handle;
  handle.dimension = shared->rows();
  handle.apply = [shared](const VectorXd& x) -> VectorXd {
    return (*shared) * x;
  };
  return handle;
}

SymmetricOperatorHandle adjacency_handle(const AdjacencyOperator& op) {
  SymmetricOperatorHandle handle;
  handle.dimension = op.size();
  handle.apply = [&op](const VectorXd& x) { return op.apply_normalized(x); };
  return handle;
}

SymmetricOperatorHandle laplacian_handle(const AdjacencyOperator& op) {
  SymmetricOperatorHandle handle;
  handle.dimension = op.size();
  handle.apply = [&op](const VectorXd& x) { return op.apply_sym_laplacian(x); };
  return handle;
}

EigenPairs make_eigenpairs(VectorXd values, MatrixXd vectors) {
  if (values.size() != vectors.cols())
    throw ShapeError("eigenvalue count does not match eigenvector columns");
  const Eigen::Index k = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return values(a) > values(b);
                   });
  EigenPairs pairs;
  pairs.values.resize(k);
  pairs.vectors.resize(vectors.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    pairs.values(i) = values(order[static_cast<std::size_t>(i)]);
    VectorXd column = vectors.col(order[static_cast<std::size_t>(i)]);
    Eigen::Index at = 0;
    column.cwiseAbs().maxCoeff(&at);
    if (column(at) < 0.0) column = -column;
    pairs.vectors.col(i) = column;
  }
  return pairs;
}

EigenPairs adjacency_to_laplacian(const EigenPairs& pairs) {
  const Eigen::Index k = pairs.count();
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(pairs.vectors.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.values(i) = 1.0 - pairs.values(k - 1 - i);
    out.vectors.col(i) = pairs.vectors.col(k - 1 - i);
  }
  return out;
}

EigenPairs lanczos_largest(const SymmetricOperatorHandle& op, int k,
                           const LanczosOptions& opts, LanczosInfo* info) {
  check_apply_input(op);
  const Eigen::Index n = op.dimension;
  if (k < 1) throw ParameterError("at least one eigenpair must be requested");
  if (k > n)
    throw ParameterError(
        "requested pairs must not exceed the operator dimension");
  if (opts.max_iter < 1) throw ParameterError("max_iter must be positive");
  if (!(opts.tol > 0.0)) throw ParameterError("tolerance must be positive");

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = unif(rng);
  start.normalize();

  // Orthonormal Krylov basis, stored as columns and grown geometrically.
  MatrixXd basis(n, std::min<Eigen::Index>(n, 64));
  basis.col(0) = start;
  std::vector<double> alphas;
  std::vector<double> betas;  // betas[i] couples columns i and i+1
  Eigen::SelfAdjointEigenSolver<MatrixXd> tri;
  int tri_size = 0;    // tridiagonal order of the latest decomposition
  double scale = 0.0;  // running Gershgorin bound on the tridiagonal norm
  bool converged = false;
  int iterations = 0;
  // The Ritz residual test needs an O(m^3) tridiagonal eigendecomposition;
  // running it on a geometric schedule keeps that cost subordinate to the
  // operator applies on long runs, at the price of overshooting the earliest
  // possible stopping point by at most ~12 %.
  int next_check = k;

  auto solve_tridiagonal = [&](int m) {
    Eigen::Map<const VectorXd> diag(alphas.data(), m);
    Eigen::Map<const VectorXd> sub(betas.data(), m - 1);
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    tri_size = m;
  };

  while (true) {
    VectorXd z =
        apply_checked(op, basis.col(static_cast<Eigen::Index>(alphas.size())));
    ++iterations;
    const int m = static_cast<int>(alphas.size()) + 1;
    double alpha = basis.col(m - 1).dot(z);
    alphas.push_back(alpha);
    z -= alpha * basis.col(m - 1);
    const double beta_prev =
        m >= 2 ? betas[static_cast<std::size_t>(m - 2)] : 0.0;
    if (m >= 2) z -= beta_prev * basis.col(m - 2);
    // Full reorthogonalization against every stored column, twice.
    auto q = basis.leftCols(m);
    for (int pass = 0; pass < 2; ++pass)
      z.noalias() -= q * (q.transpose() * z);
    double beta = z.norm();
    scale = std::max(scale, std::abs(alpha) + beta + beta_prev);

    const bool last = iterations >= opts.max_iter || m == static_cast<int>(n);
    if (m >= k && (m >= next_check || last)) {
      solve_tridiagonal(m);
      bool all_small = true;
      for (int i = 0; i < k && all_small; ++i) {
        double theta = tri.eigenvalues()(m - 1 - i);
        double estimate = beta * std::abs(tri.eigenvectors()(m - 1, m - 1 - i));
        double threshold =
            opts.tol * std::max(std::abs(theta), kEps * std::max(scale, 1.0));
        if (estimate > threshold) all_small = false;
      }
      if (all_small) {
        converged = true;
        break;
      }
      next_check = m + std::max(8, m / 8);
    }
    if (iterations >= opts.max_iter) break;
    if (m == static_cast<int>(n)) {
      // Full-dimensional factorization is exact.
      converged = true;
      break;
    }
    if (m == basis.cols())
      basis.conservativeResize(Eigen::NoChange,
                               std::min(n, basis.cols() * 2));
    if (beta > 1e-14 * std::max(scale, 1.0)) {
      betas.push_back(beta);
      basis.col(m) = z / beta;
    } else {
      // Breakdown: the Krylov space is invariant; continue in a fresh
      // random direction orthogonal to everything found so far.
      VectorXd next;
      if (!random_orthogonal(rng, basis.leftCols(m), next)) {
        converged = true;
        break;
      }
      betas.push_back(0.0);
      basis.col(m) = next;
    }
  }

  const int m = static_cast<int>(alphas.size());
  if (tri_size != m) solve_tridiagonal(m);
  const int wanted = std::min(k, m);
  VectorXd values(wanted);
  MatrixXd selector(m, wanted);
  for (int i = 0; i < wanted; ++i) {
    values(i) = tri.eigenvalues()(m - 1 - i);
    selector.col(i) = tri.eigenvectors().col(m - 1 - i);
  }
  MatrixXd vectors = basis.leftCols(m) * selector;
  if (info) {
    info->iterations = iterations;
    info->converged = converged;
  }
  return make_eigenpairs(std::move(values), std::move(vectors));
}

VectorXd residual_norms(const SymmetricOperatorHandle& reference,
                        const EigenPairs& pairs) {
  check_apply_input(reference);
  if (pairs.count() > 0 && pairs.vectors.rows() != reference.dimension)
    throw ShapeError("eigenvector length does not match operator dimension");
  VectorXd norms(pairs.count());
  for (Eigen::Index j = 0; j < pairs.count(); ++j) {
    VectorXd v = pairs.vectors.col(j);
    norms(j) = (apply_checked(reference, v) - pairs.values(j) * v).norm();
  }
  return norms;
}

double max_residual(const SymmetricOperatorHandle& reference,
                    const EigenPairs& pairs) {
  if (pairs.count() == 0) return 0.0;
  return residual_norms(reference, pairs).maxCoeff();
}

NystromCore nystrom_from_blocks(const MatrixXd& w_xx, const MatrixXd& w_xy,
                                int k) {
  const Eigen::Index L = w_xx.rows();
  if (w_xx.cols() != L) throw ShapeError("sampled block must be square");
  if (w_xy.rows() != L)
    throw ShapeError("cross block row count must match the sampled block");
  if (k < 1 || k > L)
    throw ParameterError("requested pairs must lie in [1, sample size]");
  const Eigen::Index n = L + w_xy.cols();

  MatrixXd sym_xx = 0.5 * (w_xx + w_xx.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_xx(sym_xx);
  VectorXd spectrum = es_xx.eigenvalues();
  double magnitude_max = spectrum.cwiseAbs().maxCoeff();
  double magnitude_min = spectrum.cwiseAbs().minCoeff();
  if (!(magnitude_max > 0.0) || magnitude_max > 1e14 * magnitude_min)
    throw NumericalError(
        "sampled block is numerically singular (condition estimate above "
        "1e14); draw a different sample or reduce the sample size");

  MatrixXd rows(L, n);
  rows.leftCols(L) = sym_xx;
  rows.rightCols(n - L) = w_xy;

  // Row sums of the reconstruction B^T W_XX^{-1} B with B the sampled rows.
  VectorXd block_sums = rows.rowwise().sum();
  VectorXd solved = es_xx.eigenvectors() *
                    (es_xx.eigenvectors().transpose() * block_sums)
                        .cwiseQuotient(spectrum);
  VectorXd degrees = rows.transpose() * solved;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(degrees(i) > 0.0))
      throw NumericalError(
          "reconstructed degree of row " + std::to_string(i) +
          " is not positive; normalization would become complex");

  MatrixXd scaled = degrees.array().rsqrt().matrix().asDiagonal() *
                    rows.transpose();  // n x L
  Eigen::HouseholderQR<MatrixXd> qr(scaled);
  MatrixXd q_thin = qr.householderQ() * MatrixXd::Identity(n, L);
  MatrixXd r_thin =
      qr.matrixQR().topRows(L).triangularView<Eigen::Upper>();

  MatrixXd projected = r_thin * es_xx.eigenvectors();
  MatrixXd middle = projected * spectrum.cwiseInverse().asDiagonal() *
                    projected.transpose();
  middle = 0.5 * (middle + middle.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_mid(middle);

  VectorXd values(k);
  MatrixXd vectors(n, k);
  for (int i = 0; i < k; ++i) {
    values(i) = es_mid.eigenvalues()(L - 1 - i);
    vectors.col(i) = q_thin * es_mid.eigenvectors().col(L - 1 - i);
  }
  NystromCore core;
  core.pairs = make_eigenpairs(std::move(values), std::move(vectors));
  core.degrees = std::move(degrees);
  return core;
}

EigenPairs nystrom_traditional(const MatrixXd& nodes, const KernelSpec& kernel,
                               const NystromOptions& opts) {
  const Eigen::Index n = nodes.rows();
  if (n < 2) throw ShapeError("at least two nodes required");
  if (opts.k < 1 || opts.L < opts.k || opts.L > n)
    throw ParameterError("need 1 <= k <= L <= n");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index(0));
  std::mt19937_64 rng(opts.seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const Eigen::Index L = opts.L;
  MatrixXd w_xx(L, L);
  for (Eigen::Index a = 0; a < L; ++a) {
    w_xx(a, a) = 0.0;
    for (Eigen::Index b = a + 1; b < L; ++b) {
      double value = eval_kernel(
          kernel, (nodes.row(perm[static_cast<std::size_t>(a)]) -
                   nodes.row(perm[static_cast<std::size_t>(b)]))
                      .norm());
      w_xx(a, b) = value;
      w_xx(b, a) = value;
    }
  }
  MatrixXd w_xy(L, n - L);
  for (Eigen::Index a = 0; a < L; ++a)
    for (Eigen::Index b = L; b < n; ++b)
      w_xy(a, b - L) = eval_kernel(
          kernel, (nodes.row(perm[static_cast<std::size_t>(a)]) -
                   nodes.row(perm[static_cast<std::size_t>(b)]))
                      .norm());

  NystromCore core = nystrom_from_blocks(w_xx, w_xy, opts.k);

  // Scatter the block-ordered rows back to the original node order.  The
  // descending order and the sign convention are permutation-invariant.
  EigenPairs pairs;
  pairs.values = core.pairs.values;
  pairs.vectors.resize(n, core.pairs.count());
  for (Eigen::Index r = 0; r < n; ++r)
    pairs.vectors.row(perm[static_cast<std::size_t>(r)]) =
        core.pairs.vectors.row(r);
  return pairs;
}

EigenPairs nystrom_gaussian(const SymmetricOperatorHandle& op,
                            const NystromOptions& opts) {
  check_apply_input(op);
  const Eigen::Index n = op.dimension;
  if (opts.k < 1 || opts.M < opts.k || opts.L < opts.M || opts.L > n)
    throw ParameterError("need 1 <= k <= M <= L <= n");
  const Eigen::Index L = opts.L;
  const Eigen::Index M = opts.M;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  MatrixXd probes(n, L);
  for (Eigen::Index c = 0; c < L; ++c)
    for (Eigen::Index r = 0; r < n; ++r) probes(r, c) = gauss(rng);

  MatrixXd sketch(n, L);
  for (Eigen::Index c = 0; c < L; ++c)
    sketch.col(c) = apply_checked(op, probes.col(c));

  Eigen::HouseholderQR<MatrixXd> qr(sketch);
  MatrixXd q_range = qr.householderQ() * MatrixXd::Identity(n, L);

  MatrixXd b1(n, L);
  for (Eigen::Index c = 0; c < L; ++c)
    b1.col(c) = apply_checked(op, q_range.col(c));
  MatrixXd b2 = q_range.transpose() * b1;
  b2 = 0.5 * (b2 + b2.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es_b2(b2);
  Eigen::Index positives = 0;
  for (Eigen::Index i = 0; i < L; ++i)
    if (es_b2.eigenvalues()(i) > 0.0) ++positives;
  if (positives < M)
    throw NumericalError(
        "sketch captured fewer than the requested number of positive "
        "eigenvalues; increase the sketch size");

  MatrixXd u_m(L, M);
  VectorXd sigma(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    sigma(i) = es_b2.eigenvalues()(L - 1 - i);
    u_m.col(i) = es_b2.eigenvectors().col(L - 1 - i);
  }

  Eigen::HouseholderQR<MatrixXd> qr2(MatrixXd(b1 * u_m));
  MatrixXd q_hat = qr2.householderQ() * MatrixXd::Identity(n, M);
  MatrixXd r_hat = qr2.matrixQR().topRows(M).triangularView<Eigen::Upper>();

  MatrixXd middle = r_hat * sigma.cwiseInverse().asDiagonal() *
                    r_hat.transpose();
  middle = 0.5 * (middle + middle.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_mid(middle);

  VectorXd values(opts.k);
  MatrixXd vectors(n, opts.k);
  for (int i = 0; i < opts.k; ++i) {
    values(i) = es_mid.eigenvalues()(M - 1 - i);
    vectors.col(i) = q_hat * es_mid.eigenvectors().col(M - 1 - i);
  }
  return make_eigenpairs(std::move(values), std::move(vectors));
}

CgResult cg_solve(const SymmetricOperatorHandle& op, const VectorXd& b,
                  double tol, int max_iter) {
  check_apply_input(op);
  if (b.size() != op.dimension)
    throw ShapeError("right-hand side length does not match the operator");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  if (max_iter < 1) throw ParameterError("max_iter must be positive");

  CgResult result;
  result.x = VectorXd::Zero(b.size());
  double b_norm = b.norm();
  if (b_norm == 0.0) {
    result.status = CgStatus::Converged;
    return result;
  }

  VectorXd r = b;
  VectorXd p = r;
  double rs = r.squaredNorm();
  for (int it = 1; it <= max_iter; ++it) {
    VectorXd ap = op.apply(p);
    double curvature = p.dot(ap);
    result.iterations = it;
    if (!(curvature > 0.0)) {
      result.status = CgStatus::Indefinite;
      return result;
    }
    double step = rs / curvature;
    result.x += step * p;
    r -= step * ap;
    double rs_next = r.squaredNorm();
    if (std::sqrt(rs_next) <= tol * b_norm) {
      // Confirm on the true residual; the recurrence can drift.
      VectorXd true_r = b - op.apply(result.x);
      if (true_r.norm() <= tol * b_norm) {
        result.status = CgStatus::Converged;
        return result;
      }
      r = true_r;
      rs_next = r.squaredNorm();
      p = r;
      rs = rs_next;
      continue;
    }
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  result.status = CgStatus::MaxIterations;
  return result;
}

SymmetricOperatorHandle dense_reference_apply(const MatrixXd& nodes,
                                              const KernelSpec& kernel,
                                              DenseMode mode) {
  const Eigen::Index n = nodes.rows();
  if (n < 2) throw ShapeError("at least two nodes required");
  if (mode == DenseMode::Materialize) {
    constexpr double kBudgetBytes = 4.0 * 1024.0 * 1024.0 * 1024.0;
    if (static_cast<double>(n) * static_cast<double>(n) * 8.0 > kBudgetBytes)
      throw ResourceError(
          "dense reference matrix would exceed the 4 GiB budget; use "
          "recompute mode");
    return dense_handle(dense_normalized_adjacency(nodes, kernel));
  }

  struct State {
    MatrixXd nodes;
    KernelSpec kernel;
    VectorXd inv_sqrt;
    double k0;
  };
  auto state = std::make_shared<State>();
  state->nodes = nodes;
  state->kernel = kernel;
  state->k0 = eval_kernel(kernel, 0.0);
  VectorXd degrees = VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j)
        sum += eval_kernel(kernel, (nodes.row(i) - nodes.row(j)).norm());
    degrees(i) = sum;
    if (!(sum > 0.0))
      throw NumericalError("degree of node " + std::to_string(i) +
                           " is not positive in the dense reference");
  }
  state->inv_sqrt = degrees.array().rsqrt();

  SymmetricOperatorHandle handle;
  handle.dimension = n;
  handle.apply = [state](const VectorXd& x) -> VectorXd {
    const Eigen::Index size = state->nodes.rows();
    if (x.size() != size)
      throw ShapeError("vector length does not match operator dimension");
    VectorXd scaled = state->inv_sqrt.cwiseProduct(x);
    VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < size; ++j)
        sum += eval_kernel(state->kernel, (state->nodes.row(i) -
                                           state->nodes.row(j))
                                              .norm()) *
               scaled(j);
      out(i) = state->inv_sqrt(i) * (sum - state->k0 * scaled(i));
    }
    return out;
  };
  return handle;
}

EigenPairs dense_reference_eig(const MatrixXd& nodes, const KernelSpec& kernel,
                               int k) {
  const Eigen::Index n = nodes.rows();
  if (n < 2) throw ShapeError("at least two nodes required");
  if (k < 1 || k > n)
    throw ParameterError("need 1 <= k <= n for the dense reference");

  if (n <= 2048) {
    MatrixXd a = dense_normalized_adjacency(nodes, kernel);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
    VectorXd values(k);
    MatrixXd vectors(n, k);
    for (int i = 0; i < k; ++i) {
      values(i) = es.eigenvalues()(n - 1 - i);
      vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return make_eigenpairs(std::move(values), std::move(vectors));
  }

  SymmetricOperatorHandle handle;
  constexpr Eigen::Index kMaterializeLimit = 23000;
  handle = dense_reference_apply(nodes, kernel,
                                 n <= kMaterializeLimit
                                     ? DenseMode::Materialize
                                     : DenseMode::Recompute);
  LanczosOptions opts;
  opts.max_iter = 1000;
  opts.tol = 1e-13;
  opts.seed = 12345;
  return lanczos_largest(handle, k, opts);
}

}  // namespace fgs
