#include "fgs/graphop.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fgs/errors.hpp"

namespace fgs {

std::optional<double> propagation_bound(double eta, double epsilon) {
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be nonnegative");
  if (epsilon >= eta) return std::nullopt;
  return epsilon * (1.0 + eta) / (eta * (eta - epsilon));
}

struct AdjacencyOperator::Impl {
  MatrixXd nodes;
  KernelSpec kernel;
  FastsumParams params;
  AdjacencyBackend backend;
  std::unique_ptr<FastsumPlan> plan;  // null for the direct backend
  double k0;
  VectorXd degrees;
  VectorXd inv_sqrt_degrees;

  VectorXd apply_kernel(const VectorXd& x) const {
    if (x.size() != nodes.rows())
      throw ShapeError("input length does not match operator dimension");
    if (plan) return plan->apply(x);
    return direct_apply(nodes, kernel, x);
  }
};

AdjacencyOperator::AdjacencyOperator(const MatrixXd& nodes,
                                     const KernelSpec& kernel,
                                     const FastsumParams& params,
                                     AdjacencyBackend backend) {
  if (nodes.rows() < 2)
    throw ShapeError("adjacency operator needs at least two nodes");
  if (nodes.cols() < 1 || nodes.cols() > 3)
    throw ParameterError("node dimension must be 1, 2, or 3");

  auto impl = std::make_unique<Impl>();
  impl->nodes = nodes;
  impl->kernel = kernel;
  impl->params = params;
  impl->backend = backend;
  if (backend == AdjacencyBackend::Fastsum)
    impl->plan = std::make_unique<FastsumPlan>(nodes, kernel, params);
  impl->k0 = eval_kernel(kernel, 0.0);

  const Eigen::Index n = nodes.rows();
  impl->degrees =
      impl->apply_kernel(VectorXd::Ones(n)) - VectorXd::Constant(n, impl->k0);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(impl->degrees(j) > 0.0))
      throw NumericalError(
          "computed degree of node " + std::to_string(j) +
          " is not positive (" + std::to_string(impl->degrees(j)) +
          "); increase the fast-summation bandwidth/cutoff or widen the "
          "kernel");
  }
  impl->inv_sqrt_degrees = impl->degrees.array().rsqrt();
  impl_ = std::move(impl);
}

AdjacencyOperator::~AdjacencyOperator() = default;
AdjacencyOperator::AdjacencyOperator(AdjacencyOperator&&) noexcept = default;
AdjacencyOperator& AdjacencyOperator::operator=(AdjacencyOperator&&) noexcept =
    default;

Eigen::Index AdjacencyOperator::size() const { return impl_->nodes.rows(); }
int AdjacencyOperator::dims() const {
  return static_cast<int>(impl_->nodes.cols());
}
const MatrixXd& AdjacencyOperator::nodes() const { return impl_->nodes; }
const KernelSpec& AdjacencyOperator::kernel() const { return impl_->kernel; }
AdjacencyBackend AdjacencyOperator::backend() const { return impl_->backend; }
double AdjacencyOperator::kernel_zero() const { return impl_->k0; }
const VectorXd& AdjacencyOperator::degrees() const { return impl_->degrees; }
const FastsumPlan* AdjacencyOperator::plan() const {
  return impl_->plan.get();
}

VectorXd AdjacencyOperator::apply_kernel(const VectorXd& x) const {
  return impl_->apply_kernel(x);
}

VectorXd AdjacencyOperator::apply_weight(const VectorXd& x) const {
  return impl_->apply_kernel(x) - impl_->k0 * x;
}

VectorXd AdjacencyOperator::apply_normalized(const VectorXd& x) const {
  VectorXd scaled = impl_->inv_sqrt_degrees.cwiseProduct(x);
  VectorXd weighted = impl_->apply_kernel(scaled) - impl_->k0 * scaled;
  return impl_->inv_sqrt_degrees.cwiseProduct(weighted);
}

VectorXd AdjacencyOperator::apply_sym_laplacian(const VectorXd& x) const {
  return x - apply_normalized(x);
}

PropagationEstimate AdjacencyOperator::estimate_eta_epsilon(
    EstimateMode mode, int sample_count, std::uint64_t seed) const {
  const Eigen::Index n = size();
  PropagationEstimate result;

  if (mode == EstimateMode::Sampled || !impl_->plan) {
    double kernel_err =
        impl_->plan ? impl_->plan->kernel_error_estimate(sample_count, seed)
                    : 0.0;
    double d_min = impl_->degrees.minCoeff();
    double d_max = impl_->degrees.maxCoeff();
    result.eta = d_min / d_max;
    // The entrywise kernel error accumulates linearly over a row of length n.
    result.epsilon = static_cast<double>(n) * kernel_err / d_max;
  } else {
    // Column sweep: exact kernel columns give the exact degrees, and the
    // per-column difference to the fast product accumulates the row sums of
    // |E|.  Symmetry of both matrices lets columns stand in for rows.
    VectorXd row_abs_err = VectorXd::Zero(n);
    VectorXd exact_degrees = VectorXd::Zero(n);
    VectorXd unit = VectorXd::Zero(n);
    VectorXd column(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index r = 0; r < n; ++r)
        column(r) =
            eval_kernel(impl_->kernel,
                        (impl_->nodes.row(r) - impl_->nodes.row(i)).norm());
      exact_degrees(i) = column.sum() - impl_->k0;
      unit(i) = 1.0;
      row_abs_err += (impl_->apply_kernel(unit) - column).cwiseAbs();
      unit(i) = 0.0;
    }
    double d_min = exact_degrees.minCoeff();
    double d_max = exact_degrees.maxCoeff();
    result.eta = d_min / d_max;
    result.epsilon = row_abs_err.maxCoeff() / d_max;
  }

  if (result.eta > 0.0)
    result.bound = propagation_bound(result.eta, result.epsilon);
  return result;
}

}  // namespace fgs
