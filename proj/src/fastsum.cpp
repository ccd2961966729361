#include "fgs/fastsum.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace fgs {

FastsumParams FastsumParams::preset(int level, double eps_b) {
  FastsumParams p;
  switch (level) {
    case 1: p.bandwidth = 16; p.cutoff = 2; break;
    case 2: p.bandwidth = 32; p.cutoff = 4; break;
    case 3: p.bandwidth = 64; p.cutoff = 7; break;
    default:
      throw ParameterError("preset level must be 1, 2, or 3");
  }
  p.smoothness = p.cutoff;
  p.eps_b = eps_b;
  return p;
}

namespace {

void validate_params(const FastsumParams& p) {
  if (p.bandwidth < 2 || p.bandwidth % 2 != 0)
    throw ParameterError("bandwidth must be even and >= 2");
  if (p.cutoff < 1 || p.cutoff > 32)
    throw ParameterError("cutoff must lie in [1, 32]");
  if (p.smoothness < 1 || p.smoothness > 8)
    throw ParameterError("smoothness order must lie in [1, 8]");
  if (!(p.eps_b >= 0.0) || !(p.eps_b < 0.5))
    throw ParameterError("blend width must lie in [0, 1/2)");
  if (!(p.oversampling >= 1.0))
    throw ParameterError("oversampling factor must be >= 1");
}

} // namespace

struct FastsumPlan::Impl {
  MatrixXd nodes;
  FastsumParams params;
  KernelSpec kernel;
  KernelSpec scaled;
  double rho = 1.0;
  double out_factor = 1.0;
  double k0 = 0.0;
  RegularizedKernel reg;
  KernelCoefficients coeffs;
  NfftPlan nfft;

  Impl(MatrixXd nodes_, const KernelSpec& kernel_, const FastsumParams& params_,
       double rho_, const KernelSpec& scaled_, double out_factor_,
       MatrixXd scaled_nodes)
      : nodes(std::move(nodes_)),
        params(params_),
        kernel(kernel_),
        scaled(scaled_),
        rho(rho_),
        out_factor(out_factor_),
        k0(eval_kernel(kernel_, 0.0)),
        reg(scaled_, params_.eps_b, params_.smoothness),
        coeffs(kernel_fourier_coefficients(reg, static_cast<int>(nodes.cols()),
                                           params_.bandwidth)),
        nfft(static_cast<int>(nodes.cols()), params_.bandwidth, params_.cutoff,
             scaled_nodes, params_.oversampling) {}
};

FastsumPlan::FastsumPlan(const MatrixXd& nodes, const KernelSpec& kernel,
                         const FastsumParams& params) {
  validate_params(params);
  if (nodes.rows() == 0) throw ShapeError("node set is empty");
  if (nodes.cols() < 1 || nodes.cols() > 3)
    throw ShapeError("nodes must have 1, 2, or 3 columns");

  // Common rescaling into the ball of radius 1/4 - eps_b/2, so every pairwise
  // difference stays inside the region where the regularized kernel matches
  // the kernel.  Nodes already inside are left untouched (no upscaling).
  const double radius = 0.25 - 0.5 * params.eps_b;
  if (!(radius > 0.0)) throw ParameterError("blend width leaves no node radius");
  double maxnorm = nodes.rowwise().norm().maxCoeff();
  double rho = (maxnorm > radius) ? radius / maxnorm : 1.0;

  KernelSpec scaled = kernel;
  scaled.shape = kernel.shape * rho;
  double out_factor = 1.0;
  if (kernel.family == KernelFamily::Multiquadric) out_factor = 1.0 / rho;
  if (kernel.family == KernelFamily::InverseMultiquadric) out_factor = rho;

  impl_ = std::make_unique<Impl>(nodes, kernel, params, rho, scaled, out_factor,
                                 MatrixXd(rho * nodes));
}

FastsumPlan::~FastsumPlan() = default;
FastsumPlan::FastsumPlan(FastsumPlan&&) noexcept = default;
FastsumPlan& FastsumPlan::operator=(FastsumPlan&&) noexcept = default;

Eigen::Index FastsumPlan::size() const { return impl_->nodes.rows(); }
int FastsumPlan::dims() const { return static_cast<int>(impl_->nodes.cols()); }
const MatrixXd& FastsumPlan::nodes() const { return impl_->nodes; }
const FastsumParams& FastsumPlan::params() const { return impl_->params; }
const KernelSpec& FastsumPlan::kernel() const { return impl_->kernel; }
const KernelSpec& FastsumPlan::scaled_kernel() const { return impl_->scaled; }
double FastsumPlan::scaling() const { return impl_->rho; }
double FastsumPlan::output_factor() const { return impl_->out_factor; }
double FastsumPlan::kernel_zero() const { return impl_->k0; }
const KernelCoefficients& FastsumPlan::coefficients() const {
  return impl_->coeffs;
}

VectorXd FastsumPlan::apply(const VectorXd& x) const {
  const Impl& s = *impl_;
  if (x.size() != s.nodes.rows())
    throw ShapeError("input vector length does not match node count");
  VectorXcd spectrum = s.nfft.adjoint(x.cast<std::complex<double>>());
  spectrum.array() *= s.coeffs.values.array();
  return s.out_factor * s.nfft.forward_real(spectrum);
}

double FastsumPlan::kernel_error_estimate(int sample_count,
                                          std::uint64_t seed) const {
  return std::abs(impl_->out_factor) *
         kernel_approx_error(impl_->reg, impl_->coeffs, sample_count, seed);
}

VectorXd direct_apply(const MatrixXd& nodes, const KernelSpec& kernel,
                      const VectorXd& x) {
  if (x.size() != nodes.rows())
    throw ShapeError("input vector length does not match node count");
  const Eigen::Index n = nodes.rows();
  VectorXd out = VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += eval_kernel(kernel, (nodes.row(j) - nodes.row(i)).norm()) * x(i);
    out(j) = acc;
  }
  return out;
}

double error_matrix_norm(const FastsumPlan& plan) {
  const MatrixXd& nodes = plan.nodes();
  const Eigen::Index n = nodes.rows();
  VectorXd row_abs_sum = VectorXd::Zero(n);
  VectorXd e = VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    e(i) = 1.0;
    VectorXd column = plan.apply(e);
    e(i) = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      column(j) -= eval_kernel(plan.kernel(), (nodes.row(j) - nodes.row(i)).norm());
    row_abs_sum += column.cwiseAbs();
  }
  return row_abs_sum.maxCoeff();
}

} // namespace fgs
