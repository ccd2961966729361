#include "fgs/nfft.hpp"

#include <fftw3.h>

#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "fgs/detail/fftw.hpp"

namespace fgs {

namespace detail {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace detail

namespace {

constexpr double kPi = std::numbers::pi;

using detail::FftwBuffer;
using detail::planner_mutex;

void validate_common(int d, int N, const MatrixXd& nodes) {
  if (d < 1 || d > 3)
    throw ParameterError("dims must be 1, 2, or 3, got " + std::to_string(d));
  if (N < 2 || N % 2 != 0)
    throw ParameterError("bandwidth must be even and >= 2, got " + std::to_string(N));
  if (nodes.cols() != d)
    throw ShapeError("nodes have " + std::to_string(nodes.cols()) +
                     " columns, expected " + std::to_string(d));
  if (nodes.rows() == 0) throw ShapeError("node set is empty");
  for (Eigen::Index j = 0; j < nodes.rows(); ++j)
    for (int t = 0; t < d; ++t) {
      double v = nodes(j, t);
      if (!(v >= -0.5 && v < 0.5))
        throw RangeError("node " + std::to_string(j) + " component " +
                         std::to_string(t) + " = " + std::to_string(v) +
                         " outside [-1/2, 1/2)");
    }
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

} // namespace

double bessel_i0(double x) {
  double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

FrequencyIndexSet::FrequencyIndexSet(int dims, int bandwidth)
    : d_(dims), N_(bandwidth) {
  if (d_ < 1 || d_ > 3) throw ParameterError("dims must be 1, 2, or 3");
  if (N_ < 2 || N_ % 2 != 0) throw ParameterError("bandwidth must be even and >= 2");
  size_ = ipow(static_cast<std::size_t>(N_), d_);
}

int FrequencyIndexSet::component(std::size_t flat, int dim) const {
  if (flat >= size_) throw RangeError("flat index out of range");
  if (dim < 0 || dim >= d_) throw RangeError("dimension out of range");
  std::size_t stride = ipow(static_cast<std::size_t>(N_), d_ - 1 - dim);
  return static_cast<int>((flat / stride) % N_) - N_ / 2;
}

VectorXcd direct_ndft(int dims, int bandwidth, const MatrixXd& nodes,
                      const VectorXcd& fhat) {
  validate_common(dims, bandwidth, nodes);
  FrequencyIndexSet freqs(dims, bandwidth);
  if (static_cast<std::size_t>(fhat.size()) != freqs.size())
    throw ShapeError("coefficient vector has wrong length");
  const Eigen::Index n = nodes.rows();
  VectorXcd out = VectorXcd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::complex<double> acc = 0.0;
    for (std::size_t f = 0; f < freqs.size(); ++f) {
      double phase = 0.0;
      for (int t = 0; t < dims; ++t)
        phase += freqs.component(f, t) * nodes(j, t);
      acc += fhat(static_cast<Eigen::Index>(f)) *
             std::polar(1.0, 2.0 * kPi * phase);
    }
    out(j) = acc;
  }
  return out;
}

VectorXcd direct_adjoint_ndft(int dims, int bandwidth, const MatrixXd& nodes,
                              const VectorXcd& x) {
  validate_common(dims, bandwidth, nodes);
  FrequencyIndexSet freqs(dims, bandwidth);
  if (x.size() != nodes.rows())
    throw ShapeError("input vector length does not match node count");
  VectorXcd out = VectorXcd::Zero(static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t f = 0; f < freqs.size(); ++f) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index j = 0; j < nodes.rows(); ++j) {
      double phase = 0.0;
      for (int t = 0; t < dims; ++t)
        phase += freqs.component(f, t) * nodes(j, t);
      acc += x(j) * std::polar(1.0, -2.0 * kPi * phase);
    }
    out(static_cast<Eigen::Index>(f)) = acc;
  }
  return out;
}

struct NfftPlan::Impl {
  int d = 0;
  int N = 0;
  int m = 0;
  int M = 0;  // oversampled grid points per dimension, even
  double b = 0.0;
  Eigen::Index n = 0;
  FrequencyIndexSet freqs{1, 2};
  std::size_t grid_total = 0;

  // Per-dimension deconvolution factors 1 / I_0(m sqrt(b^2 - (2 pi l / M)^2)),
  // indexed by l + N/2.  The grid transform normalization cancels against the
  // 1/M carried by the window transform, so no further scaling appears.
  std::vector<double> deconv;

  // Per node and dimension: 2m window taps and their wrapped grid indices.
  int taps = 0;
  std::vector<double> w;    // [n][d][taps]
  std::vector<int> idx;     // [n][d][taps]

  fftw_plan plan_backward = nullptr;  // exp(+2 pi i uk/M), frequency -> grid
  fftw_plan plan_forward = nullptr;   // exp(-2 pi i uk/M), grid -> frequency

  // Grid-sized work arrays reused across applies.  Transforms execute
  // serially, so one pair per plan is enough; reallocating ~100 MB per call
  // would otherwise dominate the apply time at large bandwidths.
  std::unique_ptr<FftwBuffer> grid_in, grid_out;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_backward) fftw_destroy_plan(plan_backward);
    if (plan_forward) fftw_destroy_plan(plan_forward);
  }

  double window(double diff) const {
    // Kaiser-Bessel bump sinh(b sqrt(m^2 - (M diff)^2)) / (pi sqrt(...)),
    // truncated at |M diff| = m where it has decayed to b/pi.
    double arg = static_cast<double>(m) * m - (M * diff) * (M * diff);
    if (arg <= 0.0) return b / kPi;
    double t = std::sqrt(arg);
    if (t < 1e-8) return (b + b * b * b * t * t / 6.0) / kPi;
    return std::sinh(b * t) / (kPi * t);
  }

  int wrap_freq(int l) const { return (l + M) % M; }

  // Scatter deconvolved coefficients into the oversampled frequency grid.
  void place_coefficients(const VectorXcd& fhat, fftw_complex* grid) const {
    std::memset(grid, 0, sizeof(fftw_complex) * grid_total);
    const int half = N / 2;
    if (d == 1) {
      for (int a = 0; a < N; ++a) {
        std::complex<double> v = fhat(a) * deconv[a];
        int g = wrap_freq(a - half);
        grid[g][0] = v.real();
        grid[g][1] = v.imag();
      }
    } else if (d == 2) {
      std::size_t f = 0;
      for (int a = 0; a < N; ++a) {
        std::size_t ga = static_cast<std::size_t>(wrap_freq(a - half)) * M;
        for (int c = 0; c < N; ++c, ++f) {
          std::complex<double> v = fhat(static_cast<Eigen::Index>(f)) *
                                   (deconv[a] * deconv[c]);
          std::size_t g = ga + static_cast<std::size_t>(wrap_freq(c - half));
          grid[g][0] = v.real();
          grid[g][1] = v.imag();
        }
      }
    } else {
      std::size_t f = 0;
      for (int a = 0; a < N; ++a) {
        std::size_t ga = static_cast<std::size_t>(wrap_freq(a - half)) * M * M;
        for (int c = 0; c < N; ++c) {
          std::size_t gc = ga + static_cast<std::size_t>(wrap_freq(c - half)) * M;
          double dac = deconv[a] * deconv[c];
          for (int e = 0; e < N; ++e, ++f) {
            std::complex<double> v = fhat(static_cast<Eigen::Index>(f)) *
                                     (dac * deconv[e]);
            std::size_t g = gc + static_cast<std::size_t>(wrap_freq(e - half));
            grid[g][0] = v.real();
            grid[g][1] = v.imag();
          }
        }
      }
    }
  }

  // Gather the oversampled frequency grid back into coefficient order.
  void extract_coefficients(const fftw_complex* grid, VectorXcd& out) const {
    const int half = N / 2;
    if (d == 1) {
      for (int a = 0; a < N; ++a) {
        int g = wrap_freq(a - half);
        out(a) = std::complex<double>(grid[g][0], grid[g][1]) * deconv[a];
      }
    } else if (d == 2) {
      std::size_t f = 0;
      for (int a = 0; a < N; ++a) {
        std::size_t ga = static_cast<std::size_t>(wrap_freq(a - half)) * M;
        for (int c = 0; c < N; ++c, ++f) {
          std::size_t g = ga + static_cast<std::size_t>(wrap_freq(c - half));
          out(static_cast<Eigen::Index>(f)) =
              std::complex<double>(grid[g][0], grid[g][1]) *
              (deconv[a] * deconv[c]);
        }
      }
    } else {
      std::size_t f = 0;
      for (int a = 0; a < N; ++a) {
        std::size_t ga = static_cast<std::size_t>(wrap_freq(a - half)) * M * M;
        for (int c = 0; c < N; ++c) {
          std::size_t gc = ga + static_cast<std::size_t>(wrap_freq(c - half)) * M;
          double dac = deconv[a] * deconv[c];
          for (int e = 0; e < N; ++e, ++f) {
            std::size_t g = gc + static_cast<std::size_t>(wrap_freq(e - half));
            out(static_cast<Eigen::Index>(f)) =
                std::complex<double>(grid[g][0], grid[g][1]) *
                (dac * deconv[e]);
          }
        }
      }
    }
  }

  std::complex<double> gather(const fftw_complex* grid, Eigen::Index j) const {
    const double* wj = &w[static_cast<std::size_t>(j) * d * taps];
    const int* ij = &idx[static_cast<std::size_t>(j) * d * taps];
    std::complex<double> acc = 0.0;
    if (d == 1) {
      for (int a = 0; a < taps; ++a)
        acc += wj[a] * std::complex<double>(grid[ij[a]][0], grid[ij[a]][1]);
    } else if (d == 2) {
      for (int a = 0; a < taps; ++a) {
        std::size_t ra = static_cast<std::size_t>(ij[a]) * M;
        std::complex<double> row = 0.0;
        for (int c = 0; c < taps; ++c) {
          std::size_t g = ra + static_cast<std::size_t>(ij[taps + c]);
          row += wj[taps + c] * std::complex<double>(grid[g][0], grid[g][1]);
        }
        acc += wj[a] * row;
      }
    } else {
      for (int a = 0; a < taps; ++a) {
        std::size_t ra = static_cast<std::size_t>(ij[a]) * M * M;
        std::complex<double> plane = 0.0;
        for (int c = 0; c < taps; ++c) {
          std::size_t rc = ra + static_cast<std::size_t>(ij[taps + c]) * M;
          std::complex<double> row = 0.0;
          for (int e = 0; e < taps; ++e) {
            std::size_t g = rc + static_cast<std::size_t>(ij[2 * taps + e]);
            row += wj[2 * taps + e] *
                   std::complex<double>(grid[g][0], grid[g][1]);
          }
          plane += wj[taps + c] * row;
        }
        acc += wj[a] * plane;
      }
    }
    return acc;
  }

  void spread(std::complex<double> xj, Eigen::Index j, fftw_complex* grid) const {
    const double* wj = &w[static_cast<std::size_t>(j) * d * taps];
    const int* ij = &idx[static_cast<std::size_t>(j) * d * taps];
    if (d == 1) {
      for (int a = 0; a < taps; ++a) {
        std::complex<double> v = xj * wj[a];
        grid[ij[a]][0] += v.real();
        grid[ij[a]][1] += v.imag();
      }
    } else if (d == 2) {
      for (int a = 0; a < taps; ++a) {
        std::size_t ra = static_cast<std::size_t>(ij[a]) * M;
        std::complex<double> va = xj * wj[a];
        for (int c = 0; c < taps; ++c) {
          std::size_t g = ra + static_cast<std::size_t>(ij[taps + c]);
          std::complex<double> v = va * wj[taps + c];
          grid[g][0] += v.real();
          grid[g][1] += v.imag();
        }
      }
    } else {
      for (int a = 0; a < taps; ++a) {
        std::size_t ra = static_cast<std::size_t>(ij[a]) * M * M;
        std::complex<double> va = xj * wj[a];
        for (int c = 0; c < taps; ++c) {
          std::size_t rc = ra + static_cast<std::size_t>(ij[taps + c]) * M;
          std::complex<double> vc = va * wj[taps + c];
          for (int e = 0; e < taps; ++e) {
            std::size_t g = rc + static_cast<std::size_t>(ij[2 * taps + e]);
            std::complex<double> v = vc * wj[2 * taps + e];
            grid[g][0] += v.real();
            grid[g][1] += v.imag();
          }
        }
      }
    }
  }
};

NfftPlan::NfftPlan(int dims, int bandwidth, int cutoff, const MatrixXd& nodes,
                   double oversampling)
    : impl_(std::make_unique<Impl>()) {
  validate_common(dims, bandwidth, nodes);
  if (cutoff < 1 || cutoff > 32)
    throw ParameterError("cutoff must lie in [1, 32], got " + std::to_string(cutoff));
  if (!(oversampling >= 1.0))
    throw ParameterError("oversampling factor must be >= 1");

  Impl& s = *impl_;
  s.d = dims;
  s.N = bandwidth;
  s.m = cutoff;
  s.n = nodes.rows();
  s.freqs = FrequencyIndexSet(dims, bandwidth);
  s.M = 2 * static_cast<int>(std::ceil(oversampling * bandwidth / 2.0));
  s.grid_total = ipow(static_cast<std::size_t>(s.M), s.d);
  // Shape parameter of the Kaiser-Bessel window for the realized
  // oversampling ratio sigma = M/N: b = pi (2 - 1/sigma).
  s.b = kPi * (2.0 - static_cast<double>(s.N) / s.M);

  s.deconv.resize(s.N);
  for (int a = 0; a < s.N; ++a) {
    double l = a - s.N / 2;
    double arg = s.b * s.b - std::pow(2.0 * kPi * l / s.M, 2);
    s.deconv[a] = 1.0 / bessel_i0(s.m * std::sqrt(std::max(arg, 0.0)));
  }

  s.taps = 2 * s.m;
  s.w.resize(static_cast<std::size_t>(s.n) * s.d * s.taps);
  s.idx.resize(static_cast<std::size_t>(s.n) * s.d * s.taps);
  for (Eigen::Index j = 0; j < s.n; ++j)
    for (int t = 0; t < s.d; ++t) {
      double v = nodes(j, t);
      int u0 = static_cast<int>(std::ceil(v * s.M - s.m));
      std::size_t base = (static_cast<std::size_t>(j) * s.d + t) * s.taps;
      for (int a = 0; a < s.taps; ++a) {
        int u = u0 + a;
        s.w[base + a] = s.window(v - static_cast<double>(u) / s.M);
        s.idx[base + a] = ((u % s.M) + s.M) % s.M;
      }
    }

  s.grid_in = std::make_unique<FftwBuffer>(s.grid_total);
  s.grid_out = std::make_unique<FftwBuffer>(s.grid_total);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    int dims_arr[3] = {s.M, s.M, s.M};
    // Plans run on the persistent aligned buffers they were created with, so
    // no alignment restriction is needed.  Large grids amortize a measured
    // plan over many applies; small ones stick with the cheap heuristic.
    const unsigned flags =
        s.grid_total >= (std::size_t{1} << 20) ? FFTW_MEASURE : FFTW_ESTIMATE;
    s.plan_backward = fftw_plan_dft(s.d, dims_arr, s.grid_in->p, s.grid_out->p,
                                    FFTW_BACKWARD, flags);
    s.plan_forward = fftw_plan_dft(s.d, dims_arr, s.grid_in->p, s.grid_out->p,
                                   FFTW_FORWARD, flags);
    if (!s.plan_backward || !s.plan_forward)
      throw NumericalError("FFT planning failed");
  }
}

NfftPlan::~NfftPlan() = default;
NfftPlan::NfftPlan(NfftPlan&&) noexcept = default;
NfftPlan& NfftPlan::operator=(NfftPlan&&) noexcept = default;

int NfftPlan::dims() const { return impl_->d; }
int NfftPlan::bandwidth() const { return impl_->N; }
int NfftPlan::cutoff() const { return impl_->m; }
Eigen::Index NfftPlan::node_count() const { return impl_->n; }
std::size_t NfftPlan::coefficient_count() const { return impl_->freqs.size(); }
const FrequencyIndexSet& NfftPlan::frequencies() const { return impl_->freqs; }
int NfftPlan::grid_size() const { return impl_->M; }

VectorXcd NfftPlan::forward(const VectorXcd& fhat) const {
  const Impl& s = *impl_;
  if (static_cast<std::size_t>(fhat.size()) != s.freqs.size())
    throw ShapeError("coefficient vector has wrong length");
  fftw_complex* in = s.grid_in->p;
  fftw_complex* out = s.grid_out->p;
  s.place_coefficients(fhat, in);
  fftw_execute_dft(s.plan_backward, in, out);
  VectorXcd result(s.n);
  for (Eigen::Index j = 0; j < s.n; ++j) result(j) = s.gather(out, j);
  return result;
}

VectorXcd NfftPlan::adjoint(const VectorXcd& x) const {
  const Impl& s = *impl_;
  if (x.size() != s.n)
    throw ShapeError("input vector length does not match node count");
  fftw_complex* in = s.grid_in->p;
  fftw_complex* out = s.grid_out->p;
  std::memset(in, 0, sizeof(fftw_complex) * s.grid_total);
  for (Eigen::Index j = 0; j < s.n; ++j) s.spread(x(j), j, in);
  fftw_execute_dft(s.plan_forward, in, out);
  VectorXcd result(static_cast<Eigen::Index>(s.freqs.size()));
  s.extract_coefficients(out, result);
  return result;
}

VectorXd NfftPlan::forward_real(const VectorXcd& fhat) const {
  VectorXcd z = forward(fhat);
#ifndef NDEBUG
  double scale = z.cwiseAbs().maxCoeff();
  if (scale > 0.0)
    assert(z.imag().cwiseAbs().maxCoeff() <= 1e-8 * scale &&
           "imaginary residue exceeds the conjugate-symmetry budget");
#endif
  return z.real();
}

} // namespace fgs
