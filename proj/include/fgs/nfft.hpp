#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <memory>

#include "fgs/errors.hpp"

namespace fgs {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Modified Bessel function I_0 evaluated by its power series.  All terms are
/// positive, so the sum carries no cancellation and is accurate to a few ulp
/// over the argument range used by the window transforms (x <= ~50).
double bessel_i0(double x);

/// The frequency multi-indices {-N/2, ..., N/2 - 1}^d, enumerated
/// lexicographically with the first dimension most significant.  This is the
/// storage order of every coefficient vector in the transforms below.
class FrequencyIndexSet {
public:
  FrequencyIndexSet(int dims, int bandwidth);

  int dims() const { return d_; }
  int bandwidth() const { return N_; }
  std::size_t size() const { return size_; }

  /// Component `dim` of the flat-th multi-index.
  int component(std::size_t flat, int dim) const;

private:
  int d_;
  int N_;
  std::size_t size_;
};

/// Exact nonequispaced discrete Fourier transform,
///   result_j = sum_{l in I_N} fhat_l exp(+2 pi i l . v_j).
/// O(n N^d); reference oracle for NfftPlan::forward.
VectorXcd direct_ndft(int dims, int bandwidth, const MatrixXd& nodes,
                      const VectorXcd& fhat);

/// Exact adjoint transform, result_l = sum_j x_j exp(-2 pi i l . v_j).
VectorXcd direct_adjoint_ndft(int dims, int bandwidth, const MatrixXd& nodes,
                              const VectorXcd& x);

/// Approximate nonequispaced FFT for fixed nodes.
///
/// The plan grids data onto a 2x-oversampled regular grid through a truncated
/// Kaiser-Bessel window, runs an equispaced FFT, and compensates in frequency
/// space by the window's Fourier transform.  Plan construction precomputes the
/// per-node window values (O(d m n) memory), so repeated applications cost
/// O(m^d n + M^d log M) each.  Forward and adjoint are exact transposes of one
/// another and may be called concurrently on one plan with distinct buffers.
class NfftPlan {
public:
  /// nodes: one point per row, every entry in [-1/2, 1/2).
  /// cutoff m controls the window truncation; m = 8 reaches roughly double
  /// precision at the default oversampling factor 2.
  NfftPlan(int dims, int bandwidth, int cutoff, const MatrixXd& nodes,
           double oversampling = 2.0);
  ~NfftPlan();
  NfftPlan(NfftPlan&& other) noexcept;
  NfftPlan& operator=(NfftPlan&& other) noexcept;
  NfftPlan(const NfftPlan&) = delete;
  NfftPlan& operator=(const NfftPlan&) = delete;

  int dims() const;
  int bandwidth() const;
  int cutoff() const;
  Eigen::Index node_count() const;
  std::size_t coefficient_count() const;
  const FrequencyIndexSet& frequencies() const;
  int grid_size() const;  ///< oversampled grid points per dimension

  /// result_j ~= sum_{l in I_N} fhat_l exp(+2 pi i l . v_j)
  VectorXcd forward(const VectorXcd& fhat) const;

  /// result_l ~= sum_j x_j exp(-2 pi i l . v_j)
  VectorXcd adjoint(const VectorXcd& x) const;

  /// forward() for coefficients with conjugate symmetry; returns the real
  /// part.  Debug builds assert that the imaginary residue is negligible
  /// relative to the result scale.
  VectorXd forward_real(const VectorXcd& fhat) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace fgs
