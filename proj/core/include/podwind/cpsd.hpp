#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace podwind {

using cplx = std::complex<double>;
using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Sidedness { one, two };

// Frequency-indexed N x N cross-spectral matrix on the uniform grid
// omega_k = k * delta_omega, k = 0 .. n_lines-1 (rad/s).
//
// Values are two-sided densities per rad/s: integrating the diagonal over
// [-omega_c, omega_c] gives the variance. Only non-negative frequencies are
// stored; S(-omega) = conj(S(omega)). Entry (i, j) is E[X_i conj(X_j)], so
// S = sum_i Lambda_i Psi_i Psi_i^H under the per-line eigendecomposition.
class CpsdMatrix {
 public:
  CpsdMatrix() = default;
  CpsdMatrix(std::size_t n_components, std::size_t n_lines, double delta_omega,
             std::vector<std::string> labels = {});

  std::size_t n_components() const noexcept { return n_; }
  std::size_t n_lines() const noexcept { return lines_; }
  double delta_omega() const noexcept { return delta_omega_; }
  double omega(std::size_t k) const noexcept { return static_cast<double>(k) * delta_omega_; }
  double max_omega() const noexcept { return lines_ ? omega(lines_ - 1) : 0.0; }
  Sidedness sided() const noexcept { return Sidedness::two; }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  void set_labels(std::vector<std::string> labels);

  Eigen::Map<RowMatrixXcd> line(std::size_t k);
  Eigen::Map<const RowMatrixXcd> line(std::size_t k) const;

  cplx& at(std::size_t k, std::size_t i, std::size_t j) { return values_[(k * n_ + i) * n_ + j]; }
  cplx at(std::size_t k, std::size_t i, std::size_t j) const {
    return values_[(k * n_ + i) * n_ + j];
  }

  // Frequency-major, then row-major N x N.
  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }

 private:
  std::size_t n_ = 0;
  std::size_t lines_ = 0;
  double delta_omega_ = 0.0;
  std::vector<std::string> labels_;
  std::vector<cplx> values_;
};

// max_k ||S_k - S_k^H||_inf / ||S_k||_inf (0 for an all-zero line).
double hermitian_defect(const CpsdMatrix& s);

// Throws Error(invalid_input) unless every line is Hermitian within 1e-12
// relative and every diagonal entry is real and >= -1e-12 relative.
void check_invariants(const CpsdMatrix& s);

// Index of the last line with omega <= 2*pi*cutoff_hz.
std::size_t last_line_at_or_below(const CpsdMatrix& s, double cutoff_hz);

// Reporting view: one-sided auto-spectrum of component i in units^2/Hz,
// G(f) = 2 * 2*pi * S(omega) for f > 0 and 2*pi*S(0) at DC.
Eigen::VectorXd one_sided_psd_hz(const CpsdMatrix& s, std::size_t i);

}  // namespace podwind
