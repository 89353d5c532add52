#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podwind/cpsd.hpp"

namespace podwind {

// Per-frequency eigendecomposition S(omega_k) = sum_i Lambda_i Psi_i Psi_i^H.
//
// Eigenvalues are sorted descending per line, independently at every line (no
// mode tracking across frequency). Each eigenvector is rotated so that its
// largest-magnitude entry is real and positive (lowest index wins ties).
class SpectralModes {
 public:
  SpectralModes() = default;
  SpectralModes(std::size_t n_components, std::size_t n_lines, double delta_omega,
                std::vector<std::string> labels = {});

  std::size_t n_components() const noexcept { return n_; }
  std::size_t n_lines() const noexcept { return lines_; }
  double delta_omega() const noexcept { return delta_omega_; }
  double omega(std::size_t k) const noexcept { return static_cast<double>(k) * delta_omega_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  double eigenvalue(std::size_t k, std::size_t mode) const { return eigenvalues_[k * n_ + mode]; }
  double& eigenvalue(std::size_t k, std::size_t mode) { return eigenvalues_[k * n_ + mode]; }

  // Row i of the returned matrix is mode i; columns are components.
  Eigen::Map<const RowMatrixXcd> eigenvectors(std::size_t k) const;
  Eigen::Map<RowMatrixXcd> eigenvectors(std::size_t k);

  // Eigenvalues frequency-major; eigenvectors frequency-major, mode-major,
  // component-minor.
  std::span<const double> eigenvalue_data() const noexcept { return eigenvalues_; }
  std::span<double> eigenvalue_data() noexcept { return eigenvalues_; }
  std::span<const cplx> eigenvector_data() const noexcept { return eigenvectors_; }
  std::span<cplx> eigenvector_data() noexcept { return eigenvectors_; }

 private:
  std::size_t n_ = 0;
  std::size_t lines_ = 0;
  double delta_omega_ = 0.0;
  std::vector<std::string> labels_;
  std::vector<double> eigenvalues_;
  std::vector<cplx> eigenvectors_;
};

// Negative eigenvalues no smaller than -kClampTolerance * Lambda_1 are
// round-off and are set to zero.
inline constexpr double kClampTolerance = 1e-10;

SpectralModes decompose(const CpsdMatrix& s);

// sum_{i < n_modes} Lambda_i Psi_i Psi_i^H at every line.
CpsdMatrix reconstruct(const SpectralModes& m, std::size_t n_modes);

struct CapturedEnergy {
  std::vector<double> per_line;  // lines with zero trace count as fully captured
  double total = 1.0;            // trapezoid-weighted over the grid
};

CapturedEnergy captured_energy(const SpectralModes& m, std::size_t n_modes);

// Rotates v so its largest-magnitude entry is real positive.
void fix_phase(Eigen::Ref<Eigen::VectorXcd> v);

}  // namespace podwind
