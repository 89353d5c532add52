#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podwind/cpsd.hpp"
#include "podwind/record_set.hpp"

namespace podwind {

// Variances and covariances integrated from a two-sided CPSD over
// [-cutoff, cutoff]. Covariances use only the cospectrum Re(S_ij); the
// quad-spectrum integrates to zero over the symmetric band and is ignored.
struct SpectralMoments {
  Eigen::VectorXd variances;
  Eigen::MatrixXd covariances;  // symmetric, diagonal equals `variances`
  double cutoff_hz = 0.0;

  std::size_t n_components() const noexcept { return static_cast<std::size_t>(variances.size()); }
  // rho_ij = sigma_ij / sqrt(sigma_ii^2 sigma_jj^2); throws on zero variance.
  Eigen::MatrixXd correlations() const;
};

// Trapezoid rule on the symmetric two-sided grid up to the last line at or
// below `cutoff_hz`.
SpectralMoments moments(const CpsdMatrix& s, double cutoff_hz);

// epsilon_i = 100 (sigma_ii^2 - sigma_ii,T^2) / sigma_ii,T^2, in percent.
Eigen::VectorXd variance_error(const SpectralMoments& test, const SpectralMoments& target);

// phi_ij = rho_target,ij - rho_test,ij; the diagonal is exactly zero.
Eigen::MatrixXd correlation_difference(const SpectralMoments& test, const SpectralMoments& target);

struct RecordErrors {
  Eigen::VectorXd epsilon;
  Eigen::MatrixXd phi;
};

RecordErrors compare(const SpectralMoments& test, const SpectralMoments& target);

struct ReportMetadata {
  std::vector<std::string> labels;
  double direction_deg = 0.0;
  Configuration configuration = Configuration::SM;
};

// Per-record errors and their statistics over R records. Expectations E[.]
// are unweighted means over components (epsilon) or over off-diagonal pairs
// i < j (phi). Standard deviations use the n-1 normalisation and are NaN when
// R < 2.
struct ErrorReport {
  ReportMetadata meta;
  std::size_t n_records = 0;
  bool has_dispersion = false;

  Eigen::MatrixXd epsilon;           // R x N
  std::vector<Eigen::MatrixXd> phi;  // R entries of N x N

  Eigen::VectorXd mu_eps, sigma_eps, min_eps, max_eps;
  Eigen::MatrixXd mu_phi, sigma_phi, min_phi, max_phi;
  Eigen::MatrixXd rho_eps;  // correlation of epsilon columns across records

  double e_mu_eps = 0.0, e_sigma_eps = 0.0, e_mu_phi = 0.0, e_sigma_phi = 0.0;
  double min_mu_eps = 0.0, max_mu_eps = 0.0, min_sigma_eps = 0.0, max_sigma_eps = 0.0;
  double min_mu_phi = 0.0, max_mu_phi = 0.0, min_sigma_phi = 0.0, max_sigma_phi = 0.0;
};

ErrorReport aggregate(std::span<const RecordErrors> records, ReportMetadata meta);

// Fills the E[.], min and max summaries from the per-component and per-pair
// statistics already set on `rep`.
void summarize(ErrorReport& rep);

// Helpers shared by reports built from streaming sums.
double mean_over_pairs(const Eigen::MatrixXd& m);
double min_over_pairs(const Eigen::MatrixXd& m);
double max_over_pairs(const Eigen::MatrixXd& m);

}  // namespace podwind
