#include "podwind/error_metrics.hpp"

#include <cmath>
#include <limits>

#include "podwind/errors.hpp"
#include "podwind/log.hpp"

namespace podwind {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pair(const SpectralMoments& test, const SpectralMoments& target) {
  if (test.n_components() != target.n_components() || test.n_components() == 0)
    throw Error(Errc::shape, "moment sets have different component counts");
}

}  // namespace

Eigen::MatrixXd SpectralMoments::correlations() const {
  const auto n = variances.size();
  Eigen::MatrixXd rho(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(variances[i] > 0.0))
      throw Error(Errc::degenerate_target,
                  "component " + std::to_string(i) + " has zero variance; correlation undefined");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      rho(i, j) = i == j ? 1.0 : covariances(i, j) / std::sqrt(variances[i] * variances[j]);
  return rho;
}

SpectralMoments moments(const CpsdMatrix& s, double cutoff_hz) {
  if (s.n_lines() < 2)
    throw Error(Errc::integration, "need at least two frequency lines to integrate");
  const std::size_t last = last_line_at_or_below(s, cutoff_hz);
  if (last == 0) throw Error(Errc::integration, "cutoff leaves no bandwidth to integrate");
  const auto n = static_cast<Eigen::Index>(s.n_components());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k <= last; ++k) {
    const double w = (k == 0 || k == last) ? 1.0 : 2.0;
    cov += w * s.line(k).real();
  }
  cov *= s.delta_omega();
  SpectralMoments out;
  out.covariances = 0.5 * (cov + cov.transpose());
  out.variances = out.covariances.diagonal();
  out.cutoff_hz = cutoff_hz;
  return out;
}

Eigen::VectorXd variance_error(const SpectralMoments& test, const SpectralMoments& target) {
  check_pair(test, target);
  Eigen::VectorXd eps(target.variances.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) {
    const double t = target.variances[i];
    if (!(t > 0.0))
      throw Error(Errc::degenerate_target,
                  "target variance of component " + std::to_string(i) + " is zero");
    eps[i] = 100.0 * (test.variances[i] - t) / t;
  }
  return eps;
}

Eigen::MatrixXd correlation_difference(const SpectralMoments& test, const SpectralMoments& target) {
  check_pair(test, target);
  Eigen::MatrixXd phi = target.correlations() - test.correlations();
  phi.diagonal().setZero();
  return phi;
}

RecordErrors compare(const SpectralMoments& test, const SpectralMoments& target) {
  return {variance_error(test, target), correlation_difference(test, target)};
}

double mean_over_pairs(const Eigen::MatrixXd& m) {
  double sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      sum += m(i, j);
      ++count;
    }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double min_over_pairs(const Eigen::MatrixXd& m) {
  double v = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) v = std::min(v, m(i, j));
  return m.rows() > 1 ? v : 0.0;
}

double max_over_pairs(const Eigen::MatrixXd& m) {
  double v = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) v = std::max(v, m(i, j));
  return m.rows() > 1 ? v : 0.0;
}

void summarize(ErrorReport& rep) {
  rep.e_mu_eps = rep.mu_eps.mean();
  rep.min_mu_eps = rep.mu_eps.minCoeff();
  rep.max_mu_eps = rep.mu_eps.maxCoeff();
  rep.e_sigma_eps = rep.sigma_eps.mean();
  rep.min_sigma_eps = rep.sigma_eps.minCoeff();
  rep.max_sigma_eps = rep.sigma_eps.maxCoeff();
  rep.e_mu_phi = mean_over_pairs(rep.mu_phi);
  rep.min_mu_phi = min_over_pairs(rep.mu_phi);
  rep.max_mu_phi = max_over_pairs(rep.mu_phi);
  rep.e_sigma_phi = mean_over_pairs(rep.sigma_phi);
  rep.min_sigma_phi = min_over_pairs(rep.sigma_phi);
  rep.max_sigma_phi = max_over_pairs(rep.sigma_phi);
  if (!rep.has_dispersion) {
    rep.e_sigma_eps = rep.min_sigma_eps = rep.max_sigma_eps = kNaN;
    rep.e_sigma_phi = rep.min_sigma_phi = rep.max_sigma_phi = kNaN;
  }
}

ErrorReport aggregate(std::span<const RecordErrors> records, ReportMetadata meta) {
  if (records.empty()) throw Error(Errc::argument, "cannot aggregate zero records");
  const auto r = static_cast<Eigen::Index>(records.size());
  const auto n = records.front().epsilon.size();
  for (const auto& rec : records)
    if (rec.epsilon.size() != n || rec.phi.rows() != n || rec.phi.cols() != n)
      throw Error(Errc::shape, "records have inconsistent component counts");

  ErrorReport rep;
  rep.meta = std::move(meta);
  rep.n_records = records.size();
  rep.has_dispersion = records.size() >= 2;
  if (!rep.has_dispersion)
    warn("aggregate: only one record; reporting means without standard deviations");

  rep.epsilon.resize(r, n);
  rep.phi.reserve(records.size());
  for (Eigen::Index k = 0; k < r; ++k) {
    rep.epsilon.row(k) = records[static_cast<std::size_t>(k)].epsilon.transpose();
    rep.phi.push_back(records[static_cast<std::size_t>(k)].phi);
  }

  rep.mu_eps = rep.epsilon.colwise().mean().transpose();
  rep.min_eps = rep.epsilon.colwise().minCoeff().transpose();
  rep.max_eps = rep.epsilon.colwise().maxCoeff().transpose();
  const Eigen::MatrixXd centred = rep.epsilon.rowwise() - rep.mu_eps.transpose();
  if (rep.has_dispersion) {
    rep.sigma_eps = (centred.colwise().squaredNorm() / static_cast<double>(r - 1)).cwiseSqrt().transpose();
  } else {
    rep.sigma_eps = Eigen::VectorXd::Constant(n, kNaN);
  }

  rep.mu_phi = Eigen::MatrixXd::Zero(n, n);
  rep.min_phi = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  rep.max_phi = Eigen::MatrixXd::Constant(n, n, -std::numeric_limits<double>::infinity());
  for (const auto& p : rep.phi) {
    rep.mu_phi += p;
    rep.min_phi = rep.min_phi.cwiseMin(p);
    rep.max_phi = rep.max_phi.cwiseMax(p);
  }
  rep.mu_phi /= static_cast<double>(r);
  if (rep.has_dispersion) {
    Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : rep.phi) ss += (p - rep.mu_phi).cwiseAbs2();
    rep.sigma_phi = (ss / static_cast<double>(r - 1)).cwiseSqrt();
  } else {
    rep.sigma_phi = Eigen::MatrixXd::Constant(n, n, kNaN);
  }

  rep.rho_eps = Eigen::MatrixXd::Constant(n, n, kNaN);
  if (rep.has_dispersion) {
    const Eigen::MatrixXd cov = centred.transpose() * centred;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d = std::sqrt(cov(i, i) * cov(j, j));
        if (d > 0.0) rep.rho_eps(i, j) = i == j ? 1.0 : cov(i, j) / d;
      }
  }

  summarize(rep);
  return rep;
}

}  // namespace podwind
