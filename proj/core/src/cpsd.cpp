#include "podwind/cpsd.hpp"

#include <cmath>
#include <numbers>

#include "podwind/errors.hpp"
#include "podwind/record_set.hpp"

namespace podwind {

CpsdMatrix::CpsdMatrix(std::size_t n_components, std::size_t n_lines, double delta_omega,
                       std::vector<std::string> labels)
    : n_(n_components),
      lines_(n_lines),
      delta_omega_(delta_omega),
      values_(n_components * n_components * n_lines, cplx{0.0, 0.0}) {
  if (n_components == 0) throw Error(Errc::shape, "CPSD matrix needs at least one component");
  if (!(delta_omega > 0.0) || !std::isfinite(delta_omega))
    throw Error(Errc::shape, "frequency spacing must be positive");
  set_labels(std::move(labels));
}

void CpsdMatrix::set_labels(std::vector<std::string> labels) {
  if (labels.empty()) labels = generic_labels(n_);
  if (labels.size() != n_) throw Error(Errc::shape, "label count does not match CPSD dimension");
  labels_ = std::move(labels);
}

Eigen::Map<RowMatrixXcd> CpsdMatrix::line(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(n_);
  return Eigen::Map<RowMatrixXcd>(values_.data() + k * n_ * n_, n, n);
}

Eigen::Map<const RowMatrixXcd> CpsdMatrix::line(std::size_t k) const {
  const auto n = static_cast<Eigen::Index>(n_);
  return Eigen::Map<const RowMatrixXcd>(values_.data() + k * n_ * n_, n, n);
}

namespace {

double inf_norm(const Eigen::Ref<const RowMatrixXcd>& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

double hermitian_defect(const CpsdMatrix& s) {
  double worst = 0.0;
  for (std::size_t k = 0; k < s.n_lines(); ++k) {
    const auto m = s.line(k);
    const double scale = inf_norm(m);
    if (scale == 0.0) continue;
    const RowMatrixXcd diff = m - m.adjoint();
    worst = std::max(worst, inf_norm(diff) / scale);
  }
  return worst;
}

void check_invariants(const CpsdMatrix& s) {
  if (s.n_lines() == 0) throw Error(Errc::invalid_input, "CPSD has no frequency lines");
  for (std::size_t k = 0; k < s.n_lines(); ++k) {
    const auto m = s.line(k);
    for (const auto& v : s.values().subspan(k * s.n_components() * s.n_components(),
                                            s.n_components() * s.n_components()))
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(Errc::invalid_input, "non-finite CPSD value at line " + std::to_string(k));
    const double scale = inf_norm(m);
    if (scale == 0.0) continue;
    const RowMatrixXcd diff = m - m.adjoint();
    if (inf_norm(diff) > 1e-12 * scale)
      throw Error(Errc::invalid_input, "CPSD line " + std::to_string(k) + " is not Hermitian");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, i).real() < -1e-12 * scale)
        throw Error(Errc::invalid_input, "negative auto-spectrum at line " + std::to_string(k));
  }
}

std::size_t last_line_at_or_below(const CpsdMatrix& s, double cutoff_hz) {
  const double wc = 2.0 * std::numbers::pi * cutoff_hz;
  if (s.n_lines() == 0 || wc < 0.0)
    throw Error(Errc::empty_spectrum, "cutoff lies below the first frequency line");
  const double idx = std::floor(wc / s.delta_omega() * (1.0 + 1e-12) + 1e-9);
  return std::min(static_cast<std::size_t>(idx), s.n_lines() - 1);
}

Eigen::VectorXd one_sided_psd_hz(const CpsdMatrix& s, std::size_t i) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(s.n_lines()));
  for (std::size_t k = 0; k < s.n_lines(); ++k)
    g[static_cast<Eigen::Index>(k)] =
        (k == 0 ? 1.0 : 2.0) * 2.0 * std::numbers::pi * s.at(k, i, i).real();
  return g;
}

}  // namespace podwind
