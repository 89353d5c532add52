#include "podwind/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "podwind/errors.hpp"
#include "podwind/record_set.hpp"

namespace podwind {

SpectralModes::SpectralModes(std::size_t n_components, std::size_t n_lines, double delta_omega,
                             std::vector<std::string> labels)
    : n_(n_components),
      lines_(n_lines),
      delta_omega_(delta_omega),
      labels_(labels.empty() ? generic_labels(n_components) : std::move(labels)),
      eigenvalues_(n_components * n_lines, 0.0),
      eigenvectors_(n_components * n_components * n_lines, cplx{}) {
  if (labels_.size() != n_) throw Error(Errc::shape, "label count does not match mode dimension");
}

Eigen::Map<const RowMatrixXcd> SpectralModes::eigenvectors(std::size_t k) const {
  const auto n = static_cast<Eigen::Index>(n_);
  return Eigen::Map<const RowMatrixXcd>(eigenvectors_.data() + k * n_ * n_, n, n);
}

Eigen::Map<RowMatrixXcd> SpectralModes::eigenvectors(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(n_);
  return Eigen::Map<RowMatrixXcd>(eigenvectors_.data() + k * n_ * n_, n, n);
}

void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  Eigen::Index pivot = 0;
  while (std::abs(v[pivot]) < peak * (1.0 - 1e-12)) ++pivot;
  v *= std::conj(v[pivot]) / std::abs(v[pivot]);
  v[pivot] = cplx(v[pivot].real(), 0.0);
}

namespace {

// Descending lexicographic order on (Re, Im) of successive entries.
bool lexicographically_greater(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() > b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() > b[i].imag();
  }
  return false;
}

}  // namespace

SpectralModes decompose(const CpsdMatrix& s) {
  const std::size_t n = s.n_components();
  SpectralModes out(n, s.n_lines(), s.delta_omega(), s.labels());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> order(n);
  std::vector<Eigen::VectorXcd> vecs(n);
  std::vector<double> vals(n);

  for (std::size_t k = 0; k < s.n_lines(); ++k) {
    const Eigen::MatrixXcd a = s.line(k);
    const double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
    if (scale > 0.0 && (a - a.adjoint()).cwiseAbs().rowwise().sum().maxCoeff() > 1e-12 * scale)
      throw Error(Errc::invalid_input, "CPSD line " + std::to_string(k) + " is not Hermitian");

    solver.compute(a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
      throw Error(Errc::numerical,
                  "eigen-solver did not converge at frequency line " + std::to_string(k));

    // Eigen returns ascending order.
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = static_cast<Eigen::Index>(n - 1 - i);
      vals[i] = solver.eigenvalues()[src];
      vecs[i] = solver.eigenvectors().col(src);
      fix_phase(vecs[i]);
    }
    const double lead = std::max(vals[0], 0.0);
    for (double& v : vals)
      if (v < 0.0 && v >= -kClampTolerance * lead) v = 0.0;

    std::iota(order.begin(), order.end(), std::size_t{0});
    // Exact ties (typically clamped zeros) are ordered by eigenvector.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (vals[x] == vals[y]) return lexicographically_greater(vecs[x], vecs[y]);
      return vals[x] > vals[y];
    });

    auto psi = out.eigenvectors(k);
    for (std::size_t i = 0; i < n; ++i) {
      out.eigenvalue(k, i) = vals[order[i]];
      psi.row(static_cast<Eigen::Index>(i)) = vecs[order[i]].transpose();
    }

    // Residual ||S psi - lambda psi||_2 <= 1e-9 ||S||_2 for every mode.
    const double norm2 = std::max(std::abs(solver.eigenvalues()[0]),
                                  std::abs(solver.eigenvalues()[static_cast<Eigen::Index>(n - 1)]));
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXcd v = psi.row(static_cast<Eigen::Index>(i)).transpose();
      const double residual = (a * v - out.eigenvalue(k, i) * v).norm();
      if (residual > 1e-9 * norm2 + 1e-300)
        throw Error(Errc::numerical, "eigenpair residual bound violated at frequency line " +
                                         std::to_string(k));
    }
  }
  return out;
}

CpsdMatrix reconstruct(const SpectralModes& m, std::size_t n_modes) {
  if (n_modes < 1 || n_modes > m.n_components())
    throw Error(Errc::argument, "mode count " + std::to_string(n_modes) + " outside 1.." +
                                    std::to_string(m.n_components()));
  CpsdMatrix out(m.n_components(), m.n_lines(), m.delta_omega(), m.labels());
  const auto nm = static_cast<Eigen::Index>(n_modes);
  for (std::size_t k = 0; k < m.n_lines(); ++k) {
    const auto psi = m.eigenvectors(k).topRows(nm);  // nm x N, rows are modes
    Eigen::VectorXd lambda(nm);
    for (Eigen::Index i = 0; i < nm; ++i) lambda[i] = m.eigenvalue(k, static_cast<std::size_t>(i));
    // S = Psi^T diag(lambda) conj(Psi) with modes as rows.
    out.line(k).noalias() = psi.transpose() * lambda.asDiagonal() * psi.conjugate();
  }
  return out;
}

CapturedEnergy captured_energy(const SpectralModes& m, std::size_t n_modes) {
  if (n_modes < 1 || n_modes > m.n_components())
    throw Error(Errc::argument, "mode count " + std::to_string(n_modes) + " outside 1.." +
                                    std::to_string(m.n_components()));
  CapturedEnergy out;
  out.per_line.resize(m.n_lines());
  double kept_total = 0.0;
  double all_total = 0.0;
  for (std::size_t k = 0; k < m.n_lines(); ++k) {
    double kept = 0.0;
    double all = 0.0;
    for (std::size_t i = 0; i < m.n_components(); ++i) {
      const double v = std::max(m.eigenvalue(k, i), 0.0);
      all += v;
      if (i < n_modes) kept += v;
    }
    out.per_line[k] = all > 0.0 ? std::min(kept / all, 1.0) : 1.0;
    // Trapezoid weights on the symmetric two-sided grid: DC and the last line
    // count once, interior lines twice.
    const double w = (k == 0 || k + 1 == m.n_lines()) ? 1.0 : 2.0;
    kept_total += w * kept;
    all_total += w * all;
  }
  out.total = all_total > 0.0 ? std::min(kept_total / all_total, 1.0) : 1.0;
  if (n_modes == m.n_components()) out.total = 1.0;
  return out;
}

}  // namespace podwind
