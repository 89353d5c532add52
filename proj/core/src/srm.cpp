#include "podwind/srm.hpp"

#include <cmath>
#include <algorithm>
#include <future>
#include <limits>
#include <numbers>
#include <utility>

#include "fft.hpp"
#include "podwind/errors.hpp"
#include "podwind/rng.hpp"
#include "podwind/spectral.hpp"
#include "spectral_detail.hpp"

namespace podwind {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Largest admissible negative eigenvalue at line k, relative to the lead mode.
void check_calibration(const SpectralModes& m, std::size_t k, std::size_t i) {
  const double lead = std::max(m.eigenvalue(k, 0), 0.0);
  const double v = m.eigenvalue(k, i);
  if (v < -kClampTolerance * lead)
    throw Error(Errc::calibration, "eigenvalue " + std::to_string(v) + " of mode " +
                                       std::to_string(i) + " at line " + std::to_string(k) +
                                       " is negative beyond round-off");
}

}  // namespace

// SimulationPlan --------------------------------------------------------------

std::size_t SimulationPlan::mode_count() const {
  return n_modes == 0 && modes ? modes->n_components() : n_modes;
}

double SimulationPlan::period() const { return modes ? kTwoPi / modes->delta_omega() : 0.0; }

std::size_t SimulationPlan::n_steps() const {
  const double span = duration_s > 0.0 ? duration_s : period();
  return dt_s > 0.0 ? static_cast<std::size_t>(std::floor(span / dt_s + 1e-9)) : 0;
}

void SimulationPlan::validate() const {
  if (!modes) throw Error(Errc::configuration, "simulation plan has no spectral modes");
  const std::size_t n = modes->n_components();
  if (mode_count() < 1 || mode_count() > n)
    throw Error(Errc::argument, "contributing mode count " + std::to_string(mode_count()) +
                                    " outside 1.." + std::to_string(n));
  if (!(dt_s > 0.0)) throw Error(Errc::configuration, "time step must be positive");
  if (n_realizations < 1) throw Error(Errc::configuration, "need at least one realization");
  if (modes->n_lines() < 2) throw Error(Errc::configuration, "spectral modes need two or more lines");
  const double nyquist = std::numbers::pi / dt_s;
  if (modes->omega(modes->n_lines() - 1) > nyquist * (1.0 + 1e-12))
    throw Error(Errc::configuration, "frequency grid extends past the Nyquist frequency of dt");
  if (duration_s < 0.0) throw Error(Errc::configuration, "duration must be non-negative");
  if (n_steps() < 1) throw Error(Errc::configuration, "duration shorter than one time step");
  if (static_cast<double>(n_steps()) * dt_s > period() * (1.0 + 1e-9))
    throw Error(Errc::configuration, "duration exceeds one period 2 pi / d_omega of the simulated process");
  if (means.size() != 0 && static_cast<std::size_t>(means.size()) != n)
    throw Error(Errc::shape, "mean vector length does not match the component count");
  if (scale.size() != 0 && static_cast<std::size_t>(scale.size()) != n)
    throw Error(Errc::shape, "scale vector length does not match the component count");
}

// Direct cosine sum -----------------------------------------------------------

Eigen::MatrixXd simulate_subprocess(const SpectralModes& modes, std::size_t mode,
                                    std::span<const double> phases, double dt,
                                    std::size_t n_steps) {
  if (mode >= modes.n_components()) throw Error(Errc::argument, "mode index out of range");
  if (phases.size() != modes.n_lines())
    throw Error(Errc::argument, "need one random phase per frequency line");
  const auto n = static_cast<Eigen::Index>(modes.n_components());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_steps), n);
  for (std::size_t k = 1; k < modes.n_lines(); ++k) {
    check_calibration(modes, k, mode);
    const double lambda = std::max(modes.eigenvalue(k, mode), 0.0);
    if (lambda == 0.0) continue;
    const double amp = 2.0 * std::sqrt(lambda * modes.delta_omega());
    const auto psi = modes.eigenvectors(k).row(static_cast<Eigen::Index>(mode));
    const double w = modes.omega(k);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = amp * std::abs(psi[j]);
      const double vartheta = std::atan2(psi[j].imag(), psi[j].real());
      for (std::size_t s = 0; s < n_steps; ++s)
        out(static_cast<Eigen::Index>(s), j) +=
            a * std::cos(w * static_cast<double>(s) * dt + vartheta + phases[k]);
    }
  }
  return out;
}

// Synthesizer -----------------------------------------------------------------

struct Synthesizer::Fft {
  explicit Fft(std::size_t n) : fft(n), spectrum(n / 2 + 1), series(n) {}
  detail::RealFft fft;
  std::vector<cplx> spectrum;
  std::vector<double> series;
};

Synthesizer::Synthesizer(const SimulationPlan& plan) : plan_(plan) {
  plan_.validate();
  const SpectralModes& m = *plan_.modes;
  steps_ = plan_.n_steps();
  const std::size_t n = m.n_components();
  amplitude_.assign(m.n_lines() * n, 0.0);
  for (std::size_t k = 1; k < m.n_lines(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      check_calibration(m, k, i);
      amplitude_[k * n + i] = 2.0 * std::sqrt(std::max(m.eigenvalue(k, i), 0.0) * m.delta_omega());
    }

  const double exact = kTwoPi / (m.delta_omega() * plan_.dt_s);
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) <= 1e-9 * exact && rounded >= 2.0) {
    fft_length_ = static_cast<std::size_t>(rounded);
    fft_ = std::make_unique<Fft>(fft_length_);
  }
}

Synthesizer::~Synthesizer() = default;

Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> Synthesizer::coefficients(
    std::uint64_t realization, std::size_t n_modes) const {
  const SpectralModes& m = *plan_.modes;
  const std::size_t n = m.n_components();
  if (n_modes < 1 || n_modes > n) throw Error(Errc::argument, "mode count out of range");
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> b =
      Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>::Zero(
          static_cast<Eigen::Index>(m.n_lines()), static_cast<Eigen::Index>(n));
  const std::size_t stride = m.n_lines();
  cplx* out = b.data();
  const cplx* psi_all = m.eigenvector_data().data();
  for (std::size_t k = 1; k < m.n_lines(); ++k) {
    const cplx* psi = psi_all + k * n * n;
    for (std::size_t i = 0; i < n_modes; ++i) {
      const double a = amplitude_[k * n + i];
      if (a == 0.0) continue;
      const double theta = random_phase(plan_.seed, realization, static_cast<std::uint32_t>(i),
                                        static_cast<std::uint32_t>(k));
      const cplx c = std::polar(a, theta);
      for (std::size_t j = 0; j < n; ++j) out[j * stride + k] += c * psi[i * n + j];
    }
  }
  return b;
}

Eigen::MatrixXd Synthesizer::fluctuation(std::uint64_t realization) const {
  return fluctuation(realization, plan_.mode_count());
}

Eigen::MatrixXd Synthesizer::fluctuation(std::uint64_t realization, std::size_t n_modes) const {
  if (!fft_) return fluctuation_direct(realization, n_modes);
  const auto b = coefficients(realization, n_modes);
  const std::size_t lines = plan_.modes->n_lines();
  const std::size_t half = fft_length_ / 2;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(steps_), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    auto& spec = fft_->spectrum;
    std::fill(spec.begin(), spec.end(), cplx{});
    for (std::size_t k = 1; k < lines; ++k) {
      const cplx v = b(static_cast<Eigen::Index>(k), j);
      // Re(B e^{i pi n}) = Re(B) (-1)^n at the Nyquist bin of an even length.
      spec[k] = (fft_length_ % 2 == 0 && k == half) ? cplx(v.real(), 0.0) : 0.5 * v;
    }
    fft_->fft.inverse(spec, fft_->series);
    for (std::size_t s = 0; s < steps_; ++s) out(static_cast<Eigen::Index>(s), j) = fft_->series[s];
  }
  return out;
}

Eigen::MatrixXd Synthesizer::fluctuation_direct(std::uint64_t realization,
                                                std::size_t n_modes) const {
  const auto b = coefficients(realization, n_modes);
  const SpectralModes& m = *plan_.modes;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps_), b.cols());
  for (std::size_t k = 1; k < m.n_lines(); ++k) {
    const auto row = b.row(static_cast<Eigen::Index>(k));
    if (row.squaredNorm() == 0.0) continue;
    const double w = m.omega(k);
    for (std::size_t s = 0; s < steps_; ++s) {
      const cplx e = std::polar(1.0, w * static_cast<double>(s) * plan_.dt_s);
      out.row(static_cast<Eigen::Index>(s)) += (row * e).real();
    }
  }
  return out;
}

RecordSet simulate_realization(const SimulationPlan& plan, std::uint64_t realization) {
  const Synthesizer synth(plan);
  RecordSet rs;
  rs.components = synth.fluctuation(realization);
  if (plan.scale.size())
    for (Eigen::Index j = 0; j < rs.components.cols(); ++j) rs.components.col(j) *= plan.scale[j];
  rs.labels = plan.modes->labels();
  rs.sample_rate = 1.0 / plan.dt_s;
  rs.means = plan.means.size() ? plan.means : Eigen::VectorXd::Zero(rs.components.cols());
  return rs;
}

// EnsembleAccumulator ---------------------------------------------------------

EnsembleAccumulator::EnsembleAccumulator(std::size_t n_components, std::size_t n_lines,
                                         double delta_omega, std::vector<std::string> labels,
                                         std::optional<Target> target)
    : n_(n_components),
      spectra_sum_(n_components, n_lines, delta_omega, std::move(labels)),
      target_(std::move(target)) {
  const auto n = static_cast<Eigen::Index>(n_);
  x_sum_ = Eigen::VectorXd::Zero(n);
  xx_sum_ = Eigen::MatrixXd::Zero(n, n);
  if (target_) {
    if (target_->moments.n_components() != n_)
      throw Error(Errc::shape, "target moments do not match the component count");
    eps_sum_ = eps_sq_ = Eigen::VectorXd::Zero(n);
    phi_sum_ = phi_sq_ = eps_cross_ = Eigen::MatrixXd::Zero(n, n);
    constexpr double inf = std::numeric_limits<double>::infinity();
    eps_min_ = Eigen::VectorXd::Constant(n, inf);
    eps_max_ = Eigen::VectorXd::Constant(n, -inf);
    phi_min_ = Eigen::MatrixXd::Constant(n, n, inf);
    phi_max_ = Eigen::MatrixXd::Constant(n, n, -inf);
  }
}

void EnsembleAccumulator::add(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate) {
  add(x, periodogram(x, sample_rate, 0, spectra_sum_.n_lines()));
}

void EnsembleAccumulator::add(const Eigen::Ref<const Eigen::MatrixXd>& x,
                              const CpsdMatrix& pgram) {
  if (static_cast<std::size_t>(x.cols()) != n_ || pgram.n_components() != n_ ||
      pgram.n_lines() != spectra_sum_.n_lines() ||
      std::abs(pgram.delta_omega() - spectra_sum_.delta_omega()) >
          1e-9 * spectra_sum_.delta_omega())
    throw Error(Errc::shape, "realization does not match the accumulator grid");
  auto dst = spectra_sum_.values();
  const auto src = pgram.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  x_sum_ += x.colwise().sum().transpose();
  xx_sum_.noalias() += x.transpose() * x;
  sample_count_ += static_cast<double>(x.rows());
  if (target_) {
    const RecordErrors e = compare(moments(pgram, target_->cutoff_hz), target_->moments);
    eps_sum_ += e.epsilon;
    eps_sq_ += e.epsilon.cwiseAbs2();
    phi_sum_ += e.phi;
    phi_sq_ += e.phi.cwiseAbs2();
    eps_cross_.noalias() += e.epsilon * e.epsilon.transpose();
    eps_min_ = eps_min_.cwiseMin(e.epsilon);
    eps_max_ = eps_max_.cwiseMax(e.epsilon);
    phi_min_ = phi_min_.cwiseMin(e.phi);
    phi_max_ = phi_max_.cwiseMax(e.phi);
  }
  ++count_;
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
  if (other.n_ != n_ || other.spectra_sum_.n_lines() != spectra_sum_.n_lines() ||
      other.target_.has_value() != target_.has_value())
    throw Error(Errc::shape, "cannot merge accumulators of different shape");
  auto dst = spectra_sum_.values();
  const auto src = other.spectra_sum_.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  x_sum_ += other.x_sum_;
  xx_sum_ += other.xx_sum_;
  sample_count_ += other.sample_count_;
  count_ += other.count_;
  if (target_) {
    eps_sum_ += other.eps_sum_;
    eps_sq_ += other.eps_sq_;
    phi_sum_ += other.phi_sum_;
    phi_sq_ += other.phi_sq_;
    eps_cross_ += other.eps_cross_;
    eps_min_ = eps_min_.cwiseMin(other.eps_min_);
    eps_max_ = eps_max_.cwiseMax(other.eps_max_);
    phi_min_ = phi_min_.cwiseMin(other.phi_min_);
    phi_max_ = phi_max_.cwiseMax(other.phi_max_);
  }
}

CpsdMatrix EnsembleAccumulator::mean_spectra() const {
  if (count_ == 0) throw Error(Errc::argument, "accumulator is empty");
  CpsdMatrix out = spectra_sum_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (auto& v : out.values()) v *= inv;
  return out;
}

Eigen::VectorXd EnsembleAccumulator::sample_mean() const {
  if (sample_count_ == 0.0) throw Error(Errc::argument, "accumulator is empty");
  return x_sum_ / sample_count_;
}

Eigen::MatrixXd EnsembleAccumulator::sample_covariance() const {
  const Eigen::VectorXd mu = sample_mean();
  return xx_sum_ / sample_count_ - mu * mu.transpose();
}

namespace {

Eigen::MatrixXd sample_std(const Eigen::MatrixXd& sum, const Eigen::MatrixXd& sq, std::size_t n) {
  if (n < 2) return Eigen::MatrixXd::Constant(sum.rows(), sum.cols(), std::nan(""));
  const double dn = static_cast<double>(n);
  return ((sq - sum.cwiseAbs2() / dn) / (dn - 1.0)).cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

Eigen::VectorXd EnsembleAccumulator::mean_epsilon() const {
  if (!target_ || count_ == 0) throw Error(Errc::argument, "accumulator does not track errors");
  return eps_sum_ / static_cast<double>(count_);
}

Eigen::VectorXd EnsembleAccumulator::std_epsilon() const {
  if (!target_) throw Error(Errc::argument, "accumulator does not track errors");
  return sample_std(eps_sum_, eps_sq_, count_);
}

Eigen::MatrixXd EnsembleAccumulator::mean_phi() const {
  if (!target_ || count_ == 0) throw Error(Errc::argument, "accumulator does not track errors");
  return phi_sum_ / static_cast<double>(count_);
}

Eigen::MatrixXd EnsembleAccumulator::std_phi() const {
  if (!target_) throw Error(Errc::argument, "accumulator does not track errors");
  return sample_std(phi_sum_, phi_sq_, count_);
}

Eigen::MatrixXd EnsembleAccumulator::epsilon_correlation() const {
  if (!target_) throw Error(Errc::argument, "accumulator does not track errors");
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(n, n, std::nan(""));
  if (count_ < 2) return rho;
  const double dn = static_cast<double>(count_);
  const Eigen::MatrixXd cov = eps_cross_ - eps_sum_ * eps_sum_.transpose() / dn;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = std::sqrt(cov(i, i) * cov(j, j));
      if (d > 0.0) rho(i, j) = i == j ? 1.0 : std::clamp(cov(i, j) / d, -1.0, 1.0);
    }
  return rho;
}

ErrorReport ensemble_report(const EnsembleAccumulator& acc, ReportMetadata meta) {
  const auto& target = acc.target();
  if (!target || acc.count() == 0) throw Error(Errc::argument, "accumulator does not track errors");
  const RecordErrors e = compare(moments(acc.mean_spectra(), target->cutoff_hz), target->moments);
  ErrorReport rep;
  rep.meta = std::move(meta);
  rep.n_records = acc.count();
  rep.has_dispersion = acc.count() >= 2;
  rep.mu_eps = e.epsilon;
  rep.mu_phi = e.phi;
  rep.sigma_eps = acc.std_epsilon();
  rep.sigma_phi = acc.std_phi();
  rep.min_eps = acc.min_epsilon();
  rep.max_eps = acc.max_epsilon();
  rep.min_phi = acc.min_phi();
  rep.max_phi = acc.max_phi();
  rep.rho_eps = acc.epsilon_correlation();
  summarize(rep);
  return rep;
}

// simulate_batch --------------------------------------------------------------

namespace {

// Binary-counter pairwise summation: equal-level partial sums are merged as
// soon as they appear, so the merge tree depends only on the leaf sequence.
class PairwiseReducer {
 public:
  void push(EnsembleAccumulator acc) {
    stack_.emplace_back(0, std::move(acc));
    while (stack_.size() >= 2 && stack_[stack_.size() - 1].first == stack_[stack_.size() - 2].first) {
      auto right = std::move(stack_.back());
      stack_.pop_back();
      stack_.back().second.merge(right.second);
      ++stack_.back().first;
    }
  }

  EnsembleAccumulator finish() {
    EnsembleAccumulator acc = std::move(stack_.back().second);
    stack_.pop_back();
    while (!stack_.empty()) {
      EnsembleAccumulator left = std::move(stack_.back().second);
      stack_.pop_back();
      left.merge(acc);
      acc = std::move(left);
    }
    return acc;
  }

 private:
  std::vector<std::pair<int, EnsembleAccumulator>> stack_;
};

struct BlockResult {
  EnsembleAccumulator acc;
  std::vector<RecordSet> realizations;
};

}  // namespace

EnsembleAccumulator simulate_batch(const SimulationPlan& plan, const BatchOptions& options) {
  plan.validate();
  const SpectralModes& m = *plan.modes;
  const std::size_t steps = plan.n_steps();
  const double fs = 1.0 / plan.dt_s;
  const std::size_t grid_lines = steps / 2 + 1;
  const std::size_t lines = options.n_lines ? std::min(options.n_lines, grid_lines) : grid_lines;
  const double d_omega = kTwoPi * fs / static_cast<double>(steps);
  const std::size_t block = std::max<std::size_t>(1, options.block_size);
  const std::size_t n_blocks = (plan.n_realizations + block - 1) / block;

  auto run_block = [&](std::size_t b) {
    const Synthesizer synth(plan);
    detail::PeriodogramWorkspace ws(steps, m.n_components(), lines);
    CpsdMatrix pgram(m.n_components(), lines, d_omega, m.labels());
    BlockResult out{EnsembleAccumulator(m.n_components(), lines, d_omega, m.labels(), options.target),
                    {}};
    const std::size_t begin = b * block;
    const std::size_t end = std::min(plan.n_realizations, begin + block);
    for (std::size_t r = begin; r < end; ++r) {
      const std::uint64_t index = options.first_realization + r;
      const Eigen::MatrixXd x = synth.fluctuation(index);
      ws.compute(x, fs, pgram);
      out.acc.add(x, pgram);
      if (options.sink) {
        RecordSet rs;
        rs.components = x;
        if (plan.scale.size())
          for (Eigen::Index j = 0; j < x.cols(); ++j) rs.components.col(j) *= plan.scale[j];
        rs.labels = m.labels();
        rs.sample_rate = fs;
        rs.means = plan.means.size() ? plan.means : Eigen::VectorXd::Zero(x.cols());
        out.realizations.push_back(std::move(rs));
      }
    }
    return out;
  };

  PairwiseReducer reducer;
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  for (std::size_t wave = 0; wave < n_blocks; wave += threads) {
    const std::size_t wave_end = std::min(n_blocks, wave + threads);
    std::vector<BlockResult> results;
    if (threads == 1) {
      results.push_back(run_block(wave));
    } else {
      std::vector<std::future<BlockResult>> futures;
      for (std::size_t b = wave; b < wave_end; ++b)
        futures.push_back(std::async(std::launch::async, run_block, b));
      for (auto& f : futures) results.push_back(f.get());
    }
    for (std::size_t b = 0; b < results.size(); ++b) {
      if (options.sink) {
        const std::size_t begin = (wave + b) * block;
        for (std::size_t r = 0; r < results[b].realizations.size(); ++r)
          options.sink(options.first_realization + begin + r, results[b].realizations[r]);
      }
      reducer.push(std::move(results[b].acc));
    }
  }
  return reducer.finish();
}

}  // namespace podwind
