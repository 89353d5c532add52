#include "podwind/synthetic.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "podwind/errors.hpp"

namespace podwind {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::array<const char*, 3> kBlockNames{"x", "y", "z"};

// Composite Simpson integral of the shape over [0, band].
double shape_integral(const BlockSpectrum& b, double band) {
  const int n = 20000;
  const double h = band / n;
  double sum = b.shape(0.0) + b.shape(band);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * b.shape(i * h);
  return sum * h / 3.0;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::configuration, "synthetic spec: " + what);
}

}  // namespace

std::string_view to_string(PsdFamily f) noexcept {
  switch (f) {
    case PsdFamily::flat: return "flat";
    case PsdFamily::low_pass: return "low_pass";
    case PsdFamily::narrow_band: return "narrow_band";
  }
  return "?";
}

PsdFamily parse_psd_family(std::string_view text) {
  if (text == "flat") return PsdFamily::flat;
  if (text == "low_pass") return PsdFamily::low_pass;
  if (text == "narrow_band") return PsdFamily::narrow_band;
  throw Error(Errc::configuration, "unknown PSD family '" + std::string(text) + "'");
}

double BlockSpectrum::shape(double f) const noexcept {
  switch (family) {
    case PsdFamily::flat: return 1.0;
    case PsdFamily::low_pass: return std::pow(1.0 + f / corner_hz, -5.0 / 3.0);
    case PsdFamily::narrow_band: {
      const double u = (f - peak_hz) / bandwidth_hz;
      return background * std::pow(1.0 + f / corner_hz, -5.0 / 3.0) + 1.0 / (1.0 + u * u);
    }
  }
  return 0.0;
}

void SyntheticSpec::validate() const {
  require(n_floors >= 1, "n_floors must be at least 1");
  for (const auto& b : blocks) {
    require(b.corner_hz > 0.0, "corner frequency must be positive");
    require(b.bandwidth_hz > 0.0, "bandwidth must be positive");
    require(b.peak_hz >= 0.0, "peak frequency must be non-negative");
    require(b.background >= 0.0, "background level must be non-negative");
  }
  require(coherence_decay_s >= 0.0, "coherence decay must be non-negative");
  require(std::isfinite(phase_lag_s), "phase lag must be finite");
  for (double c : {xy_coupling, xz_coupling, yz_coupling})
    require(c >= -1.0 && c <= 1.0, "block couplings must lie in [-1, 1]");
  require(variance > 0.0, "variance must be positive");
  require(sample_rate > 0.0, "sample rate must be positive");
  require(band_limit_hz > 0.0 && band_limit_hz < 0.5 * sample_rate,
          "band limit must lie in (0, Nyquist)");
  require(duration_s > 0.0, "duration must be positive");
  samples_for(duration_s, sample_rate);
  require(n_repetitions >= 1, "need at least one repetition");
}

Eigen::Matrix3d SyntheticSpec::coupling() const {
  Eigen::Matrix3d g;
  g << 1.0, xy_coupling, xz_coupling,  //
      xy_coupling, 1.0, yz_coupling,   //
      xz_coupling, yz_coupling, 1.0;
  return g;
}

SyntheticSpec SyntheticSpec::from(const KeyValues& kv) {
  SyntheticSpec s;
  s.n_floors = kv.get_size("n_floors", s.n_floors);
  for (std::size_t b = 0; b < 3; ++b) {
    const std::string p = std::string(kBlockNames[b]) + ".";
    BlockSpectrum& bs = s.blocks[b];
    if (kv.has(p + "family")) bs.family = parse_psd_family(kv.at(p + "family"));
    bs.corner_hz = kv.get_double(p + "corner_hz", bs.corner_hz);
    bs.peak_hz = kv.get_double(p + "peak_hz", bs.peak_hz);
    bs.bandwidth_hz = kv.get_double(p + "bandwidth_hz", bs.bandwidth_hz);
    bs.background = kv.get_double(p + "background", bs.background);
  }
  s.coherence_decay_s = kv.get_double("coherence_decay_s", s.coherence_decay_s);
  s.phase_lag_s = kv.get_double("phase_lag_s", s.phase_lag_s);
  s.xy_coupling = kv.get_double("xy_coupling", s.xy_coupling);
  s.xz_coupling = kv.get_double("xz_coupling", s.xz_coupling);
  s.yz_coupling = kv.get_double("yz_coupling", s.yz_coupling);
  s.variance = kv.get_double("variance", s.variance);
  s.band_limit_hz = kv.get_double("band_limit_hz", s.band_limit_hz);
  s.sample_rate = kv.get_double("sample_rate_hz", s.sample_rate);
  s.duration_s = kv.get_double("duration_s", s.duration_s);
  s.n_repetitions = kv.get_size("n_repetitions", s.n_repetitions);
  s.validate();
  return s;
}

KeyValues SyntheticSpec::to_key_values() const {
  KeyValues kv;
  kv.set("n_floors", n_floors);
  for (std::size_t b = 0; b < 3; ++b) {
    const std::string p = std::string(kBlockNames[b]) + ".";
    kv.set(p + "family", std::string(to_string(blocks[b].family)));
    kv.set(p + "corner_hz", blocks[b].corner_hz);
    kv.set(p + "peak_hz", blocks[b].peak_hz);
    kv.set(p + "bandwidth_hz", blocks[b].bandwidth_hz);
    kv.set(p + "background", blocks[b].background);
  }
  kv.set("coherence_decay_s", coherence_decay_s);
  kv.set("phase_lag_s", phase_lag_s);
  kv.set("xy_coupling", xy_coupling);
  kv.set("xz_coupling", xz_coupling);
  kv.set("yz_coupling", yz_coupling);
  kv.set("variance", variance);
  kv.set("band_limit_hz", band_limit_hz);
  kv.set("sample_rate_hz", sample_rate);
  kv.set("duration_s", duration_s);
  kv.set("n_repetitions", n_repetitions);
  return kv;
}

CpsdMatrix analytic_cpsd(const SyntheticSpec& spec, std::size_t n_lines, double delta_omega) {
  spec.validate();
  if (n_lines < 1 || !(delta_omega > 0.0))
    throw Error(Errc::configuration, "analytic CPSD needs a non-empty positive grid");
  const std::size_t nf = spec.n_floors;
  const std::size_t n = spec.n_components();

  const Eigen::Matrix3d g = spec.coupling();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> gs(g, Eigen::EigenvaluesOnly);
  if (gs.eigenvalues().minCoeff() < -1e-12)
    throw Error(Errc::construction, "block coupling matrix is indefinite");

  // Two-sided level per rad/s so that the band integral equals the variance.
  std::array<double, 3> level{};
  for (std::size_t b = 0; b < 3; ++b)
    level[b] = spec.variance / (2.0 * kTwoPi * shape_integral(spec.blocks[b], spec.band_limit_hz));

  CpsdMatrix s(n, n_lines, delta_omega, force_labels(nf));
  std::vector<double> amp(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  for (std::size_t k = 1; k < n_lines; ++k) {
    const double f = s.omega(k) / kTwoPi;
    if (f > spec.band_limit_hz * (1.0 + 1e-12)) break;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = i / nf;
      amp[i] = std::sqrt(level[b] * spec.blocks[b].shape(f));
    }
    auto line = s.line(k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double sep = static_cast<double>(i % nf) - static_cast<double>(j % nf);
        const double coh = g(i / nf, j / nf) * std::exp(-spec.coherence_decay_s * std::abs(sep) * f);
        line(i, j) = amp[i] * amp[j] * coh * std::polar(1.0, spec.phase_lag_s * sep * f);
      }
    es.compute(Eigen::MatrixXcd(line), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-12 * std::max(ev.maxCoeff(), 0.0))
      throw Error(Errc::construction, "analytic CPSD is indefinite at line " + std::to_string(k));
  }
  return s;
}

CpsdMatrix analytic_cpsd(const SyntheticSpec& spec, double segment_s) {
  if (!(segment_s > 0.0)) throw Error(Errc::configuration, "segment length must be positive");
  const double dw = kTwoPi / segment_s;
  const auto lines = static_cast<std::size_t>(std::floor(spec.band_limit_hz * segment_s + 1e-9)) + 1;
  return analytic_cpsd(spec, lines, dw);
}

SyntheticSource::SyntheticSource(const SyntheticSpec& spec, std::uint64_t seed) : spec_(spec) {
  auto modes = std::make_shared<SpectralModes>(decompose(analytic_cpsd(spec, spec.duration_s)));
  plan_.modes = std::move(modes);
  plan_.dt_s = 1.0 / spec.sample_rate;
  plan_.duration_s = static_cast<double>(samples_for(spec.duration_s, spec.sample_rate)) * plan_.dt_s;
  plan_.seed = seed;
  plan_.n_realizations = spec.n_repetitions;
  synth_ = std::make_unique<Synthesizer>(plan_);
}

SyntheticSource::~SyntheticSource() = default;

RecordSet SyntheticSource::record(std::uint64_t index) const {
  RecordSet rs;
  rs.components = synth_->fluctuation(index);
  rs.labels = force_labels(spec_.n_floors);
  rs.sample_rate = spec_.sample_rate;
  separate_mean(rs);
  return rs;
}

std::vector<RecordSet> sample_records(const SyntheticSpec& spec, std::uint64_t seed, std::size_t count) {
  SyntheticSource src(spec, seed);
  std::vector<RecordSet> out;
  out.reserve(count);
  for (std::size_t l = 0; l < count; ++l) out.push_back(src.record(l));
  return out;
}

}  // namespace podwind
