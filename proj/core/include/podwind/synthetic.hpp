#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "podwind/cpsd.hpp"
#include "podwind/key_value.hpp"
#include "podwind/pod.hpp"
#include "podwind/record_set.hpp"
#include "podwind/srm.hpp"

namespace podwind {

enum class PsdFamily { flat, low_pass, narrow_band };

std::string_view to_string(PsdFamily f) noexcept;
PsdFamily parse_psd_family(std::string_view text);

// One-sided spectral shape g(f) on [0, band_limit]:
//   flat         1
//   low_pass     (1 + f/corner)^(-5/3)
//   narrow_band  background (1 + f/corner)^(-5/3) + 1 / (1 + ((f - peak)/bandwidth)^2)
struct BlockSpectrum {
  PsdFamily family = PsdFamily::low_pass;
  double corner_hz = 2.0;
  double peak_hz = 8.0;
  double bandwidth_hz = 1.0;
  double background = 0.5;

  double shape(double f_hz) const noexcept;
};

// Synthetic stand-in for a floor-load dataset: three blocks (x force, y
// force, torsion) of `n_floors` components each. Between floors n and m the
// coherence is coupling(b, b') exp(-decay |n - m| f) with a phase lag
// exp(i lag (n - m) f). Every component integrates to `variance` over the
// band; the spectrum is zero above `band_limit_hz` and at DC.
struct SyntheticSpec {
  std::size_t n_floors = 4;
  std::array<BlockSpectrum, 3> blocks{
      BlockSpectrum{PsdFamily::low_pass, 2.0, 8.0, 1.0, 0.5},
      BlockSpectrum{PsdFamily::narrow_band, 2.0, 6.0, 1.0, 0.5},
      BlockSpectrum{PsdFamily::low_pass, 4.0, 8.0, 1.0, 0.5}};
  double coherence_decay_s = 0.0005;
  double phase_lag_s = 0.0;
  double xy_coupling = 0.0;
  double xz_coupling = 0.9;
  double yz_coupling = 0.0;
  double variance = 1.0;
  double band_limit_hz = 50.0;
  double sample_rate = 625.0;
  double duration_s = 900.0;
  std::size_t n_repetitions = 5;

  std::size_t n_components() const noexcept { return 3 * n_floors; }
  // Throws Error(configuration) on out-of-range fields.
  void validate() const;
  // 3 x 3 block coherence at zero separation.
  Eigen::Matrix3d coupling() const;

  static SyntheticSpec from(const KeyValues& kv);
  KeyValues to_key_values() const;
};

// Closed-form CPSD on omega_k = k * delta_omega, k < n_lines. Throws
// Error(construction) if any line has an eigenvalue below -1e-12 of its
// largest.
CpsdMatrix analytic_cpsd(const SyntheticSpec& spec, std::size_t n_lines, double delta_omega);

// Analytic CPSD on the grid of `segment_s`-second segments up to the band
// limit.
CpsdMatrix analytic_cpsd(const SyntheticSpec& spec, double segment_s);

// Draws repetitions of `spec.duration_s` seconds by spectral representation
// of the analytic model (all modes, period equal to the duration).
class SyntheticSource {
 public:
  SyntheticSource(const SyntheticSpec& spec, std::uint64_t seed);
  ~SyntheticSource();

  const SyntheticSpec& spec() const noexcept { return spec_; }
  const SimulationPlan& plan() const noexcept { return plan_; }
  // Repetition `index` as a RecordSet; not thread-safe.
  RecordSet record(std::uint64_t index) const;

 private:
  SyntheticSpec spec_;
  SimulationPlan plan_;
  std::unique_ptr<Synthesizer> synth_;
};

std::vector<RecordSet> sample_records(const SyntheticSpec& spec, std::uint64_t seed, std::size_t count);

}  // namespace podwind
