#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "podwind/cpsd.hpp"
#include "podwind/record_set.hpp"

namespace podwind {

enum class Window { rectangular, hanning };
enum class Detrend { none, mean };

// Welch segmentation: segments of M samples shifted by Q samples, each
// optionally zero-padded to `nfft` samples.
struct WelchConfig {
  std::size_t segment_length = 0;  // M
  std::size_t shift = 0;           // Q, 1 <= Q <= M
  Window window = Window::hanning;
  std::size_t nfft = 0;            // 0 means no padding
  Detrend detrend = Detrend::mean;

  double overlap() const noexcept;
  std::size_t fft_length() const noexcept { return nfft ? nfft : segment_length; }
  // K = floor((n - M) / Q) + 1, or 0 when n < M.
  std::size_t segment_count(std::size_t n_samples) const noexcept;
  void validate(std::size_t n_samples) const;

  // Settings for a short test record: `segment_s` blocks with the given
  // fractional overlap.
  static WelchConfig from_seconds(double sample_rate, double segment_s, double overlap,
                                  Window window = Window::hanning);
};

struct FilterSpec {
  int order = 2;
  double cutoff_hz = 50.0;
};

std::vector<double> window_samples(Window w, std::size_t length);

// Zero-phase Butterworth low-pass (forward-backward, so the effective
// magnitude response is |H|^2). Output has the same length as the input.
RecordSet lowpass(const RecordSet& rs, const FilterSpec& f);

// Averaged cross-periodogram: S_ij = (1/K) sum_k X_i conj(X_j) / (W fs 2 pi)
// with W = sum w^2 over the unpadded window. Two-sided, per rad/s.
CpsdMatrix welch_cpsd(const RecordSet& rs, const WelchConfig& cfg);

// Raw rectangular periodogram of the whole series (columns of `x`), keeping
// the first `max_lines` lines (0 keeps all).
CpsdMatrix periodogram(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate,
                       std::size_t nfft = 0, std::size_t max_lines = 0,
                       Detrend detrend = Detrend::mean);

// Ensemble mean of per-segment raw periodograms (rectangular window, no
// overlap). `nfft` zero-pads each segment to reach a finer grid.
CpsdMatrix target_cpsd(std::span<const RecordSet> segments, std::size_t nfft = 0);

// Drops frequency lines above `cutoff_hz`; the spacing is unchanged.
CpsdMatrix truncate_to_cutoff(const CpsdMatrix& s, double cutoff_hz);

}  // namespace podwind
