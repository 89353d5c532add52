#include "podwind/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "spectral_detail.hpp"
#include "podwind/errors.hpp"

namespace podwind {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Adds sum_k X_i conj(X_j) * weight for one block of samples into `acc`.
// `scratch` holds the per-component spectra, [lines x N].
void accumulate_block(const Eigen::Ref<const Eigen::MatrixXd>& block,
                      std::span<const double> window, Detrend detrend, detail::RealFft& fft,
                      Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>& scratch,
                      CpsdMatrix& acc, double weight) {
  const auto n = block.cols();
  const std::size_t lines = acc.n_lines();
  std::vector<double> buf(static_cast<std::size_t>(block.rows()));
  std::vector<cplx> spec(fft.bins());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto col = block.col(j);
    const double mean = detrend == Detrend::mean ? col.mean() : 0.0;
    for (Eigen::Index m = 0; m < block.rows(); ++m)
      buf[static_cast<std::size_t>(m)] =
          (col[m] - mean) * (window.empty() ? 1.0 : window[static_cast<std::size_t>(m)]);
    fft.forward(buf, spec);
    for (std::size_t k = 0; k < lines; ++k) scratch(static_cast<Eigen::Index>(k), j) = spec[k];
  }
  // Upper triangle computed once and mirrored, so every line stays exactly
  // Hermitian.
  const std::size_t nc = static_cast<std::size_t>(n);
  const cplx* xs = scratch.data();
  const std::size_t stride = static_cast<std::size_t>(scratch.rows());
  for (std::size_t k = 0; k < lines; ++k) {
    cplx* dst = &acc.at(k, 0, 0);
    for (std::size_t i = 0; i < nc; ++i) {
      const cplx xi = weight * xs[i * stride + k];
      dst[i * nc + i] += weight * std::norm(xs[i * stride + k]);
      for (std::size_t j = i + 1; j < nc; ++j) {
        const cplx v = xi * std::conj(xs[j * stride + k]);
        dst[i * nc + j] += v;
        dst[j * nc + i] += std::conj(v);
      }
    }
  }
}

}  // namespace

namespace detail {

PeriodogramWorkspace::PeriodogramWorkspace(std::size_t n_samples, std::size_t n_components,
                                           std::size_t n_lines)
    : n_samples_(n_samples),
      fft_(std::make_unique<RealFft>(n_samples)),
      scratch_(static_cast<Eigen::Index>(n_lines), static_cast<Eigen::Index>(n_components)) {}

PeriodogramWorkspace::~PeriodogramWorkspace() = default;

void PeriodogramWorkspace::compute(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate,
                                   CpsdMatrix& out) {
  if (static_cast<std::size_t>(x.rows()) != n_samples_ ||
      static_cast<Eigen::Index>(out.n_lines()) != scratch_.rows() ||
      static_cast<Eigen::Index>(out.n_components()) != x.cols())
    throw Error(Errc::shape, "periodogram workspace shape mismatch");
  std::fill(out.values().begin(), out.values().end(), cplx{});
  accumulate_block(x, {}, Detrend::mean, *fft_, scratch_, out,
                   1.0 / (static_cast<double>(n_samples_) * sample_rate * kTwoPi));
}

}  // namespace detail

double WelchConfig::overlap() const noexcept {
  return segment_length ? 1.0 - static_cast<double>(shift) / static_cast<double>(segment_length)
                        : 0.0;
}

std::size_t WelchConfig::segment_count(std::size_t n_samples) const noexcept {
  if (segment_length == 0 || shift == 0 || n_samples < segment_length) return 0;
  return (n_samples - segment_length) / shift + 1;
}

void WelchConfig::validate(std::size_t n_samples) const {
  if (segment_length == 0) throw Error(Errc::configuration, "Welch segment length must be positive");
  if (shift < 1 || shift > segment_length)
    throw Error(Errc::configuration, "Welch shift must satisfy 1 <= Q <= M");
  if (nfft != 0 && nfft < segment_length)
    throw Error(Errc::configuration, "zero-padded length must not be shorter than the segment");
  if (segment_length > n_samples)
    throw Error(Errc::configuration, "Welch segment of " + std::to_string(segment_length) +
                                         " samples is longer than the " +
                                         std::to_string(n_samples) + "-sample signal");
}

WelchConfig WelchConfig::from_seconds(double sample_rate, double segment_s, double overlap,
                                      Window window) {
  if (!(overlap >= 0.0) || !(overlap < 1.0))
    throw Error(Errc::configuration, "overlap must lie in [0, 1)");
  WelchConfig cfg;
  cfg.segment_length = samples_for(segment_s, sample_rate);
  const double shift = std::round(static_cast<double>(cfg.segment_length) * (1.0 - overlap));
  cfg.shift = std::max<std::size_t>(1, static_cast<std::size_t>(shift));
  cfg.window = window;
  return cfg;
}

std::vector<double> window_samples(Window w, std::size_t length) {
  std::vector<double> out(length, 1.0);
  if (w == Window::hanning)
    for (std::size_t m = 0; m < length; ++m)
      out[m] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(m) / static_cast<double>(length)));
  return out;
}

CpsdMatrix welch_cpsd(const RecordSet& rs, const WelchConfig& cfg) {
  rs.validate();
  cfg.validate(rs.n_samples());
  const std::size_t nfft = cfg.fft_length();
  const std::size_t segments = cfg.segment_count(rs.n_samples());
  const std::vector<double> window = window_samples(cfg.window, cfg.segment_length);
  double w2 = 0.0;
  for (double v : window) w2 += v * v;
  if (!(w2 > 0.0)) throw Error(Errc::configuration, "window has zero energy");

  CpsdMatrix out(rs.n_components(), nfft / 2 + 1, kTwoPi * rs.sample_rate / nfft, rs.labels);
  detail::RealFft fft(nfft);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> scratch(
      static_cast<Eigen::Index>(out.n_lines()), static_cast<Eigen::Index>(rs.n_components()));
  const double weight = 1.0 / (static_cast<double>(segments) * w2 * rs.sample_rate * kTwoPi);
  for (std::size_t s = 0; s < segments; ++s) {
    const auto block = rs.components.middleRows(static_cast<Eigen::Index>(s * cfg.shift),
                                                static_cast<Eigen::Index>(cfg.segment_length));
    accumulate_block(block, window, cfg.detrend, fft, scratch, out, weight);
  }
  return out;
}

CpsdMatrix periodogram(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate,
                       std::size_t nfft, std::size_t max_lines, Detrend detrend) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(Errc::shape, "empty series");
  if (!(sample_rate > 0.0)) throw Error(Errc::configuration, "sample rate must be positive");
  const auto m = static_cast<std::size_t>(x.rows());
  if (nfft == 0) nfft = m;
  if (nfft < m) throw Error(Errc::configuration, "zero-padded length shorter than the series");
  std::size_t lines = nfft / 2 + 1;
  if (max_lines) lines = std::min(lines, max_lines);
  CpsdMatrix out(static_cast<std::size_t>(x.cols()), lines, kTwoPi * sample_rate / nfft);
  detail::RealFft fft(nfft);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> scratch(static_cast<Eigen::Index>(lines),
                                                              x.cols());
  accumulate_block(x, {}, detrend, fft, scratch, out,
                   1.0 / (static_cast<double>(m) * sample_rate * kTwoPi));
  return out;
}

CpsdMatrix target_cpsd(std::span<const RecordSet> segments, std::size_t nfft) {
  if (segments.size() < 2)
    throw Error(Errc::argument, "target spectra need at least two segments");
  const RecordSet& first = segments.front();
  first.validate();
  const std::size_t m = first.n_samples();
  if (nfft == 0) nfft = m;
  if (nfft < m) throw Error(Errc::configuration, "zero-padded length shorter than the segment");

  CpsdMatrix out(first.n_components(), nfft / 2 + 1, kTwoPi * first.sample_rate / nfft,
                 first.labels);
  detail::RealFft fft(nfft);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> scratch(
      static_cast<Eigen::Index>(out.n_lines()), static_cast<Eigen::Index>(first.n_components()));
  const double weight = 1.0 / (static_cast<double>(segments.size()) * static_cast<double>(m) *
                               first.sample_rate * kTwoPi);
  for (const RecordSet& seg : segments) {
    if (seg.n_samples() != m || seg.n_components() != first.n_components())
      throw Error(Errc::shape, "target segments must share length and component count");
    if (seg.sample_rate != first.sample_rate)
      throw Error(Errc::shape, "target segments must share the sample rate");
    accumulate_block(seg.components, {}, Detrend::mean, fft, scratch, out, weight);
  }
  return out;
}

CpsdMatrix truncate_to_cutoff(const CpsdMatrix& s, double cutoff_hz) {
  if (cutoff_hz < 0.0) throw Error(Errc::empty_spectrum, "cutoff lies below the first line");
  const std::size_t last = last_line_at_or_below(s, cutoff_hz);
  CpsdMatrix out(s.n_components(), last + 1, s.delta_omega(), s.labels());
  const std::size_t per_line = s.n_components() * s.n_components();
  std::copy_n(s.values().begin(), (last + 1) * per_line, out.values().begin());
  return out;
}

// Butterworth ----------------------------------------------------------------

namespace {

// Transposed direct-form II section; a0 is normalised to 1.
struct Section {
  double b0, b1, b2, a1, a2;
  double zi1, zi2;  // steady-state state for unit input
};

std::vector<Section> butterworth_sections(int order, double cutoff_hz, double fs) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / fs);
  const double k2 = k * k;
  std::vector<Section> out;
  for (int s = 0; s < order / 2; ++s) {
    const double q =
        1.0 / (2.0 * std::sin(std::numbers::pi * (2.0 * s + 1.0) / (2.0 * order)));
    const double norm = 1.0 / (1.0 + k / q + k2);
    Section sec{};
    sec.b0 = k2 * norm;
    sec.b1 = 2.0 * sec.b0;
    sec.b2 = sec.b0;
    sec.a1 = 2.0 * (k2 - 1.0) * norm;
    sec.a2 = (1.0 - k / q + k2) * norm;
    out.push_back(sec);
  }
  if (order % 2) {
    Section sec{};
    sec.b0 = k / (1.0 + k);
    sec.b1 = sec.b0;
    sec.b2 = 0.0;
    sec.a1 = (k - 1.0) / (k + 1.0);
    sec.a2 = 0.0;
    out.push_back(sec);
  }
  for (Section& sec : out) {
    const double gain = (sec.b0 + sec.b1 + sec.b2) / (1.0 + sec.a1 + sec.a2);
    sec.zi2 = sec.b2 - sec.a2 * gain;
    sec.zi1 = gain - sec.b0;
  }
  return out;
}

void filter_in_place(std::vector<double>& x, const std::vector<Section>& sections) {
  for (const Section& s : sections) {
    double z1 = s.zi1 * x.front();
    double z2 = s.zi2 * x.front();
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

RecordSet lowpass(const RecordSet& rs, const FilterSpec& f) {
  rs.validate();
  if (f.order < 1) throw Error(Errc::filter_spec, "filter order must be positive");
  if (!(f.cutoff_hz > 0.0) || !(f.cutoff_hz < rs.sample_rate / 2.0))
    throw Error(Errc::filter_spec, "cutoff " + std::to_string(f.cutoff_hz) +
                                       " Hz must lie strictly between 0 and Nyquist (" +
                                       std::to_string(rs.sample_rate / 2.0) + " Hz)");
  const auto sections = butterworth_sections(f.order, f.cutoff_hz, rs.sample_rate);
  const std::size_t n = rs.n_samples();
  // Three time constants of the slowest pole pair, in samples.
  const double tau = std::sqrt(2.0) * rs.sample_rate / (2.0 * std::numbers::pi * f.cutoff_hz);
  std::size_t pad = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(3.0 * tau * f.order / 2.0)),
                                          static_cast<std::size_t>(3 * (f.order + 1)));
  pad = n > 1 ? std::min(pad, n - 1) : 0;

  RecordSet out = rs;
  std::vector<double> buf(n + 2 * pad);
  for (Eigen::Index j = 0; j < rs.components.cols(); ++j) {
    const auto x = rs.components.col(j);
    for (std::size_t i = 0; i < pad; ++i) {
      buf[i] = 2.0 * x[0] - x[static_cast<Eigen::Index>(pad - i)];
      buf[pad + n + i] = 2.0 * x[static_cast<Eigen::Index>(n - 1)] -
                         x[static_cast<Eigen::Index>(n - 2 - i)];
    }
    for (std::size_t i = 0; i < n; ++i) buf[pad + i] = x[static_cast<Eigen::Index>(i)];
    filter_in_place(buf, sections);
    std::reverse(buf.begin(), buf.end());
    filter_in_place(buf, sections);
    std::reverse(buf.begin(), buf.end());
    for (std::size_t i = 0; i < n; ++i) out.components(static_cast<Eigen::Index>(i), j) = buf[pad + i];
  }
  return out;
}

}  // namespace podwind
