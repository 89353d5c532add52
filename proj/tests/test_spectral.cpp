#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "podwind/error_metrics.hpp"
#include "podwind/errors.hpp"
#include "podwind/spectral.hpp"
#include "support.hpp"

namespace podwind {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Direct O(n^2) DFT of windowed, mean-removed segments, averaged.
CpsdMatrix naive_welch(const Eigen::MatrixXd& x, double fs, std::size_t m, std::size_t q, bool hann) {
  const auto n = static_cast<std::size_t>(x.cols());
  const std::size_t segs = (static_cast<std::size_t>(x.rows()) - m) / q + 1;
  std::vector<double> w(m, 1.0);
  if (hann)
    for (std::size_t i = 0; i < m; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / static_cast<double>(m));
  double w2 = 0.0;
  for (double v : w) w2 += v * v;
  CpsdMatrix out(n, m / 2 + 1, kTwoPi * fs / static_cast<double>(m));
  for (std::size_t s = 0; s < segs; ++s) {
    std::vector<std::vector<cplx>> xf(n, std::vector<cplx>(m / 2 + 1));
    for (std::size_t c = 0; c < n; ++c) {
      double mean = 0.0;
      for (std::size_t t = 0; t < m; ++t) mean += x(static_cast<Eigen::Index>(s * q + t), static_cast<Eigen::Index>(c));
      mean /= static_cast<double>(m);
      for (std::size_t k = 0; k <= m / 2; ++k) {
        cplx acc = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
          const double v = (x(static_cast<Eigen::Index>(s * q + t), static_cast<Eigen::Index>(c)) - mean) * w[t];
          acc += v * std::polar(1.0, -kTwoPi * static_cast<double>(k * t % m) / static_cast<double>(m));
        }
        xf[c][k] = acc;
      }
    }
    for (std::size_t k = 0; k <= m / 2; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          out.at(k, i, j) += xf[i][k] * std::conj(xf[j][k]) / (static_cast<double>(segs) * w2 * fs * kTwoPi);
  }
  return out;
}

double max_abs_diff(const CpsdMatrix& a, const CpsdMatrix& b) {
  double d = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    scale = std::max(scale, std::abs(b.values()[i]));
  }
  return d / scale;
}

TEST(Welch, MatchesDirectDft) {
  auto g = testing::engine(1, 0);
  const RecordSet rs = testing::correlated_record(g, 300, 3, 20.0);
  for (bool hann : {false, true}) {
    WelchConfig cfg{64, 32, hann ? Window::hanning : Window::rectangular};
    const CpsdMatrix fast = welch_cpsd(rs, cfg);
    const CpsdMatrix slow = naive_welch(rs.components, 20.0, 64, 32, hann);
    ASSERT_EQ(fast.n_lines(), slow.n_lines());
    EXPECT_DOUBLE_EQ(fast.delta_omega(), slow.delta_omega());
    EXPECT_LT(max_abs_diff(fast, slow), 1e-12);
  }
}

TEST(Welch, OddLengthsMatchDirectDft) {
  auto g = testing::engine(1, 1);
  const RecordSet rs = testing::correlated_record(g, 131, 2, 7.0);
  const CpsdMatrix fast = welch_cpsd(rs, WelchConfig{45, 20, Window::hanning});
  EXPECT_LT(max_abs_diff(fast, naive_welch(rs.components, 7.0, 45, 20, true)), 1e-12);
}

TEST(Welch, SegmentCount) {
  WelchConfig cfg{100, 50};
  EXPECT_EQ(cfg.segment_count(99), 0u);
  EXPECT_EQ(cfg.segment_count(100), 1u);
  EXPECT_EQ(cfg.segment_count(149), 1u);
  EXPECT_EQ(cfg.segment_count(150), 2u);
  EXPECT_DOUBLE_EQ(cfg.overlap(), 0.5);
  const auto from = WelchConfig::from_seconds(625.0, 4.0, 0.5);
  EXPECT_EQ(from.segment_length, 2500u);
  EXPECT_EQ(from.shift, 1250u);
  // 32 s at 625 Hz with 4 s, 50% segments
  EXPECT_EQ(from.segment_count(20000), 15u);
}

TEST(Welch, RejectsBadSegmentation) {
  RecordSet rs;
  rs.components = Eigen::MatrixXd::Zero(50, 1);
  rs.labels = generic_labels(1);
  rs.sample_rate = 10.0;
  EXPECT_THROW(welch_cpsd(rs, WelchConfig{64, 32}), Error);
  EXPECT_THROW(welch_cpsd(rs, WelchConfig{16, 0}), Error);
  EXPECT_THROW(welch_cpsd(rs, WelchConfig{16, 17}), Error);
  EXPECT_THROW(WelchConfig::from_seconds(10.0, 1.0, 1.0), Error);
  EXPECT_THROW(WelchConfig::from_seconds(10.0, 1.05, 0.5), Error);
}

TEST(Window, PeriodicHann) {
  const auto w = window_samples(Window::hanning, 8);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[4], 1.0);
  EXPECT_DOUBLE_EQ(w[2], 0.5);
  double w2 = 0.0;
  for (double v : window_samples(Window::hanning, 1000)) w2 += v * v;
  EXPECT_NEAR(w2, 375.0, 1e-9);
}

TEST(Periodogram, SinusoidOnBin) {
  const double fs = 100.0, amp = 1.7;
  const std::size_t n = 400, bin = 37;
  Eigen::MatrixXd x(n, 1);
  for (std::size_t t = 0; t < n; ++t) x(static_cast<Eigen::Index>(t), 0) = amp * std::cos(kTwoPi * bin * t / double(n) + 0.3);
  const CpsdMatrix s = periodogram(x, fs);
  EXPECT_EQ(s.n_lines(), n / 2 + 1);
  EXPECT_NEAR(s.at(bin, 0, 0).real(), amp * amp * n / (4.0 * fs * kTwoPi), 1e-10);
  double off = 0.0;
  for (std::size_t k = 0; k < s.n_lines(); ++k)
    if (k != bin) off = std::max(off, std::abs(s.at(k, 0, 0)));
  EXPECT_LT(off, 1e-20);
  EXPECT_NEAR(moments(s, fs / 2).variances[0], amp * amp / 2, 1e-12);
}

// Raw periodogram moments equal the time-domain covariance exactly.
TEST(Periodogram, ParsevalProperty) {
  for (std::uint64_t c = 0; c < 40; ++c) {
    auto g = testing::engine(2, c);
    const std::size_t n = testing::uniform_size(g, 2, 7);
    const std::size_t len = 2 * testing::uniform_size(g, 16, 1500);
    const double fs = testing::uniform(g, 1.0, 1000.0);
    const RecordSet rs = testing::correlated_record(g, len, n, fs);
    const Eigen::MatrixXd cov = rs.components.transpose() * rs.components / static_cast<double>(len);
    const SpectralMoments m = moments(periodogram(rs.components, fs), fs / 2);
    EXPECT_LT((m.covariances - cov).norm() / cov.norm(), 1e-10) << "case " << c;
  }
}

TEST(Welch, WhiteNoiseVarianceWithinFivePercent) {
  auto g = testing::engine(3, 0);
  const double fs = 256.0;
  RecordSet rs;
  rs.components = testing::white_noise(g, 256 * 65, 3);
  rs.labels = generic_labels(3);
  rs.sample_rate = fs;
  separate_mean(rs);
  const WelchConfig cfg{256, 128, Window::hanning};
  ASSERT_GE(cfg.segment_count(rs.n_samples()), 64u);
  const SpectralMoments m = moments(welch_cpsd(rs, cfg), fs / 2);
  const Eigen::MatrixXd cov = rs.components.transpose() * rs.components / static_cast<double>(rs.n_samples());
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(m.variances[i] / cov(i, i), 1.0, 0.05);
  // the density of unit white noise is flat at 1 / (2 pi fs)
  const CpsdMatrix s = welch_cpsd(rs, cfg);
  double mean_level = 0.0;
  for (std::size_t k = 1; k + 1 < s.n_lines(); ++k) mean_level += s.at(k, 0, 0).real();
  mean_level /= static_cast<double>(s.n_lines() - 2);
  EXPECT_NEAR(mean_level * kTwoPi * fs, 1.0, 0.03);
}

TEST(Welch, LinesAreExactlyHermitian) {
  auto g = testing::engine(4, 0);
  const RecordSet rs = testing::correlated_record(g, 5000, 6, 50.0);
  const CpsdMatrix s = welch_cpsd(rs, WelchConfig{500, 250});
  EXPECT_EQ(hermitian_defect(s), 0.0);
  EXPECT_NO_THROW(check_invariants(s));
}

TEST(Target, AveragesSegmentPeriodograms) {
  auto g = testing::engine(5, 0);
  const RecordSet rs = testing::correlated_record(g, 1000, 2, 10.0);
  const auto segs = chop(rs, 20.0);
  ASSERT_EQ(segs.size(), 5u);
  const CpsdMatrix t = target_cpsd(segs);
  CpsdMatrix manual(2, 101, kTwoPi * 10.0 / 200.0);
  for (const auto& seg : segs) {
    const CpsdMatrix p = periodogram(seg.components, 10.0);
    for (std::size_t i = 0; i < p.values().size(); ++i) manual.values()[i] += p.values()[i] / 5.0;
  }
  EXPECT_LT(max_abs_diff(t, manual), 1e-13);
  EXPECT_THROW(target_cpsd(std::span<const RecordSet>(segs.data(), 1)), Error);
}

TEST(Truncate, KeepsLinesAtOrBelowCutoff) {
  CpsdMatrix s(1, 101, kTwoPi * 0.5);  // 0.5 Hz spacing
  EXPECT_EQ(truncate_to_cutoff(s, 10.0).n_lines(), 21u);
  EXPECT_EQ(truncate_to_cutoff(s, 10.2).n_lines(), 21u);
  EXPECT_EQ(truncate_to_cutoff(s, 1000.0).n_lines(), 101u);
  EXPECT_EQ(last_line_at_or_below(s, 0.49), 0u);
}

double steady_amplitude(const RecordSet& rs) {
  const auto n = static_cast<Eigen::Index>(rs.n_samples());
  const auto mid = rs.components.col(0).segment(n / 4, n / 2);
  return std::sqrt(2.0 * mid.squaredNorm() / static_cast<double>(mid.size()));
}

RecordSet tone(double f, double fs, std::size_t n) {
  RecordSet rs;
  rs.components.resize(static_cast<Eigen::Index>(n), 1);
  for (std::size_t t = 0; t < n; ++t) rs.components(static_cast<Eigen::Index>(t), 0) = std::sin(kTwoPi * f * t / fs);
  rs.labels = generic_labels(1);
  rs.sample_rate = fs;
  separate_mean(rs);
  return rs;
}

// Forward-backward filtering squares the magnitude: 1/2 at the cutoff.
TEST(Butterworth, ZeroPhaseGain) {
  const double fs = 625.0, fc = 50.0;
  for (int order : {1, 2, 3, 4, 5, 8}) {
    const FilterSpec f{order, fc};
    EXPECT_NEAR(steady_amplitude(lowpass(tone(fc, fs, 62500), f)), 0.5, 2e-3) << order;
    EXPECT_NEAR(steady_amplitude(lowpass(tone(2.0, fs, 62500), f)), 1.0, 2e-3) << order;
    // |H|^2 of a Butterworth prototype at the prewarped frequency ratio
    const double ratio = std::tan(std::numbers::pi * 150.0 / fs) / std::tan(std::numbers::pi * fc / fs);
    EXPECT_NEAR(steady_amplitude(lowpass(tone(150.0, fs, 62500), f)), 1.0 / (1.0 + std::pow(ratio, 2 * order)), 2e-3)
        << order;
  }
}

TEST(Butterworth, NoPhaseShift) {
  const RecordSet in = tone(20.0, 625.0, 20000);
  const RecordSet out = lowpass(in, FilterSpec{4, 50.0});
  const auto a = in.components.col(0).segment(5000, 10000);
  const auto b = out.components.col(0).segment(5000, 10000);
  const double cos_angle = a.dot(b) / (a.norm() * b.norm());
  EXPECT_GT(cos_angle, 1.0 - 1e-6);
}

TEST(Butterworth, RejectsCutoffAtNyquist) {
  const RecordSet in = tone(1.0, 100.0, 500);
  EXPECT_THROW(lowpass(in, FilterSpec{2, 50.0}), Error);
  EXPECT_THROW(lowpass(in, FilterSpec{2, 0.0}), Error);
  EXPECT_THROW(lowpass(in, FilterSpec{0, 10.0}), Error);
  try {
    lowpass(in, FilterSpec{2, 60.0});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::filter_spec);
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

}  // namespace
}  // namespace podwind
