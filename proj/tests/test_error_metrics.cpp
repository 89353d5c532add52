#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "podwind/error_metrics.hpp"
#include "podwind/errors.hpp"
#include "support.hpp"

namespace podwind {
namespace {

// Scalar trapezoid over the symmetric grid -K..K, written out term by term.
double oracle_cospectrum_integral(const CpsdMatrix& s, std::size_t i, std::size_t j, std::size_t last) {
  double sum = 0.0;
  for (long k = -static_cast<long>(last); k <= static_cast<long>(last); ++k) {
    const std::size_t a = static_cast<std::size_t>(std::labs(k));
    const cplx v = k >= 0 ? s.at(a, i, j) : std::conj(s.at(a, i, j));
    const double w = (a == last) ? 0.5 : 1.0;
    sum += w * v.real();
  }
  return sum * s.delta_omega();
}

TEST(Moments, MatchScalarTrapezoid) {
  for (std::uint64_t c = 0; c < 20; ++c) {
    auto g = testing::engine(20, c);
    const std::size_t n = testing::uniform_size(g, 1, 8);
    const std::size_t lines = testing::uniform_size(g, 3, 200);
    const double dw = testing::uniform(g, 0.01, 2.0);
    const CpsdMatrix s = testing::random_cpsd(g, n, lines, dw);
    const double cutoff = testing::uniform(g, dw / (2 * std::numbers::pi) * 1.01, s.max_omega() / (2 * std::numbers::pi));
    const std::size_t last = last_line_at_or_below(s, cutoff);
    const SpectralMoments m = moments(s, cutoff);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double o = oracle_cospectrum_integral(s, i, j, last);
        EXPECT_NEAR(m.covariances(Eigen::Index(i), Eigen::Index(j)), o, 1e-12 * std::abs(o) + 1e-300);
      }
    EXPECT_EQ(m.covariances, m.covariances.transpose());
  }
}

TEST(Moments, FlatSpectrumIntegratesExactly) {
  // S = 1 on lines 0..10 with spacing 0.5: two-sided integral over [-5, 5] = 10
  CpsdMatrix s(1, 21, 0.5);
  for (std::size_t k = 0; k < 21; ++k) s.at(k, 0, 0) = 1.0;
  const double fc = 5.0 / (2 * std::numbers::pi);
  EXPECT_NEAR(moments(s, fc).variances[0], 10.0, 1e-13);
}

TEST(Moments, RejectsEmptyBand) {
  CpsdMatrix s(1, 10, 1.0);
  EXPECT_THROW(moments(s, 0.1), Error);
  EXPECT_THROW(moments(CpsdMatrix(1, 1, 1.0), 10.0), Error);
}

SpectralMoments from_covariance(const Eigen::MatrixXd& c) {
  SpectralMoments m;
  m.covariances = c;
  m.variances = c.diagonal();
  return m;
}

TEST(Errors, VarianceAndCorrelationDefinitions) {
  Eigen::MatrixXd t(2, 2), x(2, 2);
  t << 4.0, 1.0, 1.0, 1.0;  // rho = 0.5
  x << 5.0, 0.0, 0.0, 0.8;  // rho = 0
  const RecordErrors e = compare(from_covariance(x), from_covariance(t));
  EXPECT_DOUBLE_EQ(e.epsilon[0], 25.0);
  EXPECT_DOUBLE_EQ(e.epsilon[1], -20.0);
  EXPECT_DOUBLE_EQ(e.phi(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(e.phi(1, 0), 0.5);
  EXPECT_EQ(e.phi(0, 0), 0.0);
}

TEST(Errors, DegenerateTarget) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(2, 2);
  t(1, 1) = 0.0;
  try {
    variance_error(from_covariance(Eigen::MatrixXd::Identity(2, 2)), from_covariance(t));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_target);
    EXPECT_EQ(e.kind(), ErrorKind::data_quality);
  }
}

TEST(Aggregate, MatchesTwoPassStatistics) {
  auto g = testing::engine(21, 0);
  const std::size_t r = 37, n = 5;
  std::vector<RecordErrors> recs(r);
  for (auto& rec : recs) {
    rec.epsilon = testing::white_noise(g, n, 1).col(0) * 3.0;
    Eigen::MatrixXd p = testing::white_noise(g, n, n) * 0.01;
    rec.phi = p + p.transpose();
    rec.phi.diagonal().setZero();
  }
  const ErrorReport rep = aggregate(recs, {generic_labels(n)});
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (const auto& rec : recs) mean += rec.epsilon[Eigen::Index(i)];
    mean /= r;
    double ss = 0.0, lo = 1e300, hi = -1e300;
    for (const auto& rec : recs) {
      const double d = rec.epsilon[Eigen::Index(i)] - mean;
      ss += d * d;
      lo = std::min(lo, rec.epsilon[Eigen::Index(i)]);
      hi = std::max(hi, rec.epsilon[Eigen::Index(i)]);
    }
    EXPECT_NEAR(rep.mu_eps[Eigen::Index(i)], mean, 1e-13);
    EXPECT_NEAR(rep.sigma_eps[Eigen::Index(i)], std::sqrt(ss / (r - 1)), 1e-13);
    EXPECT_EQ(rep.min_eps[Eigen::Index(i)], lo);
    EXPECT_EQ(rep.max_eps[Eigen::Index(i)], hi);
    EXPECT_EQ(rep.rho_eps(Eigen::Index(i), Eigen::Index(i)), 1.0);
  }
  double pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs += rep.mu_phi(Eigen::Index(i), Eigen::Index(j));
  EXPECT_NEAR(rep.e_mu_phi, pairs / (n * (n - 1) / 2), 1e-15);
  EXPECT_NEAR(rep.e_mu_eps, rep.mu_eps.mean(), 1e-15);
  EXPECT_EQ(rep.n_records, r);
  EXPECT_TRUE(rep.has_dispersion);
}

TEST(Aggregate, SingleRecordHasNoDispersion) {
  RecordErrors one{Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Zero(3, 3)};
  const ErrorReport rep = aggregate(std::span<const RecordErrors>(&one, 1), {});
  EXPECT_FALSE(rep.has_dispersion);
  EXPECT_TRUE(std::isnan(rep.e_sigma_eps));
  EXPECT_EQ(rep.e_mu_eps, 1.0);
  EXPECT_THROW(aggregate({}, {}), Error);
}

TEST(Correlations, UnitDiagonal) {
  auto g = testing::engine(22, 0);
  const Eigen::MatrixXd a = testing::white_noise(g, 4, 4);
  const SpectralMoments m = from_covariance(a * a.transpose());
  const Eigen::MatrixXd rho = m.correlations();
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(rho(i, i), 1.0, 1e-15);
  EXPECT_LE(rho.cwiseAbs().maxCoeff(), 1.0 + 1e-15);
}

}  // namespace
}  // namespace podwind
