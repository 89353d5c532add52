#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "podwind/errors.hpp"
#include "podwind/pod.hpp"
#include "podwind/rng.hpp"
#include "podwind/spectral.hpp"
#include "podwind/srm.hpp"
#include "support.hpp"

namespace podwind {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Period 8 s, dt 1/16 s: 128 steps, Nyquist at line 64.
SimulationPlan small_plan(std::uint64_t case_seed, std::size_t n, std::size_t lines = 40) {
  auto g = testing::engine(40, case_seed);
  SimulationPlan p;
  p.modes = std::make_shared<const SpectralModes>(decompose(testing::random_cpsd(g, n, lines, kTwoPi / 8.0)));
  p.dt_s = 1.0 / 16.0;
  p.seed = 1000 + case_seed;
  return p;
}

// Scalar evaluation of the cosine series for the leading `n_modes` modes.
Eigen::MatrixXd oracle_series(const SimulationPlan& p, std::uint64_t r, std::size_t n_modes) {
  const SpectralModes& m = *p.modes;
  const auto n = static_cast<Eigen::Index>(m.n_components());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.n_steps()), n);
  for (std::size_t i = 0; i < n_modes; ++i)
    for (std::size_t k = 1; k < m.n_lines(); ++k) {
      const double lam = std::max(m.eigenvalue(k, i), 0.0);
      const double th = random_phase(p.seed, r, std::uint32_t(i), std::uint32_t(k));
      for (Eigen::Index j = 0; j < n; ++j) {
        const cplx psi = m.eigenvectors(k)(Eigen::Index(i), j);
        const double amp = 2.0 * std::abs(psi) * std::sqrt(lam * m.delta_omega());
        for (Eigen::Index s = 0; s < x.rows(); ++s)
          x(s, j) += amp * std::cos(m.omega(k) * double(s) * p.dt_s + std::arg(psi) + th);
      }
    }
  return x;
}

TEST(Synthesis, MatchesScalarSeries) {
  const SimulationPlan p = small_plan(0, 4);
  const Synthesizer synth(p);
  ASSERT_TRUE(synth.uses_fft());
  for (std::size_t nm : {std::size_t{1}, std::size_t{4}}) {
    const Eigen::MatrixXd want = oracle_series(p, 3, nm);
    EXPECT_LT((synth.fluctuation(3, nm) - want).norm() / want.norm(), 1e-12);
    EXPECT_LT((synth.fluctuation_direct(3, nm) - want).norm() / want.norm(), 1e-12);
  }
}

TEST(Synthesis, FftAgreesWithDirectSumProperty) {
  for (std::uint64_t c = 0; c < 10; ++c) {
    auto g = testing::engine(41, c);
    const std::size_t n = testing::uniform_size(g, 1, 8);
    const SimulationPlan p = small_plan(c, n, testing::uniform_size(g, 2, 65));
    const Synthesizer synth(p);
    ASSERT_TRUE(synth.uses_fft());
    const std::size_t nm = testing::uniform_size(g, 1, n);
    const Eigen::MatrixXd a = synth.fluctuation(c, nm), b = synth.fluctuation_direct(c, nm);
    EXPECT_LT((a - b).norm() / std::max(b.norm(), 1e-300), 1e-11) << "case " << c;
  }
}

TEST(Synthesis, PartialPeriodTruncatesFullPeriod) {
  SimulationPlan p = small_plan(1, 3);
  p.duration_s = 5.0;
  const Synthesizer synth(p);
  EXPECT_EQ(p.n_steps(), 80u);
  SimulationPlan full = p;
  full.duration_s = 0.0;
  const Eigen::MatrixXd whole = Synthesizer(full).fluctuation(2);
  EXPECT_LT((synth.fluctuation(2) - whole.topRows(80)).norm() / whole.topRows(80).norm(), 1e-12);
}

// A step that does not divide the period falls back to the cosine sum.
TEST(Synthesis, IncommensurateStepUsesDirectSum) {
  SimulationPlan p = small_plan(1, 3);
  p.dt_s = 0.07;
  p.duration_s = 7.0;
  const Synthesizer synth(p);
  EXPECT_FALSE(synth.uses_fft());
  const Eigen::MatrixXd want = oracle_series(p, 4, 3);
  EXPECT_LT((synth.fluctuation(4) - want).norm() / want.norm(), 1e-12);
}

// Common random numbers: adding a mode adds exactly that subprocess.
TEST(Synthesis, ModesSuperpose) {
  const SimulationPlan p = small_plan(2, 5);
  const Synthesizer synth(p);
  std::vector<double> phases(p.modes->n_lines());
  for (std::size_t k = 0; k < phases.size(); ++k) phases[k] = random_phase(p.seed, 7, 2, std::uint32_t(k));
  const Eigen::MatrixXd third = simulate_subprocess(*p.modes, 2, phases, p.dt_s, p.n_steps());
  const Eigen::MatrixXd diff = synth.fluctuation(7, 3) - synth.fluctuation(7, 2);
  EXPECT_LT((diff - third).norm() / third.norm(), 1e-11);
}

// Over one full period every line is on-bin, so a single-mode realization
// reproduces Lambda_1 Psi_1 Psi_1^H exactly on every line.
TEST(Synthesis, SingleModePeriodogramIsExact) {
  SimulationPlan p = small_plan(3, 4);
  p.n_modes = 1;
  const EnsembleAccumulator acc = simulate_batch(p, BatchOptions{.n_lines = 40});
  const CpsdMatrix got = acc.mean_spectra();
  const CpsdMatrix want = reconstruct(*p.modes, 1);
  for (std::size_t k = 1; k < 40; ++k)
    EXPECT_LT(testing::relative_frobenius(got.line(k), want.line(k)), 1e-10) << k;
}

TEST(Synthesis, CovarianceConvergesToTarget) {
  // Comparable power on every line, so no single line dominates the scatter.
  auto g = testing::engine(42, 0);
  CpsdMatrix s(3, 40, kTwoPi / 8.0);
  for (std::size_t k = 1; k < 40; ++k) {
    const Eigen::MatrixXcd a = testing::random_complex(g, 3, 3);
    s.line(k) = a * a.adjoint();
  }
  SimulationPlan p;
  p.modes = std::make_shared<const SpectralModes>(decompose(s));
  p.dt_s = 1.0 / 16.0;
  p.seed = 4;
  p.n_realizations = 4000;
  const EnsembleAccumulator acc = simulate_batch(p);
  const CpsdMatrix target = reconstruct(*p.modes, 3);
  const Eigen::MatrixXd want = moments(target, 100.0).covariances;
  const Eigen::MatrixXd got = acc.sample_covariance();
  EXPECT_LT((got - want).norm() / want.norm(), 0.02);
  EXPECT_LT(acc.sample_mean().norm(), 0.02 * std::sqrt(want.trace()));
}

TEST(Synthesis, DeterministicAndSeedSensitive) {
  const SimulationPlan p = small_plan(5, 3);
  const Synthesizer a(p), b(p);
  EXPECT_EQ(a.fluctuation(11), b.fluctuation(11));
  EXPECT_NE(a.fluctuation(11), a.fluctuation(12));
  SimulationPlan q = p;
  q.seed += 1;
  EXPECT_NE(Synthesizer(q).fluctuation(11), a.fluctuation(11));
}

TEST(Synthesis, RealizationCarriesMeansAndScale) {
  SimulationPlan p = small_plan(6, 2);
  p.means = Eigen::Vector2d(1.5, -0.5);
  p.scale = Eigen::Vector2d(2.0, 4.0);
  const RecordSet rs = simulate_realization(p, 0);
  const Eigen::MatrixXd x = Synthesizer(p).fluctuation(0);
  EXPECT_EQ(rs.means, p.means);
  EXPECT_EQ(rs.components.col(0), 2.0 * x.col(0));
  EXPECT_EQ(rs.components.col(1), 4.0 * x.col(1));
  EXPECT_DOUBLE_EQ(rs.sample_rate, 16.0);
}

TEST(Plan, Validation) {
  SimulationPlan p = small_plan(7, 3, 70);  // line 69 lies past Nyquist of dt = 1/16
  EXPECT_THROW(p.validate(), Error);
  p = small_plan(7, 3);
  p.n_modes = 4;
  EXPECT_THROW(p.validate(), Error);
  p.n_modes = 0;
  p.duration_s = 9.0;
  EXPECT_THROW(p.validate(), Error);
  p.duration_s = 0.0;
  p.means = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(p.validate(), Error);
  p.means.resize(0);
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.mode_count(), 3u);
  EXPECT_DOUBLE_EQ(p.period(), 8.0);
}

TEST(Plan, RejectsNegativeEigenvalue) {
  SimulationPlan p = small_plan(8, 2);
  auto m = std::make_shared<SpectralModes>(*p.modes);
  m->eigenvalue(3, 1) = -1e-3 * m->eigenvalue(3, 0);
  p.modes = m;
  try {
    Synthesizer s(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::calibration);
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

EnsembleAccumulator::Target target_of(const SimulationPlan& p) {
  return {moments(reconstruct(*p.modes, p.modes->n_components()), 100.0), 100.0};
}

TEST(Batch, IndependentOfThreadCount) {
  SimulationPlan p = small_plan(9, 4);
  p.n_realizations = 300;
  BatchOptions one{.threads = 1, .block_size = 16, .target = target_of(p)};
  BatchOptions many = one;
  many.threads = 3;
  const EnsembleAccumulator a = simulate_batch(p, one), b = simulate_batch(p, many);
  const CpsdMatrix sa = a.mean_spectra(), sb = b.mean_spectra();
  EXPECT_TRUE(std::equal(sa.values().begin(), sa.values().end(), sb.values().begin()));
  EXPECT_EQ(a.mean_epsilon(), b.mean_epsilon());
  EXPECT_EQ(a.std_phi(), b.std_phi());
  EXPECT_EQ(a.sample_covariance(), b.sample_covariance());
}

TEST(Batch, SinkSeesRealizationsInOrder) {
  SimulationPlan p = small_plan(10, 2);
  p.n_realizations = 70;
  std::vector<std::uint64_t> seen;
  BatchOptions o{.threads = 2, .block_size = 8};
  o.first_realization = 100;
  o.sink = [&](std::uint64_t r, const RecordSet& rs) {
    seen.push_back(r);
    if (r == 105) {
      EXPECT_EQ(rs.components, Synthesizer(p).fluctuation(105));
    }
  };
  simulate_batch(p, o);
  ASSERT_EQ(seen.size(), 70u);
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], 100 + i);
}

// Streaming statistics against a two-pass computation over stored
// realizations, and merge against sequential accumulation.
TEST(Accumulator, MatchesTwoPassOracle) {
  SimulationPlan p = small_plan(11, 3);
  const auto target = target_of(p);
  const Synthesizer synth(p);
  const double fs = 16.0;
  const std::size_t r = 25;
  EnsembleAccumulator whole(3, 65, kTwoPi / 8.0, generic_labels(3), target);
  EnsembleAccumulator left = whole, right = whole;
  std::vector<RecordErrors> errs;
  Eigen::MatrixXd all(0, 3);
  for (std::size_t i = 0; i < r; ++i) {
    const Eigen::MatrixXd x = synth.fluctuation(i);
    whole.add(x, fs);
    (i < 10 ? left : right).add(x, fs);
    errs.push_back(compare(moments(periodogram(x, fs), 100.0), target.moments));
    Eigen::MatrixXd grown(all.rows() + x.rows(), 3);
    grown << all, x;
    all = grown;
  }
  left.merge(right);
  const ErrorReport two_pass = aggregate(errs, {generic_labels(3)});
  EXPECT_LT((whole.mean_epsilon() - two_pass.mu_eps).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((whole.std_epsilon() - two_pass.sigma_eps).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((whole.mean_phi() - two_pass.mu_phi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((whole.std_phi() - two_pass.sigma_phi).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(whole.min_epsilon(), two_pass.min_eps);
  EXPECT_EQ(whole.max_epsilon(), two_pass.max_eps);
  EXPECT_LT((whole.epsilon_correlation() - two_pass.rho_eps).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::RowVectorXd mean = all.colwise().mean();
  const Eigen::MatrixXd cov = all.transpose() * all / double(all.rows());
  EXPECT_LT((whole.sample_mean().transpose() - mean).norm(), 1e-12);
  EXPECT_LT((whole.sample_covariance() - cov).norm() / cov.norm(), 1e-12);
  EXPECT_LT((left.mean_epsilon() - whole.mean_epsilon()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(left.count(), r);
}

TEST(Accumulator, EnsembleReportUsesAveragedSpectra) {
  SimulationPlan p = small_plan(12, 3);
  p.n_realizations = 50;
  const auto target = target_of(p);
  const EnsembleAccumulator acc = simulate_batch(p, BatchOptions{.target = target});
  const ErrorReport rep = ensemble_report(acc, {generic_labels(3)});
  const RecordErrors avg = compare(moments(acc.mean_spectra(), 100.0), target.moments);
  EXPECT_LT((rep.mu_eps - avg.epsilon).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((rep.mu_phi - avg.phi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(rep.sigma_eps, acc.std_epsilon());
  EXPECT_EQ(rep.n_records, 50u);
  EXPECT_NEAR(rep.e_mu_eps, rep.mu_eps.mean(), 1e-14);
}

}  // namespace
}  // namespace podwind
