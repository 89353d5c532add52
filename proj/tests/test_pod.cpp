#include <gtest/gtest.h>

#include <cmath>

#include "podwind/errors.hpp"
#include "podwind/pod.hpp"
#include "support.hpp"

namespace podwind {
namespace {

Eigen::MatrixXcd random_unitary(std::mt19937_64& g, Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(testing::random_complex(g, n, n));
  return qr.householderQ();
}

TEST(Decompose, RoundTripProperty) {
  for (std::uint64_t c = 0; c < 12; ++c) {
    auto g = testing::engine(10, c);
    const std::size_t n = testing::uniform_size(g, 1, 16);
    const CpsdMatrix s = testing::random_cpsd(g, n, 256);
    const CpsdMatrix back = reconstruct(decompose(s), n);
    for (std::size_t k = 0; k < s.n_lines(); ++k)
      ASSERT_LT(testing::relative_frobenius(back.line(k), s.line(k)), 1e-9) << "case " << c << " line " << k;
  }
}

TEST(Decompose, ModesAreOrthonormalAndSorted) {
  for (std::uint64_t c = 0; c < 8; ++c) {
    auto g = testing::engine(11, c);
    const std::size_t n = testing::uniform_size(g, 2, 12);
    const CpsdMatrix s = testing::random_cpsd(g, n, 32);
    const SpectralModes m = decompose(s);
    for (std::size_t k = 0; k < s.n_lines(); ++k) {
      const Eigen::MatrixXcd psi = m.eigenvectors(k);
      EXPECT_LT((psi * psi.adjoint() - Eigen::MatrixXcd::Identity(psi.rows(), psi.rows())).norm(), 1e-12);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += m.eigenvalue(k, i);
        if (i > 0) EXPECT_GE(m.eigenvalue(k, i - 1), m.eigenvalue(k, i));
        // largest entry real and positive
        Eigen::Index arg;
        psi.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff(&arg);
        EXPECT_EQ(psi(static_cast<Eigen::Index>(i), arg).imag(), 0.0);
        EXPECT_GT(psi(static_cast<Eigen::Index>(i), arg).real(), 0.0);
      }
      const double trace = s.line(k).trace().real();
      EXPECT_NEAR(sum, trace, 1e-12 * std::max(1.0, trace));
    }
  }
}

// Eigenvalues lambda_0 r^i under a random unitary basis: the recovered
// spectrum and the captured-energy fractions follow the geometric series.
TEST(Decompose, GeometricDecayOracle) {
  auto g = testing::engine(12, 0);
  const Eigen::Index n = 10;
  const double r = 0.4;
  CpsdMatrix s(n, 5, 1.0);
  std::vector<double> level{0.0, 1.0, 3.0, 0.5, 2.0};
  for (std::size_t k = 1; k < 5; ++k) {
    Eigen::VectorXd lam(n);
    for (Eigen::Index i = 0; i < n; ++i) lam[i] = level[k] * std::pow(r, static_cast<double>(i));
    const Eigen::MatrixXcd u = random_unitary(g, n);
    Eigen::MatrixXcd line = u * lam.cast<cplx>().asDiagonal() * u.adjoint();
    s.line(k) = 0.5 * (line + line.adjoint());
  }
  const SpectralModes m = decompose(s);
  for (std::size_t k = 1; k < 5; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      EXPECT_NEAR(m.eigenvalue(k, static_cast<std::size_t>(i)), level[k] * std::pow(r, double(i)), 1e-13 * level[k]);
  for (std::size_t nm = 1; nm <= static_cast<std::size_t>(n); ++nm) {
    const double expect = (1.0 - std::pow(r, double(nm))) / (1.0 - std::pow(r, double(n)));
    const CapturedEnergy e = captured_energy(m, nm);
    EXPECT_NEAR(e.total, expect, 1e-12);
    EXPECT_EQ(e.per_line[0], 1.0);  // zero-trace line
    EXPECT_NEAR(e.per_line[2], expect, 1e-12);
  }
}

TEST(Decompose, TruncatedReconstructionKeepsLeadingModes) {
  auto g = testing::engine(13, 0);
  const CpsdMatrix s = testing::random_cpsd(g, 6, 8);
  const SpectralModes m = decompose(s);
  const CpsdMatrix two = reconstruct(m, 2);
  for (std::size_t k = 1; k < 8; ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(two.line(k)));
    EXPECT_NEAR(es.eigenvalues()[5], m.eigenvalue(k, 0), 1e-12 * m.eigenvalue(k, 0));
    EXPECT_NEAR(es.eigenvalues()[4], m.eigenvalue(k, 1), 1e-12 * m.eigenvalue(k, 0));
    EXPECT_NEAR(es.eigenvalues()[3], 0.0, 1e-12 * m.eigenvalue(k, 0));
  }
  EXPECT_THROW(reconstruct(m, 0), Error);
  EXPECT_THROW(reconstruct(m, 7), Error);
  EXPECT_THROW(captured_energy(m, 7), Error);
}

TEST(Decompose, ClampsRoundOffNegatives) {
  CpsdMatrix s(2, 2, 1.0);
  s.line(1) << cplx(1.0), cplx(0.0), cplx(0.0), cplx(-1e-12);
  EXPECT_EQ(decompose(s).eigenvalue(1, 1), 0.0);
  s.line(1)(1, 1) = -1e-6;
  EXPECT_LT(decompose(s).eigenvalue(1, 1), 0.0);
}

TEST(Decompose, RejectsNonHermitianLine) {
  CpsdMatrix s(2, 2, 1.0);
  s.line(1) << cplx(1.0), cplx(0.5, 0.1), cplx(0.5, 0.1), cplx(1.0);
  try {
    decompose(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_input);
  }
}

TEST(Decompose, DeterministicAcrossCalls) {
  auto g = testing::engine(14, 0);
  const CpsdMatrix s = testing::random_cpsd(g, 9, 40);
  const SpectralModes a = decompose(s), b = decompose(s);
  EXPECT_TRUE(std::equal(a.eigenvalue_data().begin(), a.eigenvalue_data().end(), b.eigenvalue_data().begin()));
  EXPECT_TRUE(std::equal(a.eigenvector_data().begin(), a.eigenvector_data().end(), b.eigenvector_data().begin()));
}

TEST(FixPhase, PivotIsRealPositiveAndIdempotent) {
  Eigen::VectorXcd v(3);
  v << cplx(0.1, 0.2), cplx(0.0, -2.0), cplx(1.0, 1.0);
  fix_phase(v);
  EXPECT_EQ(v[1], cplx(2.0, 0.0));
  EXPECT_NEAR(std::abs(v[0]), std::hypot(0.1, 0.2), 1e-15);
  const Eigen::VectorXcd once = v;
  fix_phase(v);
  EXPECT_EQ(v, once);
  Eigen::VectorXcd tie(2);
  tie << cplx(0.0, 1.0), cplx(-1.0, 0.0);
  fix_phase(tie);
  EXPECT_EQ(tie[0], cplx(1.0, 0.0));
}

}  // namespace
}  // namespace podwind
