#include <gtest/gtest.h>

#include <cmath>

#include "cartan/densela.hpp"
#include "cartan/error.hpp"
#include "cartan/random.hpp"

using namespace cartan;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Scaling-and-squaring Taylor series, independent of the Schur/EVD routes.
RMat taylor_expm(const RMat& x) {
  int squarings = 0;
  double norm = x.norm();
  while (norm > 0.25) {
    norm /= 2;
    ++squarings;
  }
  const RMat y = x / std::pow(2.0, squarings);
  RMat term = RMat::Identity(x.rows(), x.cols());
  RMat sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * y / k;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

template <typename Mat>
double block_offdiag_max(const Mat& k, int p) {
  const int n = static_cast<int>(k.rows());
  double m = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((i < p) != (j < p)) m = std::max(m, std::abs(k(i, j)));
  return m;
}

}  // namespace

TEST(DenseMatrix, JsonRoundTripReal) {
  RMat m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const auto j = to_json(DenseMatrix(m));
  EXPECT_EQ(j["scalar"], "real64");
  EXPECT_EQ(j["data"].size(), 6u);
  const auto back = matrix_from_json(j);
  EXPECT_TRUE(back.is_real());
  EXPECT_EQ((back.real() - m).norm(), 0.0);
}

TEST(DenseMatrix, JsonRoundTripComplex) {
  CMat m(2, 2);
  m << cplx(1, 2), cplx(0, -1), cplx(3, 0), cplx(0.5, 0.25);
  const auto back = matrix_from_json(to_json(DenseMatrix(m)));
  EXPECT_FALSE(back.is_real());
  EXPECT_EQ((back.complex() - m).norm(), 0.0);
}

TEST(DenseMatrix, JsonLengthMismatchThrows) {
  nlohmann::json j = {{"rows", 2}, {"cols", 2}, {"scalar", "real64"}, {"data", {1, 2, 3}}};
  EXPECT_THROW(matrix_from_json(j), Error);
}

TEST(Predicates, StructuredConstants) {
  const RMat j = symplectic_form(3);
  EXPECT_TRUE(is_orthogonal(DenseMatrix(j)));
  EXPECT_TRUE(is_skew_symmetric(DenseMatrix(j)));
  EXPECT_TRUE(is_symplectic_unitary(DenseMatrix(j)));
  EXPECT_TRUE(is_hermitian(DenseMatrix(ipq(2, 1))));
  EXPECT_FALSE(is_skew_symmetric(DenseMatrix(ipq(2, 1))));
  Rng rng(3);
  EXPECT_TRUE(is_symplectic_unitary(DenseMatrix(random_symplectic_unitary(3, rng))));
  EXPECT_FALSE(is_symplectic_unitary(DenseMatrix(haar_unitary(6, rng))));
}

TEST(Csg, MaterializePatterns) {
  const auto cs = CsgElement::cs(3, 1, {0.3});
  const RMat m = cs.materialize_real();
  EXPECT_DOUBLE_EQ(m(0, 0), std::cos(0.3));
  EXPECT_DOUBLE_EQ(m(0, 3), std::sin(0.3));
  EXPECT_DOUBLE_EQ(m(3, 0), -std::sin(0.3));
  EXPECT_DOUBLE_EQ(m(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(m(2, 2), 1.0);
  EXPECT_EQ(m(0, 1), 0.0);

  const auto cs2 = CsgElement::cs(1, 3, {0.3});
  const RMat m2 = cs2.materialize_real();
  EXPECT_DOUBLE_EQ(m2(0, 3), std::sin(0.3));
  EXPECT_DOUBLE_EQ(m2(1, 1), 1.0);

  const auto sch = CsgElement::schur(3, {0.7});
  const RMat ms = sch.materialize_real();
  EXPECT_DOUBLE_EQ(ms(0, 1), std::sin(0.7));
  EXPECT_DOUBLE_EQ(ms(2, 2), 1.0);

  auto sp = CsgElement::spdiag({0.2, -0.4});
  const CMat msp = sp.materialize_complex();
  EXPECT_NEAR(std::abs(msp(2, 2) - std::polar(1.0, -0.2)), 0.0, 1e-15);
  sp.doubling = Doubling::Dagger;
  EXPECT_EQ(sp.materialize_complex().rows(), 8);
}

TEST(Csg, SameKindElementsCommute) {
  const RMat a = CsgElement::cs(3, 2, {0.1, 1.2}).materialize_real();
  const RMat b = CsgElement::cs(3, 2, {-0.7, 2.2}).materialize_real();
  EXPECT_LT((a * b - b * a).norm(), 1e-15);
}

TEST(Csg, JsonRoundTrip) {
  auto a = CsgElement::cs(2, 3, {0.1, 0.2});
  a.doubling = Doubling::Repeat;
  const auto b = csg_from_json(to_json(a));
  EXPECT_EQ(b.kind, CsgKind::CS);
  EXPECT_EQ(b.p, 2);
  EXPECT_EQ(b.q, 3);
  EXPECT_EQ(b.doubling, Doubling::Repeat);
  EXPECT_EQ(b.angles, a.angles);
}

TEST(EvdUnitary, Identity) {
  const auto r = evd_unitary(CMat(CMat::Identity(4, 4)));
  for (double p : r.phases) EXPECT_NEAR(p, 0.0, 1e-15);
  EXPECT_EQ(r.clusters.size(), 1u);
  EXPECT_LT(unitarity_residual(r.V), 1e-14);
}

TEST(EvdUnitary, DiagonalInput) {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = cplx(0, 1);
  m(1, 1) = cplx(0, -1);
  const auto r = evd_unitary(m);
  EXPECT_NEAR(r.phases[0], -kPi / 2, 1e-14);
  EXPECT_NEAR(r.phases[1], kPi / 2, 1e-14);
}

TEST(EvdUnitary, HaarReconstruction) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMat u = haar_unitary(8, rng);
    const auto r = evd_unitary(u);
    CVec d(8);
    for (int i = 0; i < 8; ++i) d(i) = std::polar(1.0, r.phases[i]);
    EXPECT_LT((r.V * d.asDiagonal() * r.V.adjoint() - u).norm(), 1e-12);
    EXPECT_LT(unitarity_residual(r.V), 1e-12);
    for (int i = 1; i < 8; ++i) EXPECT_LE(r.phases[i - 1], r.phases[i]);
  }
}

TEST(EvdUnitary, DegenerateClustersAreContiguous) {
  Rng rng(5);
  const CMat w = haar_unitary(6, rng);
  CVec d(6);
  const double ph[6] = {0.5, -1.0, 0.5, 2.0, -1.0, 0.5};
  for (int i = 0; i < 6; ++i) d(i) = std::polar(1.0, ph[i]);
  const CMat u = w * d.asDiagonal() * w.adjoint();
  const auto r = evd_unitary(u);
  ASSERT_EQ(r.clusters.size(), 3u);
  EXPECT_EQ(r.clusters[0].second - r.clusters[0].first, 2);
  EXPECT_EQ(r.clusters[1].second - r.clusters[1].first, 3);
  EXPECT_EQ(r.clusters[2].second - r.clusters[2].first, 1);
  CVec e(6);
  for (int i = 0; i < 6; ++i) e(i) = std::polar(1.0, r.phases[i]);
  EXPECT_LT((r.V * e.asDiagonal() * r.V.adjoint() - u).norm(), 1e-12);
}

TEST(EvdUnitary, NearDegenerateResolvedBelowClusterTolerance) {
  Rng rng(8);
  const CMat w = haar_unitary(4, rng);
  CVec d(4);
  const double ph[4] = {0.3, 0.3 + 3e-9, 0.3 - 2e-9, -2.0};
  for (int i = 0; i < 4; ++i) d(i) = std::polar(1.0, ph[i]);
  const CMat u = w * d.asDiagonal() * w.adjoint();
  const auto r = evd_unitary(u);
  EXPECT_EQ(r.clusters.size(), 2u);
  EXPECT_EQ(r.fine_clusters.size(), 4u);
  CVec e(4);
  for (int i = 0; i < 4; ++i) e(i) = std::polar(1.0, r.phases[i]);
  EXPECT_LT((r.V * e.asDiagonal() * r.V.adjoint() - u).norm(), 1e-13);
}

TEST(EvdUnitary, ClusterAcrossBranchCutMovedToEnd) {
  CMat m = CMat::Zero(3, 3);
  m(0, 0) = std::polar(1.0, kPi - 1e-10);
  m(1, 1) = std::polar(1.0, -kPi + 1e-10);
  m(2, 2) = std::polar(1.0, 0.4);
  const auto r = evd_unitary(m);
  ASSERT_EQ(r.clusters.size(), 2u);
  EXPECT_EQ(r.clusters[1].first, 1);
  EXPECT_EQ(r.clusters[1].second, 3);
  EXPECT_NEAR(r.phases[0], 0.4, 1e-14);
}

TEST(EvdUnitary, RejectsNonUnitary) {
  CMat m = CMat::Identity(3, 3);
  m(0, 1) = 0.5;
  EXPECT_THROW(evd_unitary(m), Error);
}

TEST(RealSchur, Identity) {
  const auto r = real_schur(RMat::Identity(3, 3));
  EXPECT_LT((r.mu2.materialize_real() - RMat::Identity(3, 3)).norm(), 1e-15);
  EXPECT_NEAR(r.Q.determinant(), 1.0, 1e-14);
}

TEST(RealSchur, PlaneRotationIsItsOwnForm) {
  RMat o(2, 2);
  o << std::cos(0.8), std::sin(0.8), -std::sin(0.8), std::cos(0.8);
  const auto r = real_schur(o);
  EXPECT_NEAR(std::abs(r.mu2.angles[0]), 0.8, 1e-14);
  EXPECT_LT((r.Q * r.mu2.materialize_real() * r.Q.transpose() - o).norm(), 1e-14);
}

TEST(RealSchur, RandomSpecialOrthogonal) {
  Rng rng(21);
  for (int n = 1; n <= 9; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const RMat o = haar_special_orthogonal(n, rng);
      const auto r = real_schur(o);
      EXPECT_LT((r.Q * r.mu2.materialize_real() * r.Q.transpose() - o).norm(), 1e-11);
      EXPECT_NEAR(r.Q.determinant(), 1.0, 1e-12);
      EXPECT_LT(orthogonality_residual(r.Q), 1e-12);
    }
  }
}

TEST(RealSchur, ReflectionPairsAndTinyAngles) {
  Rng rng(4);
  const RMat w = haar_special_orthogonal(7, rng);
  const RMat d = CsgElement::schur(7, {kPi, 3e-9, 1.1}).materialize_real();
  const RMat o = w * d * w.transpose();
  const auto r = real_schur(o);
  EXPECT_LT((r.Q * r.mu2.materialize_real() * r.Q.transpose() - o).norm(), 1e-13);
  EXPECT_NEAR(r.Q.determinant(), 1.0, 1e-12);
}

TEST(RealSchur, RejectsImproper) {
  EXPECT_THROW(real_schur(ipq(2, 1)), Error);
}

TEST(Csd, IdentityGivesIdentityFactors) {
  const auto f = csd(RMat(RMat::Identity(5, 5)), 3, 2);
  EXPECT_LT((f.K1() - RMat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((f.K2() - RMat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-15);
  for (double a : f.F.angles) EXPECT_EQ(a, 0.0);
}

TEST(Csd, SingleAngleRotation) {
  RMat u(2, 2);
  u << std::cos(0.6), std::sin(0.6), -std::sin(0.6), std::cos(0.6);
  const auto f = csd(u, 1, 1);
  EXPECT_NEAR(f.F.angles[0], 0.6, 1e-14);
  EXPECT_NEAR(std::abs(f.K1()(0, 0)), 1.0, 1e-14);
  EXPECT_LT((f.K1() * f.F.materialize_real() * f.K2() - u).norm(), 1e-14);
}

TEST(Csd, RejectsBadSplit) {
  EXPECT_THROW(csd(RMat(RMat::Identity(4, 4)), 2, 1), Error);
}

class CsdSplits : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(CsdSplits, ComplexReconstructsAndIsBlockDiagonal) {
  const auto [p, q] = GetParam();
  Rng rng(100 + 7 * p + q);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat u = haar_unitary(p + q, rng);
    const auto f = csd(u, p, q);
    const CMat rec = f.K1() * f.F.materialize_complex() * f.K2();
    EXPECT_LT((rec - u).norm(), 1e-10 * std::sqrt(p + q) * u.norm());
    EXPECT_LT(unitarity_residual(f.K1()), 1e-12);
    EXPECT_LT(unitarity_residual(f.K2()), 1e-12);
    EXPECT_LE(block_offdiag_max(f.K1(), p), 1e-12);
    EXPECT_LE(block_offdiag_max(f.K2(), p), 1e-12);
  }
}

TEST_P(CsdSplits, RealInputGivesRealFactors) {
  const auto [p, q] = GetParam();
  Rng rng(200 + 7 * p + q);
  for (int trial = 0; trial < 10; ++trial) {
    const RMat u = haar_special_orthogonal(p + q, rng);
    const auto f = csd(u, p, q);
    const RMat rec = f.K1() * f.F.materialize_real() * f.K2();
    EXPECT_LT((rec - u).norm(), 1e-10 * std::sqrt(p + q) * u.norm());
    EXPECT_LT(orthogonality_residual(f.K1()), 1e-12);
    EXPECT_LT(orthogonality_residual(f.K2()), 1e-12);
  }
}

TEST_P(CsdSplits, ClusteredCosines) {
  const auto [p, q] = GetParam();
  const int r = std::min(p, q);
  Rng rng(300 + 7 * p + q);
  std::vector<double> ang(r, 0.9);
  if (r > 1) ang[0] = 0.0;
  const RMat mid = CsgElement::cs(p, q, ang).materialize_real();
  const RMat left = direct_sum<RMat>(haar_special_orthogonal(p, rng), haar_special_orthogonal(q, rng));
  const RMat right = direct_sum<RMat>(haar_special_orthogonal(p, rng), haar_special_orthogonal(q, rng));
  const RMat u = left * mid * right;
  const auto f = csd(u, p, q);
  EXPECT_LT((f.K1() * f.F.materialize_real() * f.K2() - u).norm(), 1e-12);
  EXPECT_LT(orthogonality_residual(f.K2()), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Splits, CsdSplits,
                         ::testing::Values(std::make_pair(1, 1), std::make_pair(2, 2),
                                           std::make_pair(3, 2), std::make_pair(2, 3),
                                           std::make_pair(1, 4), std::make_pair(5, 1),
                                           std::make_pair(8, 8), std::make_pair(7, 12)));

TEST(ExpmSkew, ZeroGivesIdentity) {
  EXPECT_LT((expm_skew(RMat(RMat::Zero(4, 4)), 1.0) - RMat::Identity(4, 4)).norm(), 1e-15);
}

TEST(ExpmSkew, GivensClosedForm) {
  RMat x = RMat::Zero(2, 2);
  x(0, 1) = 0.7;
  x(1, 0) = -0.7;
  const RMat e = expm_skew(x, 1.0);
  EXPECT_NEAR(e(0, 0), std::cos(0.7), 1e-15);
  EXPECT_NEAR(e(0, 1), std::sin(0.7), 1e-15);
  EXPECT_NEAR(e(1, 0), -std::sin(0.7), 1e-15);
}

TEST(ExpmSkew, MatchesTaylorOracle) {
  Rng rng(9);
  const RMat x = random_skew(10, rng);
  EXPECT_LT((expm_skew(x, 0.3) - taylor_expm(0.3 * x)).norm(), 1e-11);
  EXPECT_LT(orthogonality_residual(expm_skew(x, 0.3)), 1e-12);
}

TEST(ExpmSkew, ComplexMatchesRealRoute) {
  Rng rng(10);
  const RMat x = random_skew(6, rng);
  const CMat ec = expm_skew(CMat(x.cast<cplx>()), 0.8);
  EXPECT_LT((ec.real() - expm_skew(x, 0.8)).norm(), 1e-12);
  EXPECT_LT(ec.imag().norm(), 1e-12);
}

TEST(ExpmSkew, OneParameterGroup) {
  Rng rng(12);
  const RMat x = random_skew(7, rng);
  EXPECT_LT((expm_skew(x, 0.4) * expm_skew(x, 1.1) - expm_skew(x, 1.5)).norm(), 1e-10);
  const CMat g = gaussian_complex(5, 5, rng);
  const CMat xc = g - g.adjoint();
  EXPECT_LT((expm_skew(xc, -0.3) * expm_skew(xc, 0.9) - expm_skew(xc, 0.6)).norm(), 1e-10);
}

TEST(ExpmSkew, RejectsNonSkew) {
  EXPECT_THROW(expm_skew(RMat(RMat::Identity(3, 3)), 1.0), Error);
}

TEST(CsgSqrt, IdentityAndPrincipalBranch) {
  const auto id = csg_sqrt(CsgElement::udiag({0.0, 0.0}));
  EXPECT_EQ(id.angles[0], 0.0);
  const auto pi = csg_sqrt(CsgElement::udiag({kPi}));
  EXPECT_DOUBLE_EQ(pi.angles[0], kPi / 2);
  const auto flipped = csg_sqrt(CsgElement::udiag({0.4, 0.2}), true);
  EXPECT_DOUBLE_EQ(flipped.angles[0], 0.2 + kPi);
}

TEST(CsgSqrt, SquareRoundTrip) {
  Rng rng(13);
  std::uniform_real_distribution<double> ud(-kPi, kPi);
  const auto a = CsgElement::cs(3, 3, {ud(rng), ud(rng), ud(rng)});
  const RMat a2m = a.materialize_real() * a.materialize_real();
  auto a2 = a;
  for (auto& x : a2.angles) x = 2 * x;
  const auto root = csg_sqrt(a2);
  const RMat r = root.materialize_real();
  EXPECT_LT((r * r - a2m).norm(), 1e-13);
}
