#pragma once

// Numerical KAK decompositions G = K1 A K2 for the ten classical types, built
// on the relative complex structure Delta = G Theta(G)^{-1}, and the
// horizontal decomposition x = K a K^T of canonical BDI algebra elements.

#include <complex>
#include <string>
#include <utility>

#include "cartan/densela.hpp"
#include "cartan/involution.hpp"
#include "cartan/random.hpp"

namespace cartan {

// Group elements by type (size parameter as in canonical_involution):
// A(n): U (+) U' in U(n) x U(n); AI(n): U(n); AII(n): U(2n); AIII(p,q): U(p+q);
// BD(n): O (+) O' in SO(n) x SO(n); BDI(p,q): SO(p+q); DIII(n): SO(2n);
// C(n): S (+) S' in Sp(n) x Sp(n); CI(n): Sp(n); CII(p,q): Sp(p+q).
struct KakFactors {
  DenseMatrix k1;
  CsgElement a;
  DenseMatrix k2;
  InvolutionType type;
  DenseMatrix delta;
  // Kept at 1: the AI/AII determinant phase is folded into the CSG angles.
  std::complex<double> global_phase{1.0, 0.0};
  // Basis change B for a non-canonical involution: the middle factor is
  // B a B^dag. Empty for the canonical form.
  DenseMatrix basis;

  // Materialized middle factor (including the basis change).
  CMat middle() const;
  // global_phase * k1 * middle() * k2.
  CMat reconstruct() const;
};

struct KakOptions {
  double tol = 1e-10;
};

// Canonical involution of `type`; (p,q) are read from the type.
KakFactors kak_decompose(const DenseMatrix& G, const InvolutionType& type,
                         const KakOptions& opt = {});

// Involution given by an arbitrary conjugator. Supported for AI, AII, AIII,
// BDI, DIII; the remaining types must use the canonical form.
KakFactors kak_decompose(const DenseMatrix& G, const Involution& theta,
                         const KakOptions& opt = {});

// Group membership residual of G for the type (inf when the shape is wrong).
double group_residual(const CMat& G, const InvolutionType& type);

// Residual of Theta(k) = k for the canonical involution of the type, together
// with the group residual.
double k_membership_residual(const CMat& k, const InvolutionType& type);

struct HorizontalResult {
  RMat K;
  CsgElement a;  // Schur-free CS pattern: angles are the signed rates.
  RMat a_alg;    // Algebra element sum_j a_j (E_{j,j'} - E_{j',j}).
};

// x = K a_alg K^T for x = [[0, B], [-B^T, 0]] horizontal for BDI(p,q),
// with K in SO(p) x SO(q).
HorizontalResult horizontal_decompose(const RMat& x, int p, int q, double tol = 1e-10);

// Embeds rates a_j as sum_j a_j (E_{j,j'} - E_{j',j}) with j' the CS partner.
RMat csa_algebra_element(int p, int q, const std::vector<double>& rates);

struct VerifyReport {
  double reconstruction = 0.0;
  double k1_membership = 0.0;
  double k2_membership = 0.0;
  double csg_pattern = 0.0;
  // BDI: determinants of the four orthogonal blocks are +1.
  bool det_ok = true;
  bool passed = false;
};

// Seeded random element of the group the type decomposes (same size
// convention as kak_decompose); real storage for BD/BDI/DIII.
DenseMatrix random_group_element(const InvolutionType& type, int n, Rng& rng);

VerifyReport verify_factors(const DenseMatrix& G, const KakFactors& f, double tol = 1e-10);

nlohmann::json to_json(const KakFactors& f);
KakFactors kak_factors_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VerifyReport& r);

}  // namespace cartan
