#pragma once

// Cartan involutions in the defining representation: canonical forms,
// application, classification, composition, gradings, and 2-recursive lifts.

#include <map>
#include <string>
#include <vector>

#include "cartan/densela.hpp"

namespace cartan {

enum class TypeTag { A, AI, AII, AIII, BD, BDI, DIII, C, CI, CII, Trivial };

struct InvolutionType {
  TypeTag tag = TypeTag::Trivial;
  // Block sizes for AIII, BDI, CII; zero otherwise.
  int p = 0;
  int q = 0;
  // T (+) T acting blockwise on a doubled algebra h (+) h.
  bool doubled = false;

  bool has_split() const {
    return tag == TypeTag::AIII || tag == TypeTag::BDI || tag == TypeTag::CII;
  }
  // AIII/BDI/CII with an empty block act trivially.
  bool is_trivial() const {
    return tag == TypeTag::Trivial || (has_split() && (p == 0 || q == 0));
  }
  std::string name() const;
  bool operator==(const InvolutionType& o) const {
    return tag == o.tag && p == o.p && q == o.q && doubled == o.doubled;
  }
};

// Accepts "AI", "AIII(2,1)", "BDI(3,2)", "AI^2" and the plain tag names.
InvolutionType parse_type(const std::string& s);
const char* tag_name(TypeTag t);

enum class Family { U, SU, SO, SP };

// u(n), su(n), so(n), sp(n), or h (+) h when doubled. For sp(n) the matrices
// are 2n x 2n.
struct AlgebraId {
  Family family = Family::U;
  int n = 0;
  bool doubled = false;

  // Side length of the base block.
  int block_size() const { return family == Family::SP ? 2 * n : n; }
  // Side length of the matrices representing the algebra.
  int size() const { return doubled ? 2 * block_size() : block_size(); }
  int dim() const;
  bool is_real() const { return family == Family::SO; }
  std::string name() const;
  bool operator==(const AlgebraId& o) const {
    return family == o.family && n == o.n && doubled == o.doubled;
  }
};

// "u(4)", "su(3)", "so(6)", "sp(2)", "u(2)+u(2)".
AlgebraId parse_algebra(const std::string& s);

using AlgebraBasis = std::vector<CMat>;

// Orthonormal basis with respect to <x, y> = Re tr(x^dag y).
AlgebraBasis algebra_basis(const AlgebraId& a);

double inner(const CMat& x, const CMat& y);

// theta(x) = G S^sigma(x^{*tau}) G^{-1}, S^sigma the block swap on h (+) h.
struct Involution {
  AlgebraId algebra;
  DenseMatrix G;
  int tau = 0;
  int sigma = 0;
  InvolutionType declared_type;
};

// Canonical form. The integer is the type's size parameter (ignored for
// AIII/BDI/CII, which take p, q from the type):
// A(n): u(n)+u(n); AI(n): u(n); AII(n): u(2n); BD(n): so(n)+so(n);
// DIII(n): so(2n); C(n): sp(n)+sp(n); CI(n): sp(n); CII(p,q): sp(p+q).
Involution canonical_involution(const InvolutionType& type, int n = 0);

// Algebra on which the canonical involution of `type` acts.
AlgebraId canonical_algebra(const InvolutionType& type, int n = 0);

CMat apply_involution(const Involution& theta, const CMat& x);
DenseMatrix apply_involution(const Involution& theta, const DenseMatrix& x);

// Largest violation of theta(theta(x)) = x over the algebra basis.
double involution_residual(const Involution& theta);

// Residual of the "Constraint on G" condition of the declared type.
double conjugator_residual(const Involution& theta);

InvolutionType classify(const DenseMatrix& G, int tau, int sigma,
                        const AlgebraId& algebra);
inline InvolutionType classify(const Involution& theta) {
  return classify(theta.G, theta.tau, theta.sigma, theta.algebra);
}

// Max over the basis of ||theta1(theta2(x)) - theta2(theta1(x))||.
double commutator_residual(const Involution& t1, const Involution& t2);

// theta1 o theta2 with a phase-normalized conjugator; throws NonCommuting.
Involution compose(const Involution& t1, const Involution& t2);

struct Split {
  AlgebraBasis k;
  AlgebraBasis p;
};

// Orthonormal bases of the +1 / -1 eigenspaces of theta on span(basis).
Split eigensplit(const Involution& theta, const AlgebraBasis& basis);

struct Grading {
  int c = 0;
  // Keys are bitstrings of length c; bit j is 1 on the -1 eigenspace of
  // the j-th involution.
  std::map<std::string, AlgebraBasis> subspaces;

  int total_dim() const;
};

Grading grading_from_involutions(const std::vector<Involution>& thetas,
                                 const AlgebraBasis& basis);

// Largest norm of the component of [g_s, g_t] outside g_{s xor t}, over
// basis pairs (sampled when the subspaces are large).
double grading_residual(const Grading& g, int max_pairs = 2000);

struct GradingCd {
  AlgebraBasis subalgebra;
  AlgebraBasis k;
  AlgebraBasis p;
  // Set when phi vanishes on Q, so that p is empty.
  bool improper = false;
};

GradingCd cd_from_grading(const Grading& g, const std::vector<std::string>& Q,
                          const std::map<std::string, int>& phi);

// Lifts theta2, defined on the +1 eigenspace of theta1, to the whole algebra.
// `basis` is the U with theta1 = Ad_{U^dag} o theta1_canonical o Ad_U.
// theta2 is given on u(n) for DIII/CI parents, on h for A/BD/C parents, and
// in the parent's representation otherwise.
Involution lift_step(const Involution& theta1, const Involution& theta2,
                     const DenseMatrix& basis);

struct SpaceInfo {
  int dim_G = 0;
  int dim_K = 0;
  int dim_P = 0;
  int rank = 0;
  int overparam = 0;
};

// Uses the same size parameter convention as canonical_involution.
SpaceInfo space_info(const InvolutionType& type, int n = 0);

nlohmann::json to_json(const Involution& theta);
Involution involution_from_json(const nlohmann::json& j);

}  // namespace cartan
