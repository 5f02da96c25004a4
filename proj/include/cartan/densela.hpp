#pragma once

// Dense float64 linear algebra kernel: matrix carrier, structured constants,
// predicates, Cartan subgroup elements, and the factorizations used by the
// KAK constructions (unitary EVD, real Schur, CSD, skew exponential).

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cartan {

using cplx = std::complex<double>;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

enum class ScalarKind { Real64, Complex128 };

// Real or complex rectangular matrix; the JSON and API carrier.
class DenseMatrix {
 public:
  DenseMatrix();
  explicit DenseMatrix(RMat m);
  explicit DenseMatrix(CMat m);

  static DenseMatrix identity(int n);

  int rows() const;
  int cols() const;
  ScalarKind scalar() const { return kind_; }
  bool is_real() const { return kind_ == ScalarKind::Real64; }

  // Valid only when is_real().
  const RMat& real() const;
  // Valid only when !is_real().
  const CMat& complex() const;
  // Always valid; promotes real data.
  CMat to_complex() const;
  // Real part, with the imaginary part required to be below tol.
  RMat to_real(double tol = 1e-12) const;

  double norm() const;

 private:
  ScalarKind kind_;
  RMat r_;
  CMat c_;
};

nlohmann::json to_json(const DenseMatrix& m);
DenseMatrix matrix_from_json(const nlohmann::json& j);

// J_n = [[0, I_n], [-I_n, 0]] (size 2n).
RMat symplectic_form(int n);
// I_{p,q} = diag(I_p, -I_q).
RMat ipq(int p, int q);
// K_{p,q} = I_{p,q} (+) I_{p,q}.
RMat kpq(int p, int q);
// Block swap of h (+) h for blocks of size n.
RMat block_swap(int n);

// Residual norms (Frobenius) behind the predicates.
double unitarity_residual(const CMat& m);
double orthogonality_residual(const RMat& m);
double symplectic_residual(const CMat& m);
double skew_residual(const CMat& m);
double hermitian_residual(const CMat& m);

// Tolerances are scaled by max(1, sqrt(rows)).
bool is_unitary(const DenseMatrix& m, double tol = 1e-10);
bool is_orthogonal(const DenseMatrix& m, double tol = 1e-10);
bool is_symplectic_unitary(const DenseMatrix& m, double tol = 1e-10);
bool is_skew_symmetric(const DenseMatrix& m, double tol = 1e-10);
bool is_hermitian(const DenseMatrix& m, double tol = 1e-10);

enum class CsgKind { UDiag, SpDiag, CS, Schur };

// How a base element X is repeated on a doubled space.
enum class Doubling { None, Dagger, Repeat };

const char* csg_kind_name(CsgKind k);

// Element of one of the four abelian subgroups. `dim` is the base dimension:
// UDiag: n, SpDiag: 2n, CS: p+q, Schur: n. Doubling materializes X (+) X^dag
// (Dagger) or X (+) X (Repeat) of twice that size.
struct CsgElement {
  CsgKind kind = CsgKind::UDiag;
  std::vector<double> angles;
  int dim = 0;
  int p = 0;
  int q = 0;
  Doubling doubling = Doubling::None;

  static CsgElement udiag(std::vector<double> angles);
  static CsgElement spdiag(std::vector<double> angles);
  static CsgElement cs(int p, int q, std::vector<double> angles);
  static CsgElement schur(int n, std::vector<double> angles);

  int size() const { return doubling == Doubling::None ? dim : 2 * dim; }
  bool is_real() const { return kind == CsgKind::CS || kind == CsgKind::Schur; }
  // Number of free angles (the rank contribution).
  int rank() const { return static_cast<int>(angles.size()); }

  DenseMatrix materialize() const;
  CMat materialize_complex() const;
  // Only for CS and Schur kinds.
  RMat materialize_real() const;
};

nlohmann::json to_json(const CsgElement& a);
CsgElement csg_from_json(const nlohmann::json& j);

// Largest deviation of m from the structural pattern of a (entries outside the
// pattern and mismatched pattern entries).
double csg_pattern_residual(const CsgElement& a, const CMat& m);

struct EvdResult {
  CMat V;
  std::vector<double> phases;
  // Contiguous [begin, end) index ranges of eigenvalues within the degeneracy
  // tolerance.
  std::vector<std::pair<int, int>> clusters;
  // Refinement of `clusters` with phase spread at most `fine_tol`.
  std::vector<std::pair<int, int>> fine_clusters;
};

// M = V diag(exp(i phases)) V^dag, phases in (-pi, pi], sorted ascending with
// degenerate groups contiguous. A group straddling the +-pi cut is moved to
// the end. Each group is re-diagonalized through the Hermitian part of the
// restricted matrix so that near-degenerate eigenvalues are resolved.
EvdResult evd_unitary(const CMat& m, double degeneracy_tol = 1e-8,
                      double fine_tol = 1e-11);
std::pair<DenseMatrix, std::vector<double>> evd_unitary(const DenseMatrix& m);

struct SchurResult {
  RMat Q;
  CsgElement mu2;
};

// O = Q mu2 Q^T with Q in SO(n) and mu2 of Schur kind.
SchurResult real_schur(const RMat& o);

template <typename Mat>
struct CsdFactors {
  // U = (L0 (+) L1) F (R0 (+) R1), L0/R0 of size p, L1/R1 of size q.
  Mat L0, L1, R0, R1;
  CsgElement F;
  Mat K1() const;
  Mat K2() const;
};

using RealCsd = CsdFactors<RMat>;
using ComplexCsd = CsdFactors<CMat>;

RealCsd csd(const RMat& u, int p, int q);
ComplexCsd csd(const CMat& u, int p, int q);

struct CsdResult {
  DenseMatrix K1;
  CsgElement F;
  DenseMatrix K2;
};
CsdResult csd(const DenseMatrix& u, int p, int q);

// exp(x t) for real skew-symmetric or complex skew-Hermitian x.
RMat expm_skew(const RMat& x, double t);
CMat expm_skew(const CMat& x, double t);
DenseMatrix expm_skew(const DenseMatrix& x, double t);

// Principal square root in angle space. `flip_branch` adds pi to the first
// halved angle, the single branch change used to meet determinant conditions.
CsgElement csg_sqrt(const CsgElement& a2, bool flip_branch = false);

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Unitary polar factor m (m^dag m)^{-1/2} via SVD.
CMat nearest_unitary(const CMat& m);
RMat nearest_orthogonal(const RMat& m);

// Direct sum of two square matrices.
template <typename Mat>
Mat direct_sum(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace cartan
