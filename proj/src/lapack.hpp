#pragma once

// Thin LAPACKE wrappers over Eigen column-major storage.

#include "cartan/densela.hpp"

namespace cartan::lapack {

struct RealSchur {
  RMat Z;
  RMat T;
};
struct ComplexSchur {
  CMat Z;
  CMat T;
};

// A = Z T Z^T, T quasi upper triangular.
RealSchur dgees(const RMat& a);
// A = Z T Z^dag, T upper triangular.
ComplexSchur zgees(const CMat& a);

// A = U diag(s) Vt, singular values descending.
void dgesdd(const RMat& a, RMat& u, RVec& s, RMat& vt);
void zgesdd(const CMat& a, CMat& u, RVec& s, CMat& vh);

// Symmetric / Hermitian EVD, eigenvalues ascending.
void dsyevd(const RMat& a, RMat& v, RVec& w);
void zheevd(const CMat& a, CMat& v, RVec& w);

}  // namespace cartan::lapack
