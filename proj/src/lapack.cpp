#include "lapack.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <string>

#include "cartan/error.hpp"

namespace cartan::lapack {

namespace {

void check(lapack_int info, const char* routine) {
  if (info != 0) {
    throw Error(ErrorCode::DegenerateBasisFailure,
                std::string(routine) + " failed with info=" + std::to_string(info));
  }
}

}  // namespace

RealSchur dgees(const RMat& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RealSchur out;
  out.T = a;
  out.Z.resize(n, n);
  if (n == 0) return out;
  RVec wr(n), wi(n);
  lapack_int sdim = 0;
  check(LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, out.T.data(), n, &sdim,
                      wr.data(), wi.data(), out.Z.data(), n),
        "dgees");
  return out;
}

ComplexSchur zgees(const CMat& a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  ComplexSchur out;
  out.T = a;
  out.Z.resize(n, n);
  if (n == 0) return out;
  CVec w(n);
  lapack_int sdim = 0;
  check(LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, out.T.data(), n, &sdim,
                      w.data(), out.Z.data(), n),
        "zgees");
  return out;
}

void dgesdd(const RMat& a, RMat& u, RVec& s, RMat& vt) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  RMat work = a;
  u.resize(m, m);
  vt.resize(n, n);
  s.resize(std::min(m, n));
  if (m == 0 || n == 0) return;
  check(LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'A', m, n, work.data(), m, s.data(), u.data(), m,
                       vt.data(), n),
        "dgesdd");
}

void zgesdd(const CMat& a, CMat& u, RVec& s, CMat& vh) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  CMat work = a;
  u.resize(m, m);
  vh.resize(n, n);
  s.resize(std::min(m, n));
  if (m == 0 || n == 0) return;
  check(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', m, n, work.data(), m, s.data(), u.data(), m,
                       vh.data(), n),
        "zgesdd");
}

void dsyevd(const RMat& a, RMat& v, RVec& w) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  v = a;
  w.resize(n);
  if (n == 0) return;
  check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, v.data(), n, w.data()), "dsyevd");
}

void zheevd(const CMat& a, CMat& v, RVec& w) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  v = a;
  w.resize(n);
  if (n == 0) return;
  check(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, v.data(), n, w.data()), "zheevd");
}

}  // namespace cartan::lapack
