#include "cartan/kak.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cartan/error.hpp"
#include "lapack.hpp"

namespace cartan {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Eigenvalues with |sin(phase)| below this are treated as real (+1 or -1).
constexpr double kRealPhaseTol = 1e-10;
// CSD angles closer than this (chained) form one degenerate group.
constexpr double kAngleGroupTol = 1e-9;

Error degenerate(const std::string& what, int begin, int end, double phase) {
  std::ostringstream os;
  os << what << " (cluster [" << begin << "," << end << ") at phase " << phase << ")";
  return Error(ErrorCode::DegenerateBasisFailure, os.str());
}

double circular_mean(const std::vector<double>& ph, int b, int e) {
  cplx s(0.0, 0.0);
  for (int i = b; i < e; ++i) s += std::polar(1.0, ph[i]);
  return std::arg(s);
}

CMat rows_cols(const CMat& m, const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  CMat out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = m(perm[i], perm[j]);
  return out;
}

CMat unpermute(const CMat& m, const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  CMat out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(perm[i], perm[j]) = m(i, j);
  return out;
}

// Leading `keep` left singular vectors of m; throws when the span collapses.
template <typename Mat>
Mat leading_span(const Mat& m, int keep, int b, int e, double phase) {
  if (keep == 0) return Mat(m.rows(), 0);
  Mat u, vh;
  RVec s;
  if constexpr (std::is_same_v<Mat, RMat>) lapack::dgesdd(m, u, s, vh);
  else lapack::zgesdd(m, u, s, vh);
  if (s.size() < keep || s(keep - 1) < 0.5) throw degenerate("eigenspace deflation lost rank", b, e, phase);
  return u.leftCols(keep);
}

// First row whose weight is within a small margin of the largest, so that
// symmetric ties (e.g. J-partner rows) do not depend on rounding.
template <typename Mat>
Eigen::Index heaviest_row(const Mat& m) {
  const RVec w = m.rowwise().squaredNorm();
  const double top = w.maxCoeff();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > top - 1e-8) return i;
  }
  return 0;
}

// Splits the span of the orthonormal columns of `span` into orthonormal pairs
// {v, partner(v)} and returns the chosen v. `partner` is an antiunitary (or
// orthogonal) map preserving the span with partner(v) orthogonal to v.
template <typename Mat, typename F>
Mat pair_basis(const Mat& span, F partner, int b, int e, double phase) {
  const int n = static_cast<int>(span.rows());
  const int m = static_cast<int>(span.cols());
  if (m % 2) throw degenerate("odd-dimensional eigenspace cannot be paired", b, e, phase);
  Mat rem = span;
  Mat chosen(n, m / 2);
  for (int k = 0; k < m / 2; ++k) {
    // Projection of the standard vector with the largest weight in the
    // remaining span: makes the choice independent of the eigensolver's basis.
    const Eigen::Index best = heaviest_row(rem);
    auto v = (rem * rem.row(best).adjoint()).eval();
    v /= v.norm();
    const auto w = partner(v);
    auto wp = (rem * (rem.adjoint() * w)).eval();
    const double nw = wp.norm();
    if (nw < 0.5) throw degenerate("partner vector leaves the eigenspace", b, e, phase);
    wp /= nw;
    chosen.col(k) = v;
    Mat pr = rem - v * (v.adjoint() * rem);
    pr -= wp * (wp.adjoint() * pr);
    rem = leading_span<Mat>(pr, m - 2 * (k + 1), b, e, phase);
  }
  return chosen;
}

// Real orthonormal basis of a conjugation-closed eigenspace: a vector with
// v^* proportional to v is made real by a phase; otherwise v is rotated by
// alpha = -atan(b/a)/2 and recombined with v^* into two real vectors.
RMat realify(const CMat& span, int b, int e, double phase) {
  const int n = static_cast<int>(span.rows());
  const int m = static_cast<int>(span.cols());
  RMat out(n, m);
  int found = 0;
  CMat rem = span;
  while (found < m) {
    const Eigen::Index best = heaviest_row(rem);
    CVec v = rem * rem.row(best).adjoint();
    v /= v.norm();
    const cplx g = (v.transpose() * v)(0, 0);
    std::vector<RVec> fresh;
    if (std::abs(g) > 1.0 - 1e-6) {
      Eigen::Index k = 0;
      v.cwiseAbs().maxCoeff(&k);
      fresh.push_back((v * (std::conj(v(k)) / std::abs(v(k)))).real());
    } else {
      const double a = g.real();
      const double bb = g.imag();
      double alpha = 0.0;
      if (std::abs(a) < 1e-12 && std::abs(bb) < 1e-12) alpha = 0.0;
      else if (a == 0.0) alpha = kPi / 4;
      else alpha = -0.5 * std::atan(bb / a);
      const CVec vt = v * std::polar(1.0, alpha);
      fresh.push_back(vt.real());
      fresh.push_back(vt.imag());
    }
    // Of Re and Im the smaller may be ill-conditioned; it is then left for a
    // later step, since the deflated span stays closed under conjugation.
    int added = 0;
    for (RVec& r : fresh) {
      const double nr = r.norm();
      if (nr < 0.25 || found >= m) continue;
      out.col(found++) = r / nr;
      ++added;
    }
    if (added == 0) throw degenerate("realification produced no independent vector", b, e, phase);
    if (found < m) {
      CMat pr = rem;
      for (int j = found - added; j < found; ++j) {
        const CVec c = out.col(j).cast<cplx>();
        pr -= c * (c.adjoint() * pr);
      }
      rem = leading_span<CMat>(pr, m - found, b, e, phase);
    }
  }
  for (int j = 0; j < m; ++j) {
    Eigen::Index k = 0;
    out.col(j).cwiseAbs().maxCoeff(&k);
    if (out(k, j) < 0) out.col(j) *= -1.0;
  }
  return out;
}

// Fine clusters classified by their eigenvalue: complex with positive
// imaginary part, complex with negative imaginary part, or real (+1 / -1,
// merged over clusters).
struct ClusterSplit {
  std::vector<std::pair<int, int>> upper;
  std::vector<int> plus;
  std::vector<int> minus;
};

ClusterSplit split_clusters(const EvdResult& evd) {
  ClusterSplit s;
  for (const auto& [b, e] : evd.fine_clusters) {
    const double mu = circular_mean(evd.phases, b, e);
    if (std::abs(std::sin(mu)) <= kRealPhaseTol) {
      for (int i = b; i < e; ++i) (std::cos(mu) > 0 ? s.plus : s.minus).push_back(i);
    } else if (std::sin(mu) > 0) {
      s.upper.emplace_back(b, e);
    }
  }
  return s;
}

template <typename Mat>
Mat gather_cols(const Mat& v, const std::vector<int>& idx) {
  Mat out(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = v.col(idx[j]);
  return out;
}

double scaled(double tol, const CMat& g) {
  return tol * std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, g.rows()))) * std::max(1.0, g.norm());
}

int type_size_param(const InvolutionType& t, int rows) {
  switch (t.tag) {
    case TypeTag::AI: return rows;
    case TypeTag::A:
    case TypeTag::AII:
    case TypeTag::BD:
    case TypeTag::DIII:
    case TypeTag::CI: return rows / 2;
    case TypeTag::C: return rows / 4;
    default: return 0;
  }
}

int expected_rows(const InvolutionType& t, int rows) {
  switch (t.tag) {
    case TypeTag::AI: return rows;
    case TypeTag::A:
    case TypeTag::AII:
    case TypeTag::BD:
    case TypeTag::DIII:
    case TypeTag::CI: return rows % 2 ? -1 : rows;
    case TypeTag::C: return rows % 4 ? -1 : rows;
    case TypeTag::AIII:
    case TypeTag::BDI: return t.p + t.q;
    case TypeTag::CII: return 2 * (t.p + t.q);
    case TypeTag::Trivial: return rows;
  }
  return -1;
}

double block_det_residual(const RMat& m) { return m.rows() ? std::abs(m.determinant() - 1.0) : 0.0; }

// Picks among the n-th roots of det(U) the one making arg tr(U/c) smallest,
// so that U and e^{i phi} U share the same normalized matrix.
cplx det_root(const CMat& u, int n) {
  const cplx d = u.determinant();
  const cplx base = std::polar(1.0, std::arg(d) / n);
  const cplx tr = (u / base).trace();
  if (std::abs(tr) < 1e-8) return base;
  const double step = 2.0 * kPi / n;
  const double k = std::round(std::arg(tr) / step);
  return base * std::polar(1.0, k * step);
}

// ---------------------------------------------------------------------------

KakFactors kak_a(const CMat& g) {
  const int n = static_cast<int>(g.rows() / 2);
  const CMat u = g.topLeftCorner(n, n);
  const CMat up = g.bottomRightCorner(n, n);
  const CMat delta = u * up.adjoint();
  const EvdResult evd = evd_unitary(delta);
  CsgElement a = csg_sqrt(CsgElement::udiag(evd.phases));
  const CMat d = a.materialize_complex();
  const CMat u2 = d * evd.V.adjoint() * up;
  a.doubling = Doubling::Dagger;
  KakFactors f;
  f.k1 = DenseMatrix(direct_sum<CMat>(evd.V, evd.V));
  f.a = a;
  f.k2 = DenseMatrix(direct_sum<CMat>(u2, u2));
  f.delta = DenseMatrix(direct_sum<CMat>(delta, delta.adjoint()));
  return f;
}

KakFactors kak_ai(const CMat& g) {
  const int n = static_cast<int>(g.rows());
  const cplx c = det_root(g, n);
  const CMat ut = g / c;
  const CMat delta = ut * ut.transpose();
  const EvdResult evd = evd_unitary(delta);
  RMat o1(n, n);
  int col = 0;
  for (const auto& [b, e] : evd.fine_clusters) {
    const RMat r = realify(evd.V.middleCols(b, e - b), b, e, evd.phases[b]);
    o1.middleCols(col, r.cols()) = r;
    col += static_cast<int>(r.cols());
  }
  o1 = nearest_orthogonal(o1);
  if (o1.determinant() < 0) o1.col(0) *= -1.0;
  const CMat oc = o1.cast<cplx>();
  const CVec ray = (oc.transpose() * delta * oc).diagonal();
  std::vector<double> ph(n);
  for (int j = 0; j < n; ++j) ph[j] = std::arg(ray(j));
  CsgElement a = csg_sqrt(CsgElement::udiag(ph));
  const double s = std::accumulate(a.angles.begin(), a.angles.end(), 0.0);
  if (std::abs(wrap_angle(s)) > kPi / 2) a = csg_sqrt(CsgElement::udiag(ph), true);
  const CMat o2c = a.materialize_complex().adjoint() * oc.transpose() * ut;
  const double psi = std::arg(c);
  for (double& x : a.angles) x = wrap_angle(x + psi);
  KakFactors f;
  f.k1 = DenseMatrix(o1);
  f.a = a;
  f.k2 = DenseMatrix(RMat(o2c.real()));
  f.delta = DenseMatrix(delta);
  return f;
}

KakFactors kak_aii(const CMat& g) {
  const int n = static_cast<int>(g.rows() / 2);
  const CMat j = symplectic_form(n).cast<cplx>();
  const cplx c = det_root(g, 2 * n);
  const CMat ut = g / c;
  const CMat delta = ut * j * ut.transpose() * j.transpose();
  const EvdResult evd = evd_unitary(delta);
  auto partner = [&](const CVec& v) { return CVec(j * v.conjugate()); };
  CMat b(2 * n, n);
  int col = 0;
  for (const auto& [cb, ce] : evd.fine_clusters) {
    const CMat chosen = pair_basis<CMat>(evd.V.middleCols(cb, ce - cb), partner, cb, ce, evd.phases[cb]);
    b.middleCols(col, chosen.cols()) = chosen;
    col += static_cast<int>(chosen.cols());
  }
  CMat s1(2 * n, 2 * n);
  s1 << j * b.conjugate(), b;
  s1 = nearest_unitary(s1);
  const CVec ray = (s1.rightCols(n).adjoint() * delta * s1.rightCols(n)).diagonal();
  std::vector<double> ph(n);
  for (int k = 0; k < n; ++k) ph[k] = std::arg(ray(k));
  CsgElement a = csg_sqrt(CsgElement::udiag(ph));
  a.doubling = Doubling::Repeat;
  const CMat s2 = a.materialize_complex().adjoint() * s1.adjoint() * ut;
  const double psi = std::arg(c);
  for (double& x : a.angles) x = wrap_angle(x + psi);
  KakFactors f;
  f.k1 = DenseMatrix(s1);
  f.a = a;
  f.k2 = DenseMatrix(s2);
  f.delta = DenseMatrix(delta);
  return f;
}

KakFactors kak_aiii(const CMat& g, int p, int q) {
  const auto d = csd(g, p, q);
  const RMat i = ipq(p, q);
  KakFactors f;
  f.k1 = DenseMatrix(d.K1());
  f.a = d.F;
  f.k2 = DenseMatrix(d.K2());
  f.delta = DenseMatrix(CMat(g * i * g.adjoint() * i));
  return f;
}

KakFactors kak_bd(const RMat& g) {
  const int n = static_cast<int>(g.rows() / 2);
  const RMat o = g.topLeftCorner(n, n);
  const RMat op = g.bottomRightCorner(n, n);
  const RMat delta = o * op.transpose();
  const SchurResult sch = real_schur(delta);
  CsgElement a = csg_sqrt(sch.mu2);
  const RMat mu = a.materialize_real();
  const RMat q2 = mu.transpose() * sch.Q.transpose() * o;
  a.doubling = Doubling::Dagger;
  KakFactors f;
  f.k1 = DenseMatrix(direct_sum<RMat>(sch.Q, sch.Q));
  f.a = a;
  f.k2 = DenseMatrix(direct_sum<RMat>(q2, q2));
  f.delta = DenseMatrix(direct_sum<RMat>(delta, delta.transpose()));
  return f;
}

KakFactors kak_bdi(const RMat& g, int p, int q) {
  auto d = csd(g, p, q);
  const int n = p + q;
  const int r = std::min(p, q);
  if (r > 0) {
    const double d1p = d.L0.determinant() < 0 ? -1.0 : 1.0;
    const double d1q = d.L1.determinant() < 0 ? -1.0 : 1.0;
    const double d2p = d.R0.determinant() < 0 ? -1.0 : 1.0;
    const double d2q = d.R1.determinant() < 0 ? -1.0 : 1.0;
    // Local index in the q block of the CS partner of index 0.
    const int partner = n - r - p;
    d.L0.col(0) *= d1p;
    d.L1.col(partner) *= d1q;
    d.R0.row(0) *= d2p;
    d.R1.row(partner) *= d2q;
    double& t = d.F.angles[0];
    t = wrap_angle(0.5 * (1.0 - d1p * d2p) * kPi + d1p * d1q * t);
  }
  const RMat i = ipq(p, q);
  KakFactors f;
  f.k1 = DenseMatrix(d.K1());
  f.a = d.F;
  f.k2 = DenseMatrix(d.K2());
  f.delta = DenseMatrix(RMat(g * i * g.transpose() * i));
  return f;
}

KakFactors kak_diii(const RMat& g) {
  const int n = static_cast<int>(g.rows() / 2);
  const RMat j = symplectic_form(n);
  const RMat delta = g * j * g.transpose() * j.transpose();
  const EvdResult evd = evd_unitary(delta.cast<cplx>());
  const ClusterSplit cs = split_clusters(evd);
  const CMat jc = j.cast<cplx>();
  auto partner_c = [&](const CVec& v) { return CVec(jc * v.conjugate()); };
  auto partner_r = [&](const RVec& v) { return RVec(j * v); };

  RMat x(2 * n, n);
  int col = 0;
  for (const auto& [b, e] : cs.upper) {
    const CMat chosen = pair_basis<CMat>(evd.V.middleCols(b, e - b), partner_c, b, e, evd.phases[b]);
    for (int k = 0; k < chosen.cols(); ++k) {
      if (col + 2 > n) throw degenerate("too many complex eigenpairs", b, e, evd.phases[b]);
      x.col(col++) = std::sqrt(2.0) * chosen.col(k).real();
      x.col(col++) = std::sqrt(2.0) * chosen.col(k).imag();
    }
  }
  auto real_group = [&](const std::vector<int>& idx, double phase) {
    if (idx.empty()) return RMat(2 * n, 0);
    const RMat r = realify(gather_cols<CMat>(evd.V, idx), idx.front(), idx.back() + 1, phase);
    return pair_basis<RMat>(r, partner_r, idx.front(), idx.back() + 1, phase);
  };
  const RMat xm = real_group(cs.minus, kPi);
  const RMat xp = real_group(cs.plus, 0.0);
  if (xm.cols() % 2) {
    throw Error(ErrorCode::DegenerateBasisFailure,
                "odd number f = " + std::to_string(xm.cols()) + " of lambda = -1 eigenblocks");
  }
  if (col + xm.cols() + xp.cols() != n) throw Error(ErrorCode::DegenerateBasisFailure, "eigenbasis count mismatch");
  x.middleCols(col, xm.cols()) = xm;
  col += static_cast<int>(xm.cols());
  x.middleCols(col, xp.cols()) = xp;

  RMat u1(2 * n, 2 * n);
  u1 << x, -j * x;
  u1 = nearest_orthogonal(u1);
  const RMat xt = u1.leftCols(n).transpose() * delta * u1.leftCols(n);
  std::vector<double> ang(n / 2);
  for (int k = 0; k < n / 2; ++k)
    ang[k] = std::atan2(0.5 * (xt(2 * k, 2 * k + 1) - xt(2 * k + 1, 2 * k)),
                        0.5 * (xt(2 * k, 2 * k) + xt(2 * k + 1, 2 * k + 1)));
  CsgElement a = csg_sqrt(CsgElement::schur(n, ang));
  a.doubling = Doubling::Dagger;
  const RMat am = a.materialize_real();
  const RMat u2 = am.transpose() * u1.transpose() * g;
  KakFactors f;
  f.k1 = DenseMatrix(u1);
  f.a = a;
  f.k2 = DenseMatrix(u2);
  f.delta = DenseMatrix(delta);
  return f;
}

KakFactors kak_c(const CMat& g) {
  const int n = static_cast<int>(g.rows() / 4);
  const CMat s = g.topLeftCorner(2 * n, 2 * n);
  const CMat sp = g.bottomRightCorner(2 * n, 2 * n);
  const CMat j = symplectic_form(n).cast<cplx>();
  const CMat delta = s * sp.adjoint();
  const EvdResult evd = evd_unitary(delta);
  const ClusterSplit cs = split_clusters(evd);
  auto partner = [&](const CVec& v) { return CVec(j * v.conjugate()); };
  CMat b(2 * n, n);
  int col = 0;
  auto put = [&](const CMat& m) {
    if (col + m.cols() > n) throw Error(ErrorCode::DegenerateBasisFailure, "eigenbasis count mismatch");
    b.middleCols(col, m.cols()) = m;
    col += static_cast<int>(m.cols());
  };
  for (const auto& [cb, ce] : cs.upper) put(evd.V.middleCols(cb, ce - cb));
  for (const auto* idx : {&cs.minus, &cs.plus}) {
    if (idx->empty()) continue;
    put(pair_basis<CMat>(gather_cols<CMat>(evd.V, *idx), partner, idx->front(), idx->back() + 1,
                         evd.phases[idx->front()]));
  }
  if (col != n) throw Error(ErrorCode::DegenerateBasisFailure, "eigenbasis count mismatch");
  CMat s1(2 * n, 2 * n);
  s1 << j * b.conjugate(), b;
  s1 = nearest_unitary(s1);
  const CVec ray = (s1.rightCols(n).adjoint() * delta * s1.rightCols(n)).diagonal();
  std::vector<double> alpha(n);
  for (int k = 0; k < n; ++k) alpha[k] = -std::arg(ray(k));
  CsgElement a = csg_sqrt(CsgElement::spdiag(alpha));
  const CMat dm = a.materialize_complex();
  const CMat s2 = dm * s1.adjoint() * sp;
  a.doubling = Doubling::Dagger;
  KakFactors f;
  f.k1 = DenseMatrix(direct_sum<CMat>(s1, s1));
  f.a = a;
  f.k2 = DenseMatrix(direct_sum<CMat>(s2, s2));
  f.delta = DenseMatrix(direct_sum<CMat>(delta, delta.adjoint()));
  return f;
}

KakFactors kak_ci(const CMat& g) {
  const int n = static_cast<int>(g.rows() / 2);
  const RMat j = symplectic_form(n);
  const CMat delta = g * g.transpose();
  const EvdResult evd = evd_unitary(delta);
  const ClusterSplit cs = split_clusters(evd);
  auto partner_r = [&](const RVec& v) { return RVec(j * v); };
  RMat x(2 * n, n);
  int col = 0;
  auto put = [&](const RMat& m) {
    if (col + m.cols() > n) throw Error(ErrorCode::DegenerateBasisFailure, "eigenbasis count mismatch");
    x.middleCols(col, m.cols()) = m;
    col += static_cast<int>(m.cols());
  };
  for (const auto& [b, e] : cs.upper) put(realify(evd.V.middleCols(b, e - b), b, e, evd.phases[b]));
  for (const auto* idx : {&cs.minus, &cs.plus}) {
    if (idx->empty()) continue;
    const double ph = evd.phases[idx->front()];
    const RMat r = realify(gather_cols<CMat>(evd.V, *idx), idx->front(), idx->back() + 1, ph);
    put(pair_basis<RMat>(r, partner_r, idx->front(), idx->back() + 1, ph));
  }
  if (col != n) throw Error(ErrorCode::DegenerateBasisFailure, "eigenbasis count mismatch");
  RMat u1(2 * n, 2 * n);
  u1 << x, -j * x;
  u1 = nearest_orthogonal(u1);
  const CMat xc = u1.leftCols(n).cast<cplx>();
  const CVec ray = (xc.transpose() * delta * xc).diagonal();
  std::vector<double> ph(n);
  for (int k = 0; k < n; ++k) ph[k] = std::arg(ray(k));
  const CsgElement a = csg_sqrt(CsgElement::spdiag(ph));
  const CMat u2 = a.materialize_complex().adjoint() * u1.transpose().cast<cplx>() * g;
  KakFactors f;
  f.k1 = DenseMatrix(u1);
  f.a = a;
  f.k2 = DenseMatrix(RMat(u2.real()));
  f.delta = DenseMatrix(delta);
  return f;
}

// CII: conjugate into the basis (P1, P2, Q1, Q2) where K_{p,q} = I_{2p,2q}
// and J = J_p (+) J_q, take the complex CSD with split (2p, 2q), rotate each
// degenerate angle group into pairs (J_p v^*, v), and reorder so that pair k
// lands on rows (k, p+k) of the P block and on the CS partners of those rows
// in the Q block. Identity directions of the larger block are paired the same
// way and fill the remaining positions.
KakFactors kak_cii(const CMat& g, int p, int q) {
  const int n = p + q;
  const CMat kk = kpq(p, q).cast<cplx>();
  KakFactors f;
  f.delta = DenseMatrix(CMat(g * kk * g.adjoint() * kk));
  if (p == 0 || q == 0) {
    f.k1 = DenseMatrix(g);
    f.a = CsgElement::cs(p, q, {});
    f.a.doubling = Doubling::Repeat;
    f.k2 = DenseMatrix::identity(2 * n);
    return f;
  }
  const int r = std::min(p, q);
  std::vector<int> perm(2 * n);
  for (int k = 0; k < p; ++k) {
    perm[k] = k;
    perm[p + k] = n + k;
  }
  for (int k = 0; k < q; ++k) {
    perm[2 * p + k] = p + k;
    perm[2 * p + q + k] = n + p + k;
  }
  const CMat gp = rows_cols(g, perm);
  auto d = csd(gp, 2 * p, 2 * q);
  const CMat jp = symplectic_form(p).cast<cplx>();
  const CMat jq = symplectic_form(q).cast<cplx>();
  const int nn = 2 * n;
  const int rr = 2 * r;
  auto l1_partner = [&](int i) { return nn - rr + i - 2 * p; };

  struct Pair {
    CVec pa, pb;  // P block: J v^*, v
    CVec qa, qb;  // Q block partners
    double angle;
  };
  std::vector<Pair> cs_pairs;
  auto split_pairs = [](const CMat& span, const CMat& jj, int b, double ph) {
    auto partner = [&](const CVec& v) { return CVec(jj * v.conjugate()); };
    const CMat chosen = pair_basis<CMat>(span, partner, b, b + static_cast<int>(span.cols()), ph);
    std::vector<std::pair<CVec, CVec>> out;
    for (int k = 0; k < chosen.cols(); ++k) out.emplace_back(jj * chosen.col(k).conjugate(), chosen.col(k));
    return out;
  };
  // Zero angles act as the identity on both blocks and merge with the
  // identity directions of the larger block.
  std::vector<int> zero_cols;
  const std::vector<double>& th = d.F.angles;
  int gb = 0;
  while (gb < rr) {
    int ge = gb + 1;
    while (ge < rr && std::abs(th[ge] - th[ge - 1]) <= kAngleGroupTol) ++ge;
    const int len = ge - gb;
    double mean = 0.0;
    for (int i = gb; i < ge; ++i) mean += th[i];
    mean /= len;
    if (std::abs(mean) <= kAngleGroupTol) {
      for (int i = gb; i < ge; ++i) zero_cols.push_back(i);
      gb = ge;
      continue;
    }
    const CMat vc = d.L0.middleCols(gb, len);
    const auto ps = split_pairs(vc, jp, gb, mean);
    CMat y(2 * p, len);
    for (int k = 0; k < len / 2; ++k) {
      y.col(2 * k) = ps[k].first;
      y.col(2 * k + 1) = ps[k].second;
    }
    const CMat w = nearest_unitary(vc.adjoint() * y);
    CMat l1p(2 * q, len);
    for (int i = 0; i < len; ++i) l1p.col(i) = d.L1.col(l1_partner(gb + i));
    l1p = l1p * w;
    for (int k = 0; k < len / 2; ++k) {
      cs_pairs.push_back({y.col(2 * k), y.col(2 * k + 1), l1p.col(2 * k), l1p.col(2 * k + 1), mean});
    }
    gb = ge;
  }

  const int zlen = static_cast<int>(zero_cols.size());
  const int extra = 2 * std::abs(p - q);
  CMat sp(2 * p, zlen + (p > q ? extra : 0));
  CMat sq(2 * q, zlen + (q > p ? extra : 0));
  for (int i = 0; i < zlen; ++i) {
    sp.col(i) = d.L0.col(zero_cols[i]);
    sq.col(i) = d.L1.col(l1_partner(zero_cols[i]));
  }
  if (p > q) sp.rightCols(extra) = d.L0.middleCols(2 * q, extra);
  if (q > p) sq.rightCols(extra) = d.L1.leftCols(extra);
  const auto zp = sp.cols() ? split_pairs(sp, jp, 0, 0.0) : std::vector<std::pair<CVec, CVec>>{};
  const auto zq = sq.cols() ? split_pairs(sq, jq, 0, 0.0) : std::vector<std::pair<CVec, CVec>>{};
  for (int k = 0; k < zlen / 2; ++k) cs_pairs.push_back({zp[k].first, zp[k].second, zq[k].first, zq[k].second, 0.0});
  if (static_cast<int>(cs_pairs.size()) != r) throw Error(ErrorCode::DegenerateBasisFailure, "CII angle pairing failed");

  CMat kp(2 * p, 2 * p);
  CMat kq(2 * q, 2 * q);
  std::vector<double> angles(r);
  for (int k = 0; k < r; ++k) {
    const Pair& pr = cs_pairs[k];
    const int qloc = p >= q ? k : q - p + k;
    kp.col(k) = pr.pa;
    kp.col(p + k) = pr.pb;
    kq.col(qloc) = pr.qa;
    kq.col(q + qloc) = pr.qb;
    angles[k] = pr.angle;
  }
  const auto& ids = p > q ? zp : zq;
  for (int l = 0; l < std::abs(p - q); ++l) {
    const auto& [ca, cb] = ids[zlen / 2 + l];
    if (p > q) {
      kp.col(r + l) = ca;
      kp.col(p + r + l) = cb;
    } else {
      kq.col(l) = ca;
      kq.col(q + l) = cb;
    }
  }
  CMat k1p = direct_sum<CMat>(kp, kq);
  const CMat jj = direct_sum<CMat>(jp, jq);
  k1p = nearest_unitary(0.5 * (k1p + jj * k1p.conjugate() * jj.transpose()));
  const CMat k1 = unpermute(k1p, perm);
  CsgElement a = CsgElement::cs(p, q, angles);
  a.doubling = Doubling::Repeat;
  const CMat k2 = a.materialize_complex().adjoint() * k1.adjoint() * g;
  f.k1 = DenseMatrix(k1);
  f.a = a;
  f.k2 = DenseMatrix(k2);
  return f;
}

DenseMatrix clean(const CMat& m) {
  if (m.imag().norm() <= 1e-14 * std::max(1.0, m.norm())) return DenseMatrix(RMat(m.real()));
  return DenseMatrix(m);
}

}  // namespace

CMat KakFactors::middle() const {
  const CMat a_m = a.materialize_complex();
  if (basis.rows() == 0) return a_m;
  const CMat b = basis.to_complex();
  return b * a_m * b.adjoint();
}

CMat KakFactors::reconstruct() const { return global_phase * k1.to_complex() * middle() * k2.to_complex(); }

double group_residual(const CMat& g, const InvolutionType& type) {
  const int rows = static_cast<int>(g.rows());
  const double inf = std::numeric_limits<double>::infinity();
  if (g.rows() != g.cols() || expected_rows(type, rows) != rows || rows == 0) return inf;
  double r = unitarity_residual(g);
  auto off_blocks = [&](int h) { return g.topRightCorner(h, h).norm() + g.bottomLeftCorner(h, h).norm(); };
  switch (type.tag) {
    case TypeTag::A: r += off_blocks(rows / 2); break;
    case TypeTag::AI:
    case TypeTag::AII:
    case TypeTag::AIII:
    case TypeTag::Trivial: break;
    case TypeTag::BD: {
      const int h = rows / 2;
      const RMat re = g.real();
      r += off_blocks(h) + g.imag().norm() + block_det_residual(re.topLeftCorner(h, h)) +
           block_det_residual(re.bottomRightCorner(h, h));
      break;
    }
    case TypeTag::BDI:
    case TypeTag::DIII:
      r += g.imag().norm() + block_det_residual(g.real());
      break;
    case TypeTag::C: {
      const int h = rows / 2;
      r += off_blocks(h) + symplectic_residual(g.topLeftCorner(h, h)) +
           symplectic_residual(g.bottomRightCorner(h, h));
      break;
    }
    case TypeTag::CI:
    case TypeTag::CII:
      r += symplectic_residual(g);
      break;
  }
  return r;
}

double k_membership_residual(const CMat& k, const InvolutionType& type) {
  const double gr = group_residual(k, type);
  if (!std::isfinite(gr)) return gr;
  if (type.tag == TypeTag::Trivial) return gr;
  const Involution theta = canonical_involution(type, type_size_param(type, static_cast<int>(k.rows())));
  return gr + (apply_involution(theta, k) - k).norm();
}

KakFactors kak_decompose(const DenseMatrix& G, const InvolutionType& type, const KakOptions& opt) {
  const CMat g = G.to_complex();
  const double gr = group_residual(g, type);
  if (!(gr <= scaled(opt.tol, g))) {
    throw Error(ErrorCode::NotInGroup, "input is not in the group of " + type.name(), gr);
  }
  const int rows = static_cast<int>(g.rows());
  KakFactors f;
  switch (type.tag) {
    case TypeTag::A: f = kak_a(g); break;
    case TypeTag::AI: f = kak_ai(g); break;
    case TypeTag::AII: f = kak_aii(g); break;
    case TypeTag::AIII: f = kak_aiii(g, type.p, type.q); break;
    case TypeTag::BD: f = kak_bd(g.real()); break;
    case TypeTag::BDI: f = kak_bdi(g.real(), type.p, type.q); break;
    case TypeTag::DIII: f = kak_diii(g.real()); break;
    case TypeTag::C: f = kak_c(g); break;
    case TypeTag::CI: f = kak_ci(g); break;
    case TypeTag::CII: f = kak_cii(g, type.p, type.q); break;
    case TypeTag::Trivial:
      f.k1 = G;
      f.a = CsgElement::udiag({});
      f.a.dim = 0;
      f.k2 = DenseMatrix::identity(rows);
      throw Error(ErrorCode::BadParams, "the trivial involution has no KAK decomposition; use AIII(n,0)");
  }
  f.type = type;
  f.k1 = clean(f.k1.to_complex());
  f.k2 = clean(f.k2.to_complex());
  return f;
}

namespace {

// Columns b_j, b_{n+j} = -W b_j^(*) completed by Gram-Schmidt from the
// standard basis, so that B J B^T = W.
CMat pair_completion(const CMat& w, bool conjugate) {
  const int s = static_cast<int>(w.rows());
  const int n = s / 2;
  CMat b(s, s);
  int found = 0;
  for (int e = 0; e < s && found < n; ++e) {
    CVec v = CVec::Zero(s);
    v(e) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < found; ++k) {
        v -= b.col(k) * b.col(k).dot(v);
        v -= b.col(n + k) * b.col(n + k).dot(v);
      }
    if (v.norm() < 0.5) continue;
    v /= v.norm();
    b.col(found) = v;
    b.col(n + found) = -w * (conjugate ? CVec(v.conjugate()) : v);
    ++found;
  }
  if (found != n) throw Error(ErrorCode::DegenerateBasisFailure, "cannot complete a symplectic basis");
  return b;
}

}  // namespace

KakFactors kak_decompose(const DenseMatrix& G, const Involution& theta, const KakOptions& opt) {
  const InvolutionType t = classify(theta);
  const CMat gt = theta.G.to_complex();
  const int s = static_cast<int>(gt.rows());
  CMat b;
  // Normalized conjugator and basis B with theta = Ad_B o theta_0 o Ad_B^dag.
  switch (t.tag) {
    case TypeTag::AIII:
    case TypeTag::BDI: {
      CMat h = gt;
      h /= std::sqrt((h * h).trace() / static_cast<double>(s));
      if ((h - h.adjoint()).norm() > 1e-8 * s) h *= cplx(0.0, 1.0);
      CMat v;
      RVec w;
      if (t.tag == TypeTag::BDI) {
        RMat vr;
        const RMat hr = h.real();
        lapack::dsyevd(0.5 * (hr + hr.transpose()), vr, w);
        v = vr.cast<cplx>();
      } else {
        lapack::zheevd(0.5 * (h + h.adjoint()), v, w);
      }
      int plus = 0;
      for (int i = 0; i < w.size(); ++i) plus += w(i) > 0;
      if (plus < s - plus) {
        w = -w;
        plus = s - plus;
      }
      b.resize(s, s);
      int c = 0;
      for (int i = s - 1; i >= 0; --i)
        if (w(i) > 0) b.col(c++) = v.col(i);
      for (int i = 0; i < s; ++i)
        if (w(i) <= 0) b.col(c++) = v.col(i);
      if (plus != t.p) throw Error(ErrorCode::BadParams, "split mismatch in the generic basis");
      break;
    }
    case TypeTag::AI: {
      const CMat v = gt / det_root(gt, s);
      const EvdResult evd = evd_unitary(v);
      RMat o(s, s);
      int col = 0;
      for (const auto& [cb, ce] : evd.fine_clusters) {
        const RMat r = realify(evd.V.middleCols(cb, ce - cb), cb, ce, evd.phases[cb]);
        o.middleCols(col, r.cols()) = r;
        col += static_cast<int>(r.cols());
      }
      o = nearest_orthogonal(o);
      const CMat oc = o.cast<cplx>();
      const CVec ray = (oc.transpose() * v * oc).diagonal();
      b = oc;
      for (int j = 0; j < s; ++j) b.col(j) *= std::polar(1.0, 0.5 * std::arg(ray(j)));
      // W W^T = V up to the root of unity removed above.
      const cplx ratio = (gt * (b * b.transpose()).adjoint()).trace() / static_cast<double>(s);
      b *= std::sqrt(ratio);
      break;
    }
    case TypeTag::AII: {
      const CMat w = gt / det_root(gt, s);
      b = pair_completion(w, true);
      const cplx ratio = (gt * (b * symplectic_form(s / 2).cast<cplx>() * b.transpose()).adjoint()).trace() /
                         static_cast<double>(s);
      b *= std::sqrt(ratio);
      break;
    }
    case TypeTag::DIII: {
      CMat l = gt;
      Eigen::Index r0 = 0, c0 = 0;
      l.cwiseAbs().maxCoeff(&r0, &c0);
      l *= std::conj(l(r0, c0)) / std::abs(l(r0, c0));
      b = pair_completion(CMat(l.real().cast<cplx>()), false);
      break;
    }
    default:
      throw Error(ErrorCode::BadParams, "generic-basis KAK is only available for AI, AII, AIII, BDI, DIII");
  }
  // theta(x) = G x^{*tau} G^dag equals B theta_0(B^dag x B) B^dag for the B above.
  const CMat g = G.to_complex();
  const CMat gc = b.adjoint() * g * b;
  InvolutionType canon = t;
  KakFactors f = kak_decompose(clean(gc), canon, opt);
  f.k1 = clean(b * f.k1.to_complex() * b.adjoint());
  f.k2 = clean(b * f.k2.to_complex() * b.adjoint());
  f.delta = clean(b * f.delta.to_complex() * b.adjoint());
  f.basis = clean(b);
  return f;
}

RMat csa_algebra_element(int p, int q, const std::vector<double>& rates) {
  const int n = p + q;
  const int r = std::min(p, q);
  if (static_cast<int>(rates.size()) != r) throw Error(ErrorCode::BadParams, "need min(p,q) rates");
  RMat a = RMat::Zero(n, n);
  for (int j = 0; j < r; ++j) {
    a(j, n - r + j) = rates[j];
    a(n - r + j, j) = -rates[j];
  }
  return a;
}

HorizontalResult horizontal_decompose(const RMat& x, int p, int q, double tol) {
  const int n = p + q;
  if (x.rows() != n || x.cols() != n) throw Error(ErrorCode::DimMismatch, "x must be (p+q) x (p+q)");
  const double scale = std::max(1.0, x.norm());
  const double hres = x.topLeftCorner(p, p).norm() + x.bottomRightCorner(q, q).norm() +
                      (x.topRightCorner(p, q) + x.bottomLeftCorner(q, p).transpose()).norm();
  if (hres > tol * std::sqrt(std::max(1, n)) * scale)
    throw Error(ErrorCode::NotHorizontal, "x is not horizontal for BDI(p,q)", hres);
  const int r = std::min(p, q);
  HorizontalResult out;
  out.K = RMat::Identity(n, n);
  std::vector<double> rates(r, 0.0);
  const RMat bm = x.topRightCorner(p, q);
  bool diagonal = p == q;
  if (diagonal)
    for (int i = 0; i < p && diagonal; ++i)
      for (int j = 0; j < q; ++j)
        if (i != j && bm(i, j) != 0.0) {
          diagonal = false;
          break;
        }
  if (r > 0 && diagonal) {
    for (int j = 0; j < r; ++j) rates[j] = bm(j, j);
  } else if (r > 0) {
    RMat u, vt;
    RVec s;
    lapack::dgesdd(bm, u, s, vt);
    const RMat vs = vt.transpose();
    RMat v(q, q);
    int partner0 = 0;
    if (p <= q) {
      for (int j = 0; j < p; ++j) v.col(q - p + j) = vs.col(j);
      for (int k = 0; k < q - p; ++k) v.col(k) = vs.col(p + k);
      partner0 = q - p;
    } else {
      v = vs;
    }
    for (int j = 0; j < r; ++j) rates[j] = s(j);
    if (u.determinant() < 0) {
      u.col(0) *= -1.0;
      rates[0] = -rates[0];
    }
    if (v.determinant() < 0) {
      v.col(partner0) *= -1.0;
      rates[0] = -rates[0];
    }
    out.K = direct_sum<RMat>(u, v);
  }
  out.a = CsgElement::cs(p, q, rates);
  out.a_alg = csa_algebra_element(p, q, rates);
  return out;
}

VerifyReport verify_factors(const DenseMatrix& G, const KakFactors& f, double tol) {
  VerifyReport r;
  const CMat g = G.to_complex();
  const CMat k1 = f.k1.to_complex();
  const CMat k2 = f.k2.to_complex();
  const double inf = std::numeric_limits<double>::infinity();
  if (k1.rows() != g.rows() || k2.rows() != g.rows() || f.a.size() != g.rows()) {
    r.reconstruction = r.k1_membership = r.k2_membership = r.csg_pattern = inf;
    r.det_ok = false;
    return r;
  }
  r.reconstruction = (f.reconstruct() - g).norm();
  CMat c1 = k1;
  CMat c2 = k2;
  if (f.basis.rows() != 0) {
    const CMat b = f.basis.to_complex();
    c1 = b.adjoint() * k1 * b;
    c2 = b.adjoint() * k2 * b;
  }
  r.k1_membership = k_membership_residual(c1, f.type);
  r.k2_membership = k_membership_residual(c2, f.type);
  // The CSG element must be horizontal: Theta(A) = A^dag.
  const CMat am = f.a.materialize_complex();
  const int sp = type_size_param(f.type, static_cast<int>(am.rows()));
  r.csg_pattern = unitarity_residual(am);
  if (!f.type.is_trivial()) {
    const Involution theta = canonical_involution(f.type, sp);
    r.csg_pattern += (apply_involution(theta, am) - am.adjoint()).norm();
  }
  if (f.type.tag == TypeTag::BDI) {
    const int p = f.type.p;
    const int q = f.type.q;
    for (const CMat* k : {&c1, &c2}) {
      const RMat re = k->real();
      if (p > 0 && block_det_residual(re.topLeftCorner(p, p)) > 1e-8) r.det_ok = false;
      if (q > 0 && block_det_residual(re.bottomRightCorner(q, q)) > 1e-8) r.det_ok = false;
    }
  }
  const double lim = scaled(tol, g);
  r.passed = r.reconstruction <= lim && r.k1_membership <= lim && r.k2_membership <= lim &&
             r.csg_pattern <= lim && r.det_ok;
  return r;
}

nlohmann::json to_json(const KakFactors& f) {
  nlohmann::json j = {{"type", f.type.name()},
                      {"k1", to_json(f.k1)},
                      {"a", to_json(f.a)},
                      {"k2", to_json(f.k2)},
                      {"global_phase", {f.global_phase.real(), f.global_phase.imag()}}};
  if (f.basis.rows() != 0) j["basis"] = to_json(f.basis);
  return j;
}

nlohmann::json to_json(const VerifyReport& r) {
  return {{"reconstruction", r.reconstruction}, {"k1_membership", r.k1_membership},
          {"k2_membership", r.k2_membership},   {"csg_pattern", r.csg_pattern},
          {"det_ok", r.det_ok},                 {"passed", r.passed}};
}

KakFactors kak_factors_from_json(const nlohmann::json& j) {
  try {
    KakFactors f;
    f.type = parse_type(j.at("type").get<std::string>());
    f.k1 = matrix_from_json(j.at("k1"));
    f.a = csg_from_json(j.at("a"));
    f.k2 = matrix_from_json(j.at("k2"));
    if (j.contains("global_phase")) {
      const auto gp = j.at("global_phase").get<std::vector<double>>();
      if (gp.size() != 2) throw Error(ErrorCode::BadParams, "global_phase must be [re, im]");
      f.global_phase = {gp[0], gp[1]};
    }
    if (j.contains("basis")) f.basis = matrix_from_json(j.at("basis"));
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadParams, std::string("KAK factors JSON: ") + e.what());
  }
}

DenseMatrix random_group_element(const InvolutionType& t, int n, Rng& rng) {
  const int m = t.has_split() ? t.p + t.q : n;
  if (m < 1) throw Error(ErrorCode::BadParams, "group size must be positive");
  switch (t.tag) {
    case TypeTag::A: return DenseMatrix(direct_sum<CMat>(haar_unitary(m, rng), haar_unitary(m, rng)));
    case TypeTag::AI: return DenseMatrix(haar_unitary(m, rng));
    case TypeTag::AII: return DenseMatrix(haar_unitary(2 * m, rng));
    case TypeTag::AIII: return DenseMatrix(haar_unitary(m, rng));
    case TypeTag::BD:
      return DenseMatrix(direct_sum<RMat>(haar_special_orthogonal(m, rng), haar_special_orthogonal(m, rng)));
    case TypeTag::BDI: return DenseMatrix(haar_special_orthogonal(m, rng));
    case TypeTag::DIII: return DenseMatrix(haar_special_orthogonal(2 * m, rng));
    case TypeTag::C:
      return DenseMatrix(direct_sum<CMat>(random_symplectic_unitary(m, rng), random_symplectic_unitary(m, rng)));
    case TypeTag::CI: return DenseMatrix(random_symplectic_unitary(m, rng));
    case TypeTag::CII: return DenseMatrix(random_symplectic_unitary(m, rng));
    default: throw Error(ErrorCode::BadParams, "no group for the trivial type");
  }
}

}  // namespace cartan
