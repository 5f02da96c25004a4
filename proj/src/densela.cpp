#include "cartan/densela.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cartan/error.hpp"
#include "lapack.hpp"

namespace cartan {

namespace {

constexpr double kPi = 3.14159265358979323846;

double scaled_tol(double tol, Eigen::Index n) {
  return tol * std::max(1.0, std::sqrt(static_cast<double>(n)));
}

template <typename Mat>
Mat adjoint_of(const Mat& m) {
  return m.adjoint();
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix() : kind_(ScalarKind::Real64) {}
DenseMatrix::DenseMatrix(RMat m) : kind_(ScalarKind::Real64), r_(std::move(m)) {}
DenseMatrix::DenseMatrix(CMat m) : kind_(ScalarKind::Complex128), c_(std::move(m)) {}

DenseMatrix DenseMatrix::identity(int n) { return DenseMatrix(RMat(RMat::Identity(n, n))); }

int DenseMatrix::rows() const {
  return static_cast<int>(is_real() ? r_.rows() : c_.rows());
}
int DenseMatrix::cols() const {
  return static_cast<int>(is_real() ? r_.cols() : c_.cols());
}

const RMat& DenseMatrix::real() const {
  if (!is_real()) throw Error(ErrorCode::DimMismatch, "matrix is complex");
  return r_;
}

const CMat& DenseMatrix::complex() const {
  if (is_real()) throw Error(ErrorCode::DimMismatch, "matrix is real");
  return c_;
}

CMat DenseMatrix::to_complex() const { return is_real() ? CMat(r_.cast<cplx>()) : c_; }

RMat DenseMatrix::to_real(double tol) const {
  if (is_real()) return r_;
  const double im = c_.imag().norm();
  if (im > tol * std::max(1.0, c_.norm())) {
    throw Error(ErrorCode::DimMismatch, "matrix has a non-negligible imaginary part", im);
  }
  return c_.real();
}

double DenseMatrix::norm() const { return is_real() ? r_.norm() : c_.norm(); }

nlohmann::json to_json(const DenseMatrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["scalar"] = m.is_real() ? "real64" : "complex128";
  nlohmann::json data = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (m.is_real()) {
        data.push_back(m.real()(r, c));
      } else {
        const cplx v = m.complex()(r, c);
        data.push_back({v.real(), v.imag()});
      }
    }
  }
  j["data"] = std::move(data);
  return j;
}

DenseMatrix matrix_from_json(const nlohmann::json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const std::string scalar = j.value("scalar", std::string("real64"));
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<size_t>(rows) * cols) {
    throw Error(ErrorCode::DimMismatch, "matrix JSON data length does not match rows*cols");
  }
  if (scalar == "real64") {
    RMat m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = data[static_cast<size_t>(r) * cols + c].get<double>();
    return DenseMatrix(std::move(m));
  }
  if (scalar != "complex128") throw Error(ErrorCode::BadParams, "unknown scalar kind " + scalar);
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto& e = data[static_cast<size_t>(r) * cols + c];
      if (e.is_number()) {
        m(r, c) = cplx(e.get<double>(), 0.0);
      } else {
        m(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
      }
    }
  }
  return DenseMatrix(std::move(m));
}

// ---------------------------------------------------------------------------
// Structured constants

RMat symplectic_form(int n) {
  RMat j = RMat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -RMat::Identity(n, n);
  return j;
}

RMat ipq(int p, int q) {
  RMat m = RMat::Identity(p + q, p + q);
  m.bottomRightCorner(q, q) *= -1.0;
  return m;
}

RMat kpq(int p, int q) { return direct_sum(ipq(p, q), ipq(p, q)); }

RMat block_swap(int n) {
  RMat s = RMat::Zero(2 * n, 2 * n);
  s.topRightCorner(n, n).setIdentity();
  s.bottomLeftCorner(n, n).setIdentity();
  return s;
}

// ---------------------------------------------------------------------------
// Predicates

double unitarity_residual(const CMat& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m.adjoint() * m - CMat::Identity(m.rows(), m.cols())).norm();
}

double orthogonality_residual(const RMat& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m.transpose() * m - RMat::Identity(m.rows(), m.cols())).norm();
}

double symplectic_residual(const CMat& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) return std::numeric_limits<double>::infinity();
  const CMat j = symplectic_form(static_cast<int>(m.rows() / 2)).cast<cplx>();
  return (m.transpose() * j * m - j).norm();
}

double skew_residual(const CMat& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m + m.adjoint()).norm();
}

double hermitian_residual(const CMat& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).norm();
}

bool is_unitary(const DenseMatrix& m, double tol) {
  return unitarity_residual(m.to_complex()) <= scaled_tol(tol, m.rows());
}

bool is_orthogonal(const DenseMatrix& m, double tol) {
  if (!m.is_real() && m.complex().imag().norm() > scaled_tol(tol, m.rows())) return false;
  return orthogonality_residual(m.to_complex().real()) <= scaled_tol(tol, m.rows());
}

bool is_symplectic_unitary(const DenseMatrix& m, double tol) {
  const CMat c = m.to_complex();
  return unitarity_residual(c) <= scaled_tol(tol, m.rows()) &&
         symplectic_residual(c) <= scaled_tol(tol, m.rows());
}

bool is_skew_symmetric(const DenseMatrix& m, double tol) {
  return skew_residual(m.to_complex()) <= scaled_tol(tol, m.rows()) * std::max(1.0, m.norm());
}

bool is_hermitian(const DenseMatrix& m, double tol) {
  return hermitian_residual(m.to_complex()) <= scaled_tol(tol, m.rows()) * std::max(1.0, m.norm());
}

// ---------------------------------------------------------------------------
// Cartan subgroup elements

const char* csg_kind_name(CsgKind k) {
  switch (k) {
    case CsgKind::UDiag: return "UDiag";
    case CsgKind::SpDiag: return "SpDiag";
    case CsgKind::CS: return "CS";
    case CsgKind::Schur: return "Schur";
  }
  return "UDiag";
}

CsgElement CsgElement::udiag(std::vector<double> angles) {
  CsgElement a;
  a.kind = CsgKind::UDiag;
  a.dim = static_cast<int>(angles.size());
  a.angles = std::move(angles);
  return a;
}

CsgElement CsgElement::spdiag(std::vector<double> angles) {
  CsgElement a;
  a.kind = CsgKind::SpDiag;
  a.dim = 2 * static_cast<int>(angles.size());
  a.angles = std::move(angles);
  return a;
}

CsgElement CsgElement::cs(int p, int q, std::vector<double> angles) {
  if (static_cast<int>(angles.size()) != std::min(p, q)) {
    throw Error(ErrorCode::BadParams, "CS element needs min(p,q) angles");
  }
  CsgElement a;
  a.kind = CsgKind::CS;
  a.p = p;
  a.q = q;
  a.dim = p + q;
  a.angles = std::move(angles);
  return a;
}

CsgElement CsgElement::schur(int n, std::vector<double> angles) {
  if (static_cast<int>(angles.size()) != n / 2) {
    throw Error(ErrorCode::BadParams, "Schur element needs floor(n/2) angles");
  }
  CsgElement a;
  a.kind = CsgKind::Schur;
  a.dim = n;
  a.angles = std::move(angles);
  return a;
}

namespace {

RMat base_real(const CsgElement& a) {
  RMat m = RMat::Identity(a.dim, a.dim);
  if (a.kind == CsgKind::CS) {
    const int n = a.p + a.q;
    const int r = std::min(a.p, a.q);
    for (int j = 0; j < r; ++j) {
      const int k = n - r + j;
      const double c = std::cos(a.angles[j]);
      const double s = std::sin(a.angles[j]);
      m(j, j) = c;
      m(j, k) = s;
      m(k, j) = -s;
      m(k, k) = c;
    }
  } else if (a.kind == CsgKind::Schur) {
    for (size_t j = 0; j < a.angles.size(); ++j) {
      const int i = static_cast<int>(2 * j);
      const double c = std::cos(a.angles[j]);
      const double s = std::sin(a.angles[j]);
      m(i, i) = c;
      m(i, i + 1) = s;
      m(i + 1, i) = -s;
      m(i + 1, i + 1) = c;
    }
  } else {
    throw Error(ErrorCode::BadParams, "CSG kind is not real");
  }
  return m;
}

CMat base_complex(const CsgElement& a) {
  if (a.is_real()) return base_real(a).cast<cplx>();
  CMat m = CMat::Zero(a.dim, a.dim);
  const int k = static_cast<int>(a.angles.size());
  for (int j = 0; j < k; ++j) {
    m(j, j) = std::polar(1.0, a.angles[j]);
    if (a.kind == CsgKind::SpDiag) m(k + j, k + j) = std::polar(1.0, -a.angles[j]);
  }
  return m;
}

template <typename Mat>
Mat doubled(const CsgElement& a, const Mat& x) {
  switch (a.doubling) {
    case Doubling::None: return x;
    case Doubling::Dagger: return direct_sum<Mat>(x, x.adjoint());
    case Doubling::Repeat: return direct_sum<Mat>(x, x);
  }
  return x;
}

}  // namespace

CMat CsgElement::materialize_complex() const { return doubled<CMat>(*this, base_complex(*this)); }

RMat CsgElement::materialize_real() const { return doubled<RMat>(*this, base_real(*this)); }

DenseMatrix CsgElement::materialize() const {
  return is_real() ? DenseMatrix(materialize_real()) : DenseMatrix(materialize_complex());
}

nlohmann::json to_json(const CsgElement& a) {
  nlohmann::json j;
  j["kind"] = csg_kind_name(a.kind);
  j["angles"] = a.angles;
  j["dim"] = a.dim;
  if (a.kind == CsgKind::CS) {
    j["p"] = a.p;
    j["q"] = a.q;
  }
  j["doubling"] = a.doubling == Doubling::None     ? "none"
                  : a.doubling == Doubling::Dagger ? "dagger"
                                                   : "repeat";
  return j;
}

CsgElement csg_from_json(const nlohmann::json& j) {
  CsgElement a;
  const std::string kind = j.at("kind").get<std::string>();
  a.angles = j.at("angles").get<std::vector<double>>();
  const int na = static_cast<int>(a.angles.size());
  if (kind == "UDiag") {
    a.kind = CsgKind::UDiag;
    a.dim = j.value("dim", na);
  } else if (kind == "SpDiag") {
    a.kind = CsgKind::SpDiag;
    a.dim = j.value("dim", 2 * na);
  } else if (kind == "CS") {
    a.kind = CsgKind::CS;
    a.p = j.at("p").get<int>();
    a.q = j.at("q").get<int>();
    a.dim = a.p + a.q;
  } else if (kind == "Schur") {
    a.kind = CsgKind::Schur;
    a.dim = j.value("dim", 2 * na);
  } else {
    throw Error(ErrorCode::BadParams, "unknown CSG kind " + kind);
  }
  const std::string d = j.value("doubling", std::string("none"));
  a.doubling = d == "dagger" ? Doubling::Dagger : d == "repeat" ? Doubling::Repeat : Doubling::None;
  return a;
}

double csg_pattern_residual(const CsgElement& a, const CMat& m) {
  const CMat ref = a.materialize_complex();
  if (ref.rows() != m.rows() || ref.cols() != m.cols()) return std::numeric_limits<double>::infinity();
  return (ref - m).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Unitary EVD

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

EvdResult evd_unitary(const CMat& m, double degeneracy_tol, double fine_tol) {
  const Eigen::Index n = m.rows();
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotUnitary, "matrix is not square");
  const double ures = unitarity_residual(m);
  if (ures > scaled_tol(1e-8, n)) throw Error(ErrorCode::NotUnitary, "input is not unitary", ures);

  EvdResult out;
  if (n == 0) return out;
  const auto schur = lapack::zgees(m);
  std::vector<double> raw(n);
  for (Eigen::Index i = 0; i < n; ++i) raw[i] = wrap_angle(std::arg(schur.T(i, i)));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return raw[a] < raw[b]; });

  std::vector<std::pair<int, int>> groups;
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || raw[order[i]] - raw[order[i - 1]] >= degeneracy_tol) {
      groups.emplace_back(start, i);
      start = i;
    }
  }
  // A group that straddles the +-pi cut is moved to the end.
  if (groups.size() > 1 &&
      raw[order[0]] + 2.0 * kPi - raw[order[n - 1]] < degeneracy_tol) {
    auto first = groups.front();
    auto last = groups.back();
    std::vector<int> reordered;
    for (int i = first.second; i < n; ++i) reordered.push_back(order[i]);
    for (int i = first.first; i < first.second; ++i) reordered.push_back(order[i]);
    order = reordered;
    groups.pop_back();
    groups.erase(groups.begin());
    const int shift = first.second - first.first;
    for (auto& g : groups) {
      g.first -= shift;
      g.second -= shift;
    }
    groups.emplace_back(last.first - shift, static_cast<int>(n));
  }

  out.V.resize(n, n);
  out.phases.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.V.col(i) = schur.Z.col(order[i]);
    out.phases[i] = raw[order[i]];
  }
  out.clusters = groups;

  for (const auto& g : groups) {
    const int b = g.first;
    const int len = g.second - g.first;
    if (len == 1) {
      out.fine_clusters.push_back(g);
      continue;
    }
    CMat vc = out.V.middleCols(b, len);
    const CMat blk = vc.adjoint() * m * vc;
    cplx center(0.0, 0.0);
    for (int i = 0; i < len; ++i) center += std::polar(1.0, out.phases[b + i]);
    center = std::abs(center) > 1e-3 ? center / std::abs(center) : std::polar(1.0, out.phases[b]);
    const CMat rel = blk * std::conj(center);
    const CMat h = (rel - rel.adjoint()) / cplx(0.0, 2.0);
    CMat q;
    RVec w;
    lapack::zheevd(h, q, w);
    out.V.middleCols(b, len) = vc * q;
    for (int i = 0; i < len; ++i) {
      const cplx ev = q.col(i).adjoint() * rel * q.col(i);
      out.phases[b + i] = wrap_angle(std::arg(center) + std::arg(ev));
    }
    int s = 0;
    for (int i = 1; i <= len; ++i) {
      if (i == len || w(i) - w(i - 1) >= fine_tol) {
        out.fine_clusters.emplace_back(b + s, b + i);
        s = i;
      }
    }
  }
  return out;
}

std::pair<DenseMatrix, std::vector<double>> evd_unitary(const DenseMatrix& m) {
  auto r = evd_unitary(m.to_complex());
  return {DenseMatrix(std::move(r.V)), std::move(r.phases)};
}

// ---------------------------------------------------------------------------
// Real Schur form of special orthogonal matrices

namespace {

double block_angle(const RMat& x, int i) {
  return std::atan2(0.5 * (x(i, i + 1) - x(i + 1, i)), 0.5 * (x(i, i) + x(i + 1, i + 1)));
}

// Splits the invariant subspace spanned by `cols` (all eigenvalues near one
// real value) into 2D rotation planes and single directions, using the real
// Schur form of the skew part of the restricted matrix.
void refine_real_cluster(const RMat& o, const RMat& cols, std::vector<RMat>& pairs,
                         std::vector<RVec>& singles) {
  const Eigen::Index k = cols.cols();
  if (k == 0) return;
  if (k == 1) {
    singles.push_back(cols.col(0));
    return;
  }
  const RMat m = cols.transpose() * o * cols;
  const RMat s = 0.5 * (m - m.transpose());
  const auto sch = lapack::dgees(s);
  const RMat basis = cols * sch.Z;
  Eigen::Index i = 0;
  while (i < k) {
    if (i + 1 < k && sch.T(i + 1, i) != 0.0) {
      pairs.push_back(basis.middleCols(i, 2));
      i += 2;
    } else {
      singles.push_back(basis.col(i));
      i += 1;
    }
  }
}

}  // namespace

SchurResult real_schur(const RMat& o) {
  const Eigen::Index n = o.rows();
  if (o.rows() != o.cols()) throw Error(ErrorCode::NotSpecialOrthogonal, "matrix is not square");
  const double ores = orthogonality_residual(o);
  if (ores > scaled_tol(1e-8, n)) {
    throw Error(ErrorCode::NotSpecialOrthogonal, "input is not orthogonal", ores);
  }
  if (n > 0 && o.determinant() < 0) {
    throw Error(ErrorCode::NotSpecialOrthogonal, "determinant is -1");
  }
  SchurResult out;
  if (n == 0) {
    out.Q = RMat(0, 0);
    out.mu2 = CsgElement::schur(0, {});
    return out;
  }
  const auto sch = lapack::dgees(o);
  std::vector<RMat> pairs;
  std::vector<int> plus, minus;
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && sch.T(i + 1, i) != 0.0) {
      pairs.push_back(sch.Z.middleCols(i, 2));
      i += 2;
    } else {
      (sch.T(i, i) >= 0.0 ? plus : minus).push_back(static_cast<int>(i));
      i += 1;
    }
  }
  auto gather = [&](const std::vector<int>& idx) {
    RMat c(n, static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) c.col(static_cast<Eigen::Index>(j)) = sch.Z.col(idx[j]);
    return c;
  };
  std::vector<RVec> singles_minus, singles_plus;
  refine_real_cluster(o, gather(minus), pairs, singles_minus);
  refine_real_cluster(o, gather(plus), pairs, singles_plus);
  if (singles_minus.size() % 2 != 0) {
    throw Error(ErrorCode::NotSpecialOrthogonal, "odd number of -1 eigenvalues");
  }

  out.Q.resize(n, n);
  Eigen::Index c = 0;
  for (const auto& p : pairs) {
    out.Q.middleCols(c, 2) = p;
    c += 2;
  }
  for (const auto& v : singles_minus) out.Q.col(c++) = v;
  for (const auto& v : singles_plus) out.Q.col(c++) = v;

  if (out.Q.determinant() < 0) {
    if (n % 2 == 0) {
      out.Q.col(0).swap(out.Q.col(1));
    } else {
      out.Q.col(n - 1) *= -1.0;
    }
  }
  const RMat x = out.Q.transpose() * o * out.Q;
  std::vector<double> angles(n / 2);
  for (Eigen::Index j = 0; j < n / 2; ++j) angles[j] = block_angle(x, static_cast<int>(2 * j));
  out.mu2 = CsgElement::schur(static_cast<int>(n), std::move(angles));
  return out;
}

// ---------------------------------------------------------------------------
// Cosine-sine decomposition

template <typename Mat>
Mat CsdFactors<Mat>::K1() const {
  return direct_sum<Mat>(L0, L1);
}

template <typename Mat>
Mat CsdFactors<Mat>::K2() const {
  return direct_sum<Mat>(R0, R1);
}

template struct CsdFactors<RMat>;
template struct CsdFactors<CMat>;

namespace {

void svd(const RMat& a, RMat& u, RVec& s, RMat& vh) { lapack::dgesdd(a, u, s, vh); }
void svd(const CMat& a, CMat& u, RVec& s, CMat& vh) { lapack::zgesdd(a, u, s, vh); }

double abs_of(double x) { return std::abs(x); }
double abs_of(cplx x) { return std::abs(x); }
double unit_of(double x) { return x < 0 ? -1.0 : 1.0; }
cplx unit_of(cplx x) {
  const double a = std::abs(x);
  return a > 0 ? x / a : cplx(1.0, 0.0);
}

// SVD of a square block with singular values ascending: a = L diag(c) R.
template <typename Mat>
void ascending_svd(const Mat& a, Mat& l, RVec& c, Mat& r) {
  Mat u, vh;
  RVec s;
  svd(a, u, s, vh);
  const Eigen::Index k = a.rows();
  std::vector<Eigen::Index> order(k);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return s(x) < s(y); });
  l.resize(k, k);
  r.resize(k, k);
  c.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    l.col(j) = u.col(order[j]);
    r.row(j) = vh.row(order[j]);
    c(j) = std::min(s(order[j]), 1.0);
  }
}

template <typename Mat>
CsdFactors<Mat> csd_impl(const Mat& u, int p, int q) {
  using Scalar = typename Mat::Scalar;
  const int n = p + q;
  if (p < 0 || q < 0 || u.rows() != n || u.cols() != n) {
    throw Error(ErrorCode::BadSplit, "p+q must equal the matrix dimension");
  }
  const double ures = (u.adjoint() * u - Mat::Identity(n, n)).norm();
  if (ures > scaled_tol(1e-8, n)) throw Error(ErrorCode::NotUnitary, "input is not unitary", ures);

  CsdFactors<Mat> f;
  if (p == 0 || q == 0) {
    f.L0 = p ? u : Mat(0, 0);
    f.L1 = q ? u : Mat(0, 0);
    f.R0 = Mat::Identity(p, p);
    f.R1 = Mat::Identity(q, q);
    f.F = CsgElement::cs(p, q, {});
    return f;
  }

  std::vector<double> angles;
  if (p <= q) {
    const int r = p;
    RVec c;
    ascending_svd<Mat>(u.topLeftCorner(p, p), f.L0, c, f.R0);
    const Mat w = u.bottomLeftCorner(q, p) * f.R0.adjoint();
    Eigen::HouseholderQR<Mat> qr(w);
    const Mat qf = qr.householderQ() * Mat::Identity(q, q);
    const Mat rf = qr.matrixQR().template triangularView<Eigen::Upper>();
    f.L1.resize(q, q);
    f.L1.leftCols(q - r) = qf.rightCols(q - r);
    RVec s(r);
    for (int j = 0; j < r; ++j) {
      const Scalar d = rf(j, j);
      s(j) = abs_of(d);
      // A vanishing sine leaves the sign free; keep the completion positive.
      const Scalar ph = s(j) == 0.0 ? Scalar(-1.0) : unit_of(d);
      f.L1.col(q - r + j) = -qf.col(j) * ph;
      angles.push_back(std::atan2(s(j), c(j)));
    }
    const Mat t12 = f.L0.adjoint() * u.topRightCorner(p, q);
    const Mat t22 = f.L1.adjoint() * u.bottomRightCorner(q, q);
    f.R1.resize(q, q);
    f.R1.topRows(q - r) = t22.topRows(q - r);
    for (int j = 0; j < r; ++j) {
      if (s(j) > c(j)) {
        f.R1.row(q - r + j) = t12.row(j) / s(j);
      } else {
        f.R1.row(q - r + j) = t22.row(q - r + j) / c(j);
      }
    }
  } else {
    const int r = q;
    RVec c;
    ascending_svd<Mat>(u.bottomRightCorner(q, q), f.L1, c, f.R1);
    const Mat w = u.topRightCorner(p, q) * f.R1.adjoint();
    Eigen::HouseholderQR<Mat> qr(w);
    const Mat qf = qr.householderQ() * Mat::Identity(p, p);
    const Mat rf = qr.matrixQR().template triangularView<Eigen::Upper>();
    f.L0.resize(p, p);
    f.L0.rightCols(p - r) = qf.rightCols(p - r);
    RVec s(r);
    for (int j = 0; j < r; ++j) {
      const Scalar d = rf(j, j);
      s(j) = abs_of(d);
      f.L0.col(j) = qf.col(j) * unit_of(d);
      angles.push_back(std::atan2(s(j), c(j)));
    }
    const Mat t11 = f.L0.adjoint() * u.topLeftCorner(p, p);
    const Mat t21 = f.L1.adjoint() * u.bottomLeftCorner(q, p);
    f.R0.resize(p, p);
    f.R0.bottomRows(p - r) = t11.bottomRows(p - r);
    for (int j = 0; j < r; ++j) {
      if (c(j) > s(j)) {
        f.R0.row(j) = t11.row(j) / c(j);
      } else {
        f.R0.row(j) = -t21.row(j) / s(j);
      }
    }
  }
  f.F = CsgElement::cs(p, q, std::move(angles));
  return f;
}

}  // namespace

RealCsd csd(const RMat& u, int p, int q) { return csd_impl<RMat>(u, p, q); }
ComplexCsd csd(const CMat& u, int p, int q) { return csd_impl<CMat>(u, p, q); }

CsdResult csd(const DenseMatrix& u, int p, int q) {
  if (u.is_real()) {
    auto f = csd(u.real(), p, q);
    return {DenseMatrix(f.K1()), f.F, DenseMatrix(f.K2())};
  }
  auto f = csd(u.complex(), p, q);
  return {DenseMatrix(f.K1()), f.F, DenseMatrix(f.K2())};
}

// ---------------------------------------------------------------------------
// Skew exponential

RMat expm_skew(const RMat& x, double t) {
  const Eigen::Index n = x.rows();
  if (x.rows() != x.cols()) throw Error(ErrorCode::NotSkew, "matrix is not square");
  const double res = (x + x.transpose()).norm();
  if (res > scaled_tol(1e-10, n) * std::max(1.0, x.norm())) {
    throw Error(ErrorCode::NotSkew, "input is not skew-symmetric", res);
  }
  if (n == 0) return RMat(0, 0);
  const auto sch = lapack::dgees(x);
  RMat e = RMat::Identity(n, n);
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && sch.T(i + 1, i) != 0.0) {
      const double w = 0.5 * (sch.T(i, i + 1) - sch.T(i + 1, i)) * t;
      const double c = std::cos(w);
      const double s = std::sin(w);
      e(i, i) = c;
      e(i, i + 1) = s;
      e(i + 1, i) = -s;
      e(i + 1, i + 1) = c;
      i += 2;
    } else {
      i += 1;
    }
  }
  return sch.Z * e * sch.Z.transpose();
}

CMat expm_skew(const CMat& x, double t) {
  const Eigen::Index n = x.rows();
  if (x.rows() != x.cols()) throw Error(ErrorCode::NotSkew, "matrix is not square");
  const double res = skew_residual(x);
  if (res > scaled_tol(1e-10, n) * std::max(1.0, x.norm())) {
    throw Error(ErrorCode::NotSkew, "input is not skew-Hermitian", res);
  }
  if (n == 0) return CMat(0, 0);
  CMat h = x * cplx(0.0, 1.0);
  h = 0.5 * (h + h.adjoint()).eval();
  CMat v;
  RVec w;
  lapack::zheevd(h, v, w);
  CVec d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = std::polar(1.0, -w(i) * t);
  return v * d.asDiagonal() * v.adjoint();
}

DenseMatrix expm_skew(const DenseMatrix& x, double t) {
  if (x.is_real()) return DenseMatrix(expm_skew(x.real(), t));
  return DenseMatrix(expm_skew(x.complex(), t));
}

// ---------------------------------------------------------------------------

CsgElement csg_sqrt(const CsgElement& a2, bool flip_branch) {
  CsgElement a = a2;
  for (auto& x : a.angles) x = 0.5 * wrap_angle(x);
  if (flip_branch && !a.angles.empty()) a.angles[0] += kPi;
  return a;
}

CMat nearest_unitary(const CMat& m) {
  CMat u, vh;
  RVec s;
  lapack::zgesdd(m, u, s, vh);
  return u * vh;
}

RMat nearest_orthogonal(const RMat& m) {
  RMat u, vh;
  RVec s;
  lapack::dgesdd(m, u, s, vh);
  return u * vh;
}

}  // namespace cartan
