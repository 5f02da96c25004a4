#include "cartan/involution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <regex>
#include <sstream>

#include "cartan/error.hpp"

namespace cartan {

namespace {

constexpr double kClassifyTol = 1e-8;

CMat swap_halves(const CMat& m) {
  const int h = static_cast<int>(m.rows() / 2);
  CMat out(m.rows(), m.cols());
  out.topLeftCorner(h, h) = m.bottomRightCorner(h, h);
  out.topRightCorner(h, h) = m.bottomLeftCorner(h, h);
  out.bottomLeftCorner(h, h) = m.topRightCorner(h, h);
  out.bottomRightCorner(h, h) = m.topLeftCorner(h, h);
  return out;
}

CMat conj_if(const CMat& m, int tau) { return tau ? CMat(m.conjugate()) : m; }

CMat swap_matrix(int n) { return block_swap(n).cast<cplx>(); }

// Projects an arbitrary square matrix onto the algebra (orthogonally for the
// trace inner product).
CMat project_to_algebra(const AlgebraId& a, const CMat& m) {
  const int b = a.block_size();
  auto project_block = [&](const CMat& x) {
    CMat y = 0.5 * (x - x.adjoint());
    if (a.family == Family::SU) {
      y -= (y.trace() / static_cast<double>(b)) * CMat::Identity(b, b);
    } else if (a.family == Family::SO) {
      y = y.real().cast<cplx>();
    } else if (a.family == Family::SP) {
      const CMat j = symplectic_form(a.n).cast<cplx>();
      y = 0.5 * (y + j * y.conjugate() * j.transpose());
    }
    return y;
  };
  if (!a.doubled) return project_block(m);
  CMat out = CMat::Zero(2 * b, 2 * b);
  out.topLeftCorner(b, b) = project_block(m.topLeftCorner(b, b));
  out.bottomRightCorner(b, b) = project_block(m.bottomRightCorner(b, b));
  return out;
}

// Deterministic random algebra elements for the numerical checks.
std::vector<CMat> sample_elements(const AlgebraId& a, int count) {
  std::mt19937_64 rng(0x5eed0001u + static_cast<unsigned>(a.size()));
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<CMat> out;
  const int s = a.size();
  for (int k = 0; k < count; ++k) {
    CMat m(s, s);
    for (int c = 0; c < s; ++c)
      for (int r = 0; r < s; ++r) {
        const double re = nd(rng);
        const double im = nd(rng);
        m(r, c) = cplx(re, im);
      }
    CMat x = project_to_algebra(a, m);
    const double nx = x.norm();
    if (nx > 0) x /= nx;
    out.push_back(x);
  }
  return out;
}

double sampled_involution_residual(const Involution& t) {
  double worst = 0.0;
  for (const CMat& x : sample_elements(t.algebra, 6))
    worst = std::max(worst, (apply_involution(t, apply_involution(t, x)) - x).norm());
  return worst;
}

double sampled_identity_residual(const Involution& t) {
  double worst = 0.0;
  for (const CMat& x : sample_elements(t.algebra, 6))
    worst = std::max(worst, (apply_involution(t, x) - x).norm());
  return worst;
}

// Counts eigenvalues of a Hermitian involutory matrix near +1 and -1.
std::pair<int, int> sign_counts(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  int plus = 0;
  int minus = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > 0) ++plus;
    else ++minus;
  }
  return {plus, minus};
}

// Rescales a unitary G with G^2 proportional to I so that G^2 = I.
bool normalize_square(CMat& g) {
  const int n = static_cast<int>(g.rows());
  const CMat g2 = g * g;
  const cplx lambda = g2.trace() / static_cast<double>(n);
  if ((g2 - lambda * CMat::Identity(n, n)).norm() > kClassifyTol * std::sqrt(n)) return false;
  if (std::abs(lambda) < 0.5) return false;
  g /= std::sqrt(lambda);
  return true;
}

// Phase making the largest-modulus entry real positive.
void normalize_real(CMat& g) {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  g.cwiseAbs().maxCoeff(&r, &c);
  const cplx v = g(r, c);
  if (std::abs(v) > 0) g *= std::conj(v) / std::abs(v);
}

struct Classified {
  InvolutionType type;
  CMat G;
};

// Classification of a non-doubled (G, tau) pair already known to be a
// non-trivial involution.
Classified classify_block(const CMat& g_in, int tau, Family family, int n) {
  const int s = static_cast<int>(g_in.rows());
  const double tol = kClassifyTol * std::sqrt(std::max(1, s));
  CMat g = g_in;
  const double scale = std::pow(std::abs(g.determinant()), 1.0 / s);
  if (!(scale > 0)) throw Error(ErrorCode::Unclassifiable, "singular conjugator");
  g /= scale;
  if (unitarity_residual(g) > tol) throw Error(ErrorCode::Unclassifiable, "conjugator is not unitary up to scale");

  if (family == Family::U || family == Family::SU) {
    if (tau == 0) {
      if (!normalize_square(g)) throw Error(ErrorCode::Unclassifiable, "Ad_G with G^2 not scalar");
      if ((g - g.adjoint()).norm() > tol)
        throw Error(ErrorCode::Unclassifiable, "normalized conjugator is not Hermitian");
      auto [p, q] = sign_counts(g);
      if (p < q) {
        g = -g;
        std::swap(p, q);
      }
      return {InvolutionType{TypeTag::AIII, p, q, false}, g};
    }
    const cplx d = g.determinant();
    g *= std::exp(cplx(0.0, -std::arg(d) / s));
    if ((g - g.transpose()).norm() <= tol) return {InvolutionType{TypeTag::AI, 0, 0, false}, g};
    if ((g + g.transpose()).norm() <= tol) return {InvolutionType{TypeTag::AII, 0, 0, false}, g};
    throw Error(ErrorCode::Unclassifiable, "conjugator neither symmetric nor antisymmetric");
  }

  if (family == Family::SO) {
    normalize_real(g);
    if (g.imag().norm() > tol) throw Error(ErrorCode::Unclassifiable, "orthogonal conjugator is not real");
    g = g.real().cast<cplx>();
    if ((g - g.transpose()).norm() <= tol) {
      auto [p, q] = sign_counts(g);
      if (p < q) {
        g = -g;
        std::swap(p, q);
      }
      return {InvolutionType{TypeTag::BDI, p, q, false}, g};
    }
    if ((g + g.transpose()).norm() <= tol) return {InvolutionType{TypeTag::DIII, 0, 0, false}, g};
    throw Error(ErrorCode::Unclassifiable, "orthogonal conjugator neither symmetric nor antisymmetric");
  }

  // sp(n): x^* = J x J^{-1}, so Ad_G o * = Ad_{GJ}.
  const CMat j = symplectic_form(n).cast<cplx>();
  if (tau) g = g * j;
  if (!normalize_square(g)) throw Error(ErrorCode::Unclassifiable, "Ad_G with G^2 not scalar");
  if ((g - g.adjoint()).norm() > tol)
    throw Error(ErrorCode::Unclassifiable, "normalized conjugator is not Hermitian");
  const double sym = (g.transpose() * j * g - j).norm();
  const double anti = (g.transpose() * j * g + j).norm();
  if (sym <= tol) {
    auto [p2, q2] = sign_counts(g);
    if (p2 % 2 || q2 % 2) throw Error(ErrorCode::Unclassifiable, "odd eigenvalue multiplicity");
    int p = p2 / 2;
    int q = q2 / 2;
    if (p < q) {
      g = -g;
      std::swap(p, q);
    }
    return {InvolutionType{TypeTag::CII, p, q, false}, g};
  }
  if (anti <= tol) return {InvolutionType{TypeTag::CI, 0, 0, false}, cplx(0.0, 1.0) * g};
  throw Error(ErrorCode::Unclassifiable, "conjugator does not normalize sp(n)");
}

Classified classify_impl(const CMat& g, int tau, int sigma, const AlgebraId& a) {
  Involution t{a, DenseMatrix(g), tau, sigma, InvolutionType{}};
  const double inv = sampled_involution_residual(t);
  if (inv > 1e-8) throw Error(ErrorCode::NotAnInvolution, "theta^2 != id", inv);
  if (sampled_identity_residual(t) <= 1e-10) return {InvolutionType{TypeTag::Trivial, 0, 0, false}, g};

  if (a.doubled) {
    const int b = a.block_size();
    if (sigma) {
      const TypeTag tag = (a.family == Family::SO) ? TypeTag::BD
                          : (a.family == Family::SP) ? TypeTag::C
                                                     : TypeTag::A;
      if (tau) throw Error(ErrorCode::Unclassifiable, "swap combined with conjugation");
      return {InvolutionType{tag, 0, 0, false}, g};
    }
    const double off = g.topRightCorner(b, b).norm() + g.bottomLeftCorner(b, b).norm();
    if (off > kClassifyTol * std::sqrt(2.0 * b))
      throw Error(ErrorCode::Unclassifiable, "conjugator mixes the two summands");
    AlgebraId base = a;
    base.doubled = false;
    const Classified c1 = classify_block(g.topLeftCorner(b, b), tau, a.family, a.n);
    const Classified c2 = classify_block(g.bottomRightCorner(b, b), tau, a.family, a.n);
    if (!(c1.type == c2.type)) throw Error(ErrorCode::Unclassifiable, "summands carry different types");
    InvolutionType t2 = c1.type;
    t2.doubled = true;
    return {t2, direct_sum(c1.G, c2.G)};
  }
  if (sigma) throw Error(ErrorCode::Unclassifiable, "swap on a simple algebra");
  return classify_block(g, tau, a.family, a.n);
}

// Orthonormalizes a list of algebra elements, dropping dependent ones.
AlgebraBasis orthonormalize(const std::vector<CMat>& in, double drop_tol) {
  AlgebraBasis out;
  for (const CMat& x : in) {
    CMat y = x;
    for (int pass = 0; pass < 2; ++pass)
      for (const CMat& b : out) y -= inner(b, y) * b;
    const double ny = y.norm();
    if (ny > drop_tol) out.push_back(y / ny);
  }
  return out;
}

// Matrix of a real-linear map in an orthonormal basis.
RMat coordinates_of_map(const AlgebraBasis& basis, const std::function<CMat(const CMat&)>& f,
                        double* leak) {
  const int d = static_cast<int>(basis.size());
  RMat t(d, d);
  double worst = 0.0;
  for (int j = 0; j < d; ++j) {
    const CMat y = f(basis[j]);
    CMat rest = y;
    for (int i = 0; i < d; ++i) {
      t(i, j) = inner(basis[i], y);
      rest -= t(i, j) * basis[i];
    }
    worst = std::max(worst, rest.norm());
  }
  if (leak) *leak = worst;
  return t;
}

std::string bits_of(int s, int c) {
  std::string out(c, '0');
  for (int j = 0; j < c; ++j)
    if ((s >> j) & 1) out[j] = '1';
  return out;
}

int parse_bits(const std::string& s) {
  int v = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] == '1') v |= 1 << j;
    else if (s[j] != '0') throw Error(ErrorCode::BadParams, "bitstring expected: " + s);
  }
  return v;
}

int tri(int n) { return n * (n - 1) / 2; }

}  // namespace

const char* tag_name(TypeTag t) {
  switch (t) {
    case TypeTag::A: return "A";
    case TypeTag::AI: return "AI";
    case TypeTag::AII: return "AII";
    case TypeTag::AIII: return "AIII";
    case TypeTag::BD: return "BD";
    case TypeTag::BDI: return "BDI";
    case TypeTag::DIII: return "DIII";
    case TypeTag::C: return "C";
    case TypeTag::CI: return "CI";
    case TypeTag::CII: return "CII";
    case TypeTag::Trivial: return "Trivial";
  }
  return "?";
}

std::string InvolutionType::name() const {
  std::string s = tag_name(tag);
  if (has_split()) s += "(" + std::to_string(p) + "," + std::to_string(q) + ")";
  if (doubled) s += "^2";
  return s;
}

InvolutionType parse_type(const std::string& s) {
  static const std::regex re(R"(^\s*([A-Za-z]+)\s*(?:\(\s*(\d+)\s*,\s*(\d+)\s*\))?\s*(\^2)?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw Error(ErrorCode::BadParams, "cannot parse involution type: " + s);
  const std::string tag = m[1];
  static const std::pair<const char*, TypeTag> tags[] = {
      {"A", TypeTag::A},     {"AI", TypeTag::AI},     {"AII", TypeTag::AII},
      {"AIII", TypeTag::AIII}, {"BD", TypeTag::BD},   {"BDI", TypeTag::BDI},
      {"DIII", TypeTag::DIII}, {"C", TypeTag::C},     {"CI", TypeTag::CI},
      {"CII", TypeTag::CII}, {"Trivial", TypeTag::Trivial}};
  InvolutionType t;
  bool found = false;
  for (const auto& [name, tg] : tags)
    if (tag == name) {
      t.tag = tg;
      found = true;
    }
  if (!found) throw Error(ErrorCode::BadParams, "unknown involution type: " + tag);
  if (m[2].matched) {
    if (!t.has_split()) throw Error(ErrorCode::BadParams, "type takes no split: " + s);
    t.p = std::stoi(m[2]);
    t.q = std::stoi(m[3]);
  } else if (t.has_split()) {
    throw Error(ErrorCode::BadParams, "type requires (p,q): " + s);
  }
  t.doubled = m[4].matched;
  return t;
}

int AlgebraId::dim() const {
  int d = 0;
  switch (family) {
    case Family::U: d = n * n; break;
    case Family::SU: d = n * n - 1; break;
    case Family::SO: d = tri(n); break;
    case Family::SP: d = n * (2 * n + 1); break;
  }
  return doubled ? 2 * d : d;
}

std::string AlgebraId::name() const {
  const char* f = family == Family::U ? "u" : family == Family::SU ? "su" : family == Family::SO ? "so" : "sp";
  std::string base = std::string(f) + "(" + std::to_string(n) + ")";
  return doubled ? base + "+" + base : base;
}

AlgebraId parse_algebra(const std::string& s) {
  static const std::regex re(R"(^\s*(u|su|so|sp)\((\d+)\)\s*(?:\+\s*(u|su|so|sp)\((\d+)\))?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw Error(ErrorCode::BadParams, "cannot parse algebra: " + s);
  AlgebraId a;
  const std::string f = m[1];
  a.family = f == "u" ? Family::U : f == "su" ? Family::SU : f == "so" ? Family::SO : Family::SP;
  a.n = std::stoi(m[2]);
  if (m[3].matched) {
    if (m[3] != m[1] || m[4] != m[2]) throw Error(ErrorCode::BadParams, "doubled algebra needs equal summands: " + s);
    a.doubled = true;
  }
  return a;
}

double inner(const CMat& x, const CMat& y) { return (x.adjoint() * y).trace().real(); }

AlgebraBasis algebra_basis(const AlgebraId& a) {
  const int b = a.block_size();
  std::vector<CMat> block;
  const cplx I(0.0, 1.0);
  const double r2 = 1.0 / std::sqrt(2.0);
  if (a.family == Family::SO) {
    for (int j = 0; j < b; ++j)
      for (int k = j + 1; k < b; ++k) {
        CMat x = CMat::Zero(b, b);
        x(j, k) = r2;
        x(k, j) = -r2;
        block.push_back(x);
      }
  } else {
    std::vector<CMat> raw;
    for (int j = 0; j < b; ++j) {
      CMat x = CMat::Zero(b, b);
      if (a.family == Family::SU) {
        if (j + 1 == b) continue;
        x(j, j) = I;
        x(j + 1, j + 1) = -I;
      } else {
        x(j, j) = I;
      }
      raw.push_back(x);
    }
    for (int j = 0; j < b; ++j)
      for (int k = j + 1; k < b; ++k) {
        CMat x = CMat::Zero(b, b);
        x(j, k) = r2;
        x(k, j) = -r2;
        raw.push_back(x);
        CMat y = CMat::Zero(b, b);
        y(j, k) = I * r2;
        y(k, j) = I * r2;
        raw.push_back(y);
      }
    if (a.family == Family::SP) {
      AlgebraId base = a;
      base.doubled = false;
      for (CMat& x : raw) x = project_to_algebra(base, x);
    }
    block = orthonormalize(raw, 1e-9);
  }
  if (!a.doubled) return block;
  AlgebraBasis out;
  for (const CMat& x : block) out.push_back(direct_sum(x, CMat(CMat::Zero(b, b))));
  for (const CMat& x : block) out.push_back(direct_sum(CMat(CMat::Zero(b, b)), x));
  return out;
}

AlgebraId canonical_algebra(const InvolutionType& type, int n) {
  switch (type.tag) {
    case TypeTag::A: return {Family::U, n, true};
    case TypeTag::AI: return {Family::U, n, false};
    case TypeTag::AII: return {Family::U, 2 * n, false};
    case TypeTag::AIII: return {Family::U, type.p + type.q, false};
    case TypeTag::BD: return {Family::SO, n, true};
    case TypeTag::BDI: return {Family::SO, type.p + type.q, false};
    case TypeTag::DIII: return {Family::SO, 2 * n, false};
    case TypeTag::C: return {Family::SP, n, true};
    case TypeTag::CI: return {Family::SP, n, false};
    case TypeTag::CII: return {Family::SP, type.p + type.q, false};
    case TypeTag::Trivial: break;
  }
  throw Error(ErrorCode::BadParams, "no canonical algebra for " + type.name());
}

Involution canonical_involution(const InvolutionType& type, int n) {
  if (type.doubled) throw Error(ErrorCode::BadParams, "no canonical form for doubled type " + type.name());
  if (type.has_split()) {
    if (type.p < 0 || type.q < 0 || type.p + type.q < 1)
      throw Error(ErrorCode::BadParams, "invalid split for " + type.name());
  } else if (n < 1) {
    throw Error(ErrorCode::BadParams, "size parameter must be positive for " + type.name());
  }
  Involution t;
  t.algebra = canonical_algebra(type, n);
  t.declared_type = type;
  switch (type.tag) {
    case TypeTag::A:
    case TypeTag::BD:
    case TypeTag::C:
      t.sigma = 1;
      t.G = DenseMatrix::identity(t.algebra.size());
      break;
    case TypeTag::AI:
      t.tau = 1;
      t.G = DenseMatrix::identity(n);
      break;
    case TypeTag::AII:
      t.tau = 1;
      t.G = DenseMatrix(symplectic_form(n));
      break;
    case TypeTag::AIII:
    case TypeTag::BDI:
      t.G = DenseMatrix(ipq(type.p, type.q));
      break;
    case TypeTag::DIII:
    case TypeTag::CI:
      t.G = DenseMatrix(symplectic_form(n));
      break;
    case TypeTag::CII:
      t.G = DenseMatrix(kpq(type.p, type.q));
      break;
    case TypeTag::Trivial:
      throw Error(ErrorCode::BadParams, "Trivial has no canonical algebra");
  }
  if (type.is_trivial()) t.declared_type = InvolutionType{TypeTag::Trivial, type.p, type.q, false};
  return t;
}

CMat apply_involution(const Involution& theta, const CMat& x) {
  const int s = theta.algebra.size();
  if (x.rows() != s || x.cols() != s || theta.G.rows() != s)
    throw Error(ErrorCode::DimMismatch, "element of size " + std::to_string(x.rows()) + " for algebra " +
                                            theta.algebra.name());
  CMat y = conj_if(x, theta.tau);
  if (theta.sigma) y = swap_halves(y);
  if (theta.G.is_real()) {
    const RMat& g = theta.G.real();
    return g * y * g.transpose();
  }
  const CMat& g = theta.G.complex();
  return g * y * g.adjoint();
}

DenseMatrix apply_involution(const Involution& theta, const DenseMatrix& x) {
  const CMat y = apply_involution(theta, x.to_complex());
  if (x.is_real() && y.imag().norm() <= 1e-14 * std::max(1.0, y.norm())) return DenseMatrix(RMat(y.real()));
  return DenseMatrix(y);
}

double involution_residual(const Involution& theta) { return sampled_involution_residual(theta); }

double conjugator_residual(const Involution& theta) {
  const CMat g = theta.G.to_complex();
  double r = unitarity_residual(g);
  const int n = static_cast<int>(g.rows());
  switch (theta.declared_type.tag) {
    case TypeTag::AI: r = std::max(r, (g - g.transpose()).norm()); break;
    case TypeTag::AII: r = std::max(r, (g + g.transpose()).norm()); break;
    case TypeTag::AIII:
    case TypeTag::CII: {
      r = std::max(r, (g - g.adjoint()).norm());
      const cplx d = g.determinant();
      r = std::max(r, std::min(std::abs(d - 1.0), std::abs(d + 1.0)));
      break;
    }
    case TypeTag::BDI:
      r = std::max({r, (g - g.transpose()).norm(), g.imag().norm()});
      break;
    case TypeTag::DIII:
      r = std::max({r, (g + g.transpose()).norm(), g.imag().norm()});
      break;
    case TypeTag::CI: r = std::max(r, (g + g.adjoint()).norm()); break;
    case TypeTag::A:
    case TypeTag::BD:
    case TypeTag::C:
      if (theta.sigma) r = std::max(r, (g.adjoint() - swap_halves(g)).norm());
      break;
    case TypeTag::Trivial: break;
  }
  (void)n;
  return r;
}

InvolutionType classify(const DenseMatrix& G, int tau, int sigma, const AlgebraId& algebra) {
  if (G.rows() != algebra.size() || G.cols() != algebra.size())
    throw Error(ErrorCode::DimMismatch, "conjugator size does not match " + algebra.name());
  return classify_impl(G.to_complex(), tau, sigma, algebra).type;
}

double commutator_residual(const Involution& t1, const Involution& t2) {
  double worst = 0.0;
  for (const CMat& x : sample_elements(t1.algebra, 6))
    worst = std::max(worst, (apply_involution(t1, apply_involution(t2, x)) - apply_involution(t2, apply_involution(t1, x))).norm());
  return worst;
}

Involution compose(const Involution& t1, const Involution& t2) {
  if (!(t1.algebra == t2.algebra)) throw Error(ErrorCode::DimMismatch, "involutions act on different algebras");
  const double res = commutator_residual(t1, t2);
  if (res > 1e-9) throw Error(ErrorCode::NonCommuting, "involutions do not commute", res);
  // theta1(theta2(x)) = G1 S1((G2 S2(x^{*t2}) G2^dag)^{*t1}) G1^dag.
  CMat g2 = conj_if(t2.G.to_complex(), t1.tau);
  if (t1.sigma) g2 = swap_halves(g2);
  const CMat g3 = t1.G.to_complex() * g2;
  Involution t3;
  t3.algebra = t1.algebra;
  t3.tau = t1.tau ^ t2.tau;
  t3.sigma = t1.sigma ^ t2.sigma;
  const Classified c = classify_impl(g3, t3.tau, t3.sigma, t3.algebra);
  t3.declared_type = c.type;
  if (c.G.imag().norm() <= 1e-13 * std::max(1.0, c.G.norm())) t3.G = DenseMatrix(RMat(c.G.real()));
  else t3.G = DenseMatrix(c.G);
  return t3;
}

Split eigensplit(const Involution& theta, const AlgebraBasis& basis) {
  const AlgebraBasis ortho = orthonormalize(basis, 1e-9);
  double leak = 0.0;
  coordinates_of_map(ortho, [&](const CMat& x) { return apply_involution(theta, x); }, &leak);
  if (leak > 1e-8) throw Error(ErrorCode::NotPreserved, "theta maps outside the span", leak);
  std::vector<CMat> kraw;
  std::vector<CMat> praw;
  for (const CMat& b : basis) {
    const CMat tb = apply_involution(theta, b);
    kraw.push_back(0.5 * (b + tb));
    praw.push_back(0.5 * (b - tb));
  }
  Split s{orthonormalize(kraw, 1e-9), orthonormalize(praw, 1e-9)};
  if (s.k.size() + s.p.size() != ortho.size())
    throw Error(ErrorCode::NotPreserved, "eigenspaces do not cover the span");
  return s;
}

int Grading::total_dim() const {
  int d = 0;
  for (const auto& [key, sub] : subspaces) d += static_cast<int>(sub.size());
  return d;
}

Grading grading_from_involutions(const std::vector<Involution>& thetas, const AlgebraBasis& basis) {
  const int c = static_cast<int>(thetas.size());
  if (c < 1 || c > 12) throw Error(ErrorCode::BadParams, "need between 1 and 12 involutions");
  const AlgebraBasis ortho = orthonormalize(basis, 1e-9);
  const int d = static_cast<int>(ortho.size());
  std::vector<RMat> maps;
  for (const Involution& t : thetas) {
    double leak = 0.0;
    maps.push_back(coordinates_of_map(ortho, [&](const CMat& x) { return apply_involution(t, x); }, &leak));
    if (leak > 1e-8) throw Error(ErrorCode::NotPreserved, "an involution maps outside the span", leak);
  }
  Grading g;
  g.c = c;
  int covered = 0;
  std::vector<std::string> short_keys;
  for (int s = 0; s < (1 << c); ++s) {
    // Joint eigenspace as the null space of the stacked (T_j - eps_j I).
    RMat stacked(c * d, d);
    for (int j = 0; j < c; ++j) {
      const double eps = ((s >> j) & 1) ? -1.0 : 1.0;
      stacked.middleRows(j * d, d) = maps[j] - eps * RMat::Identity(d, d);
    }
    Eigen::JacobiSVD<RMat> svd(stacked, Eigen::ComputeFullV);
    const RVec sv = svd.singularValues();
    AlgebraBasis sub;
    for (int k = 0; k < d; ++k) {
      if (sv(k) > 1e-8) continue;
      CMat x = CMat::Zero(ortho[0].rows(), ortho[0].cols());
      for (int i = 0; i < d; ++i) x += svd.matrixV()(i, k) * ortho[i];
      sub.push_back(x);
    }
    sub = orthonormalize(sub, 1e-9);
    covered += static_cast<int>(sub.size());
    if (!sub.empty()) g.subspaces[bits_of(s, c)] = sub;
  }
  double comm = 0.0;
  for (int a = 0; a < c; ++a)
    for (int b = a + 1; b < c; ++b)
      comm = std::max(comm, (maps[a] * maps[b] - maps[b] * maps[a]).norm());
  if (covered != d || comm > 1e-8) {
    std::ostringstream os;
    os << "intersections span only " << covered << " of " << d << " dims";
    throw Error(ErrorCode::Incompatible, os.str(), comm);
  }
  return g;
}

double grading_residual(const Grading& g, int max_pairs) {
  std::vector<std::pair<std::string, const CMat*>> all;
  for (const auto& [key, sub] : g.subspaces)
    for (const CMat& x : sub) all.push_back({key, &x});
  const std::size_t m = all.size();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, m ? m - 1 : 0);
  const bool exhaustive = m * m <= static_cast<std::size_t>(max_pairs);
  const std::size_t count = exhaustive ? m * m : static_cast<std::size_t>(max_pairs);
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t a = exhaustive ? k / m : pick(rng);
    const std::size_t b = exhaustive ? k % m : pick(rng);
    const CMat& x = *all[a].second;
    const CMat& y = *all[b].second;
    const CMat z = x * y - y * x;
    const int key = parse_bits(all[a].first) ^ parse_bits(all[b].first);
    CMat rest = z;
    auto it = g.subspaces.find(bits_of(key, g.c));
    if (it != g.subspaces.end())
      for (const CMat& e : it->second) rest -= inner(e, z) * e;
    worst = std::max(worst, rest.norm());
  }
  return worst;
}

GradingCd cd_from_grading(const Grading& g, const std::vector<std::string>& Q,
                          const std::map<std::string, int>& phi) {
  std::vector<int> q;
  for (const std::string& s : Q) {
    if (static_cast<int>(s.size()) != g.c) throw Error(ErrorCode::BadParams, "bitstring length mismatch: " + s);
    q.push_back(parse_bits(s));
  }
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  auto in_q = [&](int s) { return std::binary_search(q.begin(), q.end(), s); };
  if (!in_q(0)) throw Error(ErrorCode::NotSubgroup, "Q does not contain the identity");
  for (int a : q)
    for (int b : q)
      if (!in_q(a ^ b)) throw Error(ErrorCode::NotSubgroup, "Q is not closed under xor");
  std::map<int, int> f;
  for (int s : q) {
    auto it = phi.find(bits_of(s, g.c));
    const int v = it == phi.end() ? 0 : it->second;
    if (v != 0 && v != 1) throw Error(ErrorCode::NotHomomorphism, "phi must map into {0,1}");
    f[s] = v;
  }
  for (int a : q)
    for (int b : q)
      if (f[a ^ b] != (f[a] ^ f[b])) throw Error(ErrorCode::NotHomomorphism, "phi is not a homomorphism");
  GradingCd out;
  bool surjective = false;
  for (int s : q) {
    auto it = g.subspaces.find(bits_of(s, g.c));
    if (f[s]) surjective = true;
    if (it == g.subspaces.end()) continue;
    for (const CMat& x : it->second) {
      out.subalgebra.push_back(x);
      (f[s] ? out.p : out.k).push_back(x);
    }
  }
  out.improper = !surjective;
  return out;
}

Involution lift_step(const Involution& theta1, const Involution& theta2, const DenseMatrix& basis) {
  const Classified c1 = classify_impl(theta1.G.to_complex(), theta1.tau, theta1.sigma, theta1.algebra);
  const TypeTag t1 = c1.type.tag;
  const CMat u = basis.to_complex();
  const int s = theta1.algebra.size();
  if (u.rows() != s || u.cols() != s) throw Error(ErrorCode::DimMismatch, "basis change has wrong size");
  const CMat x = theta2.G.to_complex();
  CMat g;
  int tau = theta2.tau;
  if (t1 == TypeTag::A || t1 == TypeTag::BD || t1 == TypeTag::C) {
    if (x.rows() != s / 2) throw Error(ErrorCode::DimMismatch, "theta2 must act on one summand");
    if (theta2.sigma) throw Error(ErrorCode::BadParams, "theta2 on a summand cannot swap");
    g = u.adjoint() * direct_sum(x, x) * conj_if(u, tau);
  } else if (t1 == TypeTag::DIII || t1 == TypeTag::CI) {
    const int m = s / 2;
    if (x.rows() != m) throw Error(ErrorCode::DimMismatch, "theta2 must act on u(n)");
    if (theta2.sigma) throw Error(ErrorCode::BadParams, "theta2 on u(n) cannot swap");
    const double sg = tau ? -1.0 : 1.0;
    RMat phi(2 * m, 2 * m);
    phi << x.real(), sg * x.imag(), -x.imag(), sg * x.real();
    g = u.adjoint() * phi.cast<cplx>() * u;
    tau = 0;
  } else if (t1 == TypeTag::Trivial) {
    throw Error(ErrorCode::BadParams, "cannot lift through a trivial involution");
  } else {
    if (x.rows() != s) throw Error(ErrorCode::DimMismatch, "theta2 must be given in the parent representation");
    CMat xs = x;
    if (theta2.sigma) {
      // Swap of the two K blocks of an (n,n) split in the parent basis.
      if (t1 == TypeTag::CII) xs = x * direct_sum(swap_matrix(s / 4), swap_matrix(s / 4));
      else xs = x * swap_matrix(s / 2);
    }
    g = u.adjoint() * xs * conj_if(u, tau);
  }
  Involution out;
  out.algebra = theta1.algebra;
  out.tau = tau;
  out.sigma = 0;
  try {
    const Classified c = classify_impl(g, tau, 0, out.algebra);
    out.declared_type = c.type;
    out.G = DenseMatrix(c.G);
  } catch (const Error& e) {
    throw Error(ErrorCode::Inhomogeneous, std::string("lift is not a Cartan involution: ") + e.what());
  }
  return out;
}

SpaceInfo space_info(const InvolutionType& type, int n) {
  if (type.has_split() ? (type.p < 0 || type.q < 0 || type.p + type.q < 1) : n < 1)
    throw Error(ErrorCode::BadParams, "invalid parameters for " + type.name());
  const int p = type.p;
  const int q = type.q;
  const int r = std::min(p, q);
  SpaceInfo s;
  switch (type.tag) {
    case TypeTag::A: s.dim_G = 2 * n * n; s.dim_K = n * n; s.rank = n; break;
    case TypeTag::AI: s.dim_G = n * n; s.dim_K = tri(n); s.rank = n; break;
    case TypeTag::AII: s.dim_G = 4 * n * n; s.dim_K = n * (2 * n + 1); s.rank = n; break;
    case TypeTag::AIII: s.dim_G = (p + q) * (p + q); s.dim_K = p * p + q * q; s.rank = r; break;
    case TypeTag::BD: s.dim_G = 2 * tri(n); s.dim_K = tri(n); s.rank = n / 2; break;
    case TypeTag::BDI: s.dim_G = tri(p + q); s.dim_K = tri(p) + tri(q); s.rank = r; break;
    case TypeTag::DIII: s.dim_G = tri(2 * n); s.dim_K = n * n; s.rank = n / 2; break;
    case TypeTag::C: s.dim_G = 2 * n * (2 * n + 1); s.dim_K = n * (2 * n + 1); s.rank = n; break;
    case TypeTag::CI: s.dim_G = n * (2 * n + 1); s.dim_K = n * n; s.rank = n; break;
    case TypeTag::CII:
      s.dim_G = (p + q) * (2 * (p + q) + 1);
      s.dim_K = p * (2 * p + 1) + q * (2 * q + 1);
      s.rank = r;
      break;
    case TypeTag::Trivial: throw Error(ErrorCode::BadParams, "no space info for Trivial");
  }
  s.dim_P = s.dim_G - s.dim_K;
  s.overparam = 2 * s.dim_K + s.rank - s.dim_G;
  return s;
}

nlohmann::json to_json(const Involution& theta) {
  return {{"algebra", theta.algebra.name()},
          {"type", theta.declared_type.name()},
          {"tau", theta.tau},
          {"sigma", theta.sigma},
          {"G", to_json(theta.G)}};
}

Involution involution_from_json(const nlohmann::json& j) {
  Involution t;
  t.algebra = parse_algebra(j.at("algebra").get<std::string>());
  t.tau = j.value("tau", 0);
  t.sigma = j.value("sigma", 0);
  t.G = matrix_from_json(j.at("G"));
  if (j.contains("type")) t.declared_type = parse_type(j.at("type").get<std::string>());
  else t.declared_type = classify(t);
  return t;
}

}  // namespace cartan
