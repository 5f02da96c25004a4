#include "cartan/recursion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <future>

#include "cartan/error.hpp"

namespace cartan {

namespace {

PlanNode leaf(const AlgebraId& alg, int c = 0, int d = 0) {
  PlanNode n;
  n.algebra = alg;
  n.pad_c = c;
  n.pad_d = d;
  return n;
}

AlgebraId alg(Family f, int n, bool doubled = false) {
  AlgebraId a;
  a.family = f;
  a.n = n;
  a.doubled = doubled;
  return a;
}

InvolutionType split_type(TypeTag tag, int p, int q) {
  InvolutionType t;
  t.tag = tag;
  t.p = p;
  t.q = q;
  return t;
}

InvolutionType plain_type(TypeTag tag) {
  InvolutionType t;
  t.tag = tag;
  return t;
}

int log2_exact(int m) {
  int k = 0;
  while ((1 << k) < m) ++k;
  if ((1 << k) != m) throw Error(ErrorCode::BadDim, std::to_string(m) + " is not a power of two");
  return k;
}

// Permutation P with P e_i = e_{f(i)} on 2^k indices.
RMat index_permutation(int k, const std::function<int(int)>& f) {
  const int s = 1 << k;
  RMat p = RMat::Zero(s, s);
  for (int i = 0; i < s; ++i) p(f(i), i) = 1.0;
  return p;
}

// SO(m) canonical BDI chain; pads are relative to the enclosing matrix.
PlanNode canonical_bdi_node(int m, int c, int d) {
  if (m <= 2) return leaf(alg(Family::SO, m), c, d);
  const int p = (m + 1) / 2;
  const int q = m / 2;
  PlanNode n;
  n.algebra = alg(Family::SO, m);
  n.type = split_type(TypeTag::BDI, p, q);
  n.pad_c = c;
  n.pad_d = d;
  n.children.push_back(canonical_bdi_node(p, c, d + q));
  n.children.push_back(canonical_bdi_node(q, c + p, d));
  return n;
}

PlanNode unitary_optimal(int n) {
  if (n <= 2) return leaf(alg(Family::U, n));
  PlanNode node;
  node.algebra = alg(Family::U, n);
  node.type = plain_type(TypeTag::AI);
  node.n_param = n;
  node.children.push_back(canonical_bdi_node(n, 0, 0));
  return node;
}

PlanNode qsd_node(int N) {
  const int s = 1 << N;
  if (N == 1) return leaf(alg(Family::U, 2));
  const int h = s / 2;
  PlanNode pair;
  pair.algebra = alg(Family::U, h, true);
  pair.type = plain_type(TypeTag::A);
  pair.n_param = h;
  pair.children.push_back(qsd_node(N - 1));
  PlanNode n;
  n.algebra = alg(Family::U, s);
  n.type = split_type(TypeTag::AIII, h, h);
  n.children.push_back(std::move(pair));
  return n;
}

// SO(m), m = 2^k: BDI(m/2, m/2) then BD on the pair, with the Schur pairs
// of the BD torus moved from the last to the leading qubit of each block.
PlanNode orthogonal_node(int m) {
  if (m <= 2) return leaf(alg(Family::SO, m));
  const int h = m / 2;
  const int k = log2_exact(m);
  PlanNode bd;
  bd.algebra = alg(Family::SO, h, true);
  bd.type = plain_type(TypeTag::BD);
  bd.n_param = h;
  if (h >= 4) {
    const int hb = k - 1;
    bd.basis_change = DenseMatrix(index_permutation(k, [h, hb](int i) {
      const int pair = i & h;
      const int x = i & (h - 1);
      return pair | (x >> 1) | ((x & 1) << (hb - 1));
    }));
  }
  bd.children.push_back(orthogonal_node(h));
  PlanNode n;
  n.algebra = alg(Family::SO, m);
  n.type = split_type(TypeTag::BDI, h, h);
  n.children.push_back(std::move(bd));
  return n;
}

// Sp(m), 2m = 2^k: CII(m/2, m/2) split on the last qubit, then C on the pair.
PlanNode symplectic_node(int m) {
  if (m == 1) return leaf(alg(Family::SP, 1));
  const int k = log2_exact(2 * m);
  PlanNode c;
  c.algebra = alg(Family::SP, m / 2, true);
  c.type = plain_type(TypeTag::C);
  c.n_param = m / 2;
  c.children.push_back(symplectic_node(m / 2));
  PlanNode n;
  n.algebra = alg(Family::SP, m);
  n.type = split_type(TypeTag::CII, m / 2, m / 2);
  if (k >= 3) {
    const int low = k - 1;
    const int mask = (1 << low) - 1;
    n.basis_change = DenseMatrix(index_permutation(k, [low, mask](int i) {
      const int top = i & (1 << low);
      const int x = i & mask;
      return top | ((x << 1) & mask) | (x >> (low - 1));
    }));
  }
  n.children.push_back(std::move(c));
  return n;
}

int node_depth(const PlanNode& n) {
  int d = 0;
  for (const PlanNode& c : n.children) d = std::max(d, node_depth(c));
  return d + 1;
}

long long node_params(const PlanNode& n) {
  if (n.is_leaf()) return n.algebra.dim();
  long long s = space_info(n.type, n.n_param).rank;
  for (const PlanNode& c : n.children) s += 2 * node_params(c);
  return s;
}

}  // namespace

int Plan::depth() const { return node_depth(root); }

PlanTemplate parse_template(const std::string& s) {
  if (s == "param_optimal") return PlanTemplate::ParamOptimal;
  if (s == "canonical_bdi") return PlanTemplate::CanonicalBdi;
  if (s == "qsd") return PlanTemplate::Qsd;
  if (s == "block_zxz") return PlanTemplate::BlockZxz;
  if (s == "completely_orthogonal") return PlanTemplate::CompletelyOrthogonal;
  if (s == "completely_symplectic") return PlanTemplate::CompletelySymplectic;
  throw Error(ErrorCode::BadParams, "unknown plan template '" + s + "'");
}

const char* template_name(PlanTemplate t) {
  switch (t) {
    case PlanTemplate::ParamOptimal: return "param_optimal";
    case PlanTemplate::CanonicalBdi: return "canonical_bdi";
    case PlanTemplate::Qsd: return "qsd";
    case PlanTemplate::BlockZxz: return "block_zxz";
    case PlanTemplate::CompletelyOrthogonal: return "completely_orthogonal";
    case PlanTemplate::CompletelySymplectic: return "completely_symplectic";
  }
  return "canonical_bdi";
}

Plan build_plan(const PlanRequest& req) {
  Plan plan;
  plan.template_name = template_name(req.kind);
  plan.param = req.n;
  if (req.n < 1) throw Error(ErrorCode::BadParams, "plan size must be positive");
  const bool qubits = req.kind == PlanTemplate::Qsd || req.kind == PlanTemplate::BlockZxz ||
                      req.kind == PlanTemplate::CompletelyOrthogonal ||
                      req.kind == PlanTemplate::CompletelySymplectic;
  if (qubits && req.n > 14) throw Error(ErrorCode::BadParams, "qubit count above 14");
  switch (req.kind) {
    case PlanTemplate::CanonicalBdi: plan.root = canonical_bdi_node(req.n, 0, 0); break;
    case PlanTemplate::ParamOptimal:
      switch (req.family) {
        case Family::SO: plan.root = canonical_bdi_node(req.n, 0, 0); break;
        case Family::U:
        case Family::SU: plan.root = unitary_optimal(req.n); break;
        case Family::SP:
          if (req.n == 1) {
            plan.root = leaf(alg(Family::SP, 1));
          } else {
            plan.root.algebra = alg(Family::SP, req.n);
            plan.root.type = plain_type(TypeTag::CI);
            plan.root.n_param = req.n;
            plan.root.children.push_back(unitary_optimal(req.n));
          }
          break;
      }
      break;
    case PlanTemplate::Qsd:
    case PlanTemplate::BlockZxz:
      plan.root = qsd_node(req.n);
      plan.csa_axis = req.kind == PlanTemplate::Qsd ? "Y" : "X";
      break;
    case PlanTemplate::CompletelyOrthogonal: {
      const int s = 1 << req.n;
      plan.root.algebra = alg(Family::U, s);
      plan.root.type = plain_type(TypeTag::AI);
      plan.root.n_param = s;
      plan.root.children.push_back(orthogonal_node(s));
      break;
    }
    case PlanTemplate::CompletelySymplectic: {
      const int s = 1 << req.n;
      plan.root.algebra = alg(Family::U, s);
      plan.root.type = plain_type(TypeTag::AII);
      plan.root.n_param = s / 2;
      plan.root.children.push_back(symplectic_node(s / 2));
      break;
    }
  }
  return plan;
}

ParamCount count_parameters(const Plan& plan) {
  ParamCount c;
  c.total_params = node_params(plan.root);
  c.overparam = c.total_params - plan.root.algebra.dim();
  return c;
}

// ---------------------------------------------------------------------------

CMat apply_embed(const EmbedStep& e, const CMat& m) {
  switch (e.kind) {
    case EmbedStep::Kind::Identity: return m;
    case EmbedStep::Kind::Block: {
      CMat out = CMat::Identity(e.parent_size, e.parent_size);
      out.block(e.offset, e.offset, m.rows(), m.cols()) = m;
      return out;
    }
    case EmbedStep::Kind::Indices: {
      CMat out = CMat::Identity(e.parent_size, e.parent_size);
      const int s = static_cast<int>(e.idx.size());
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) out(e.idx[i], e.idx[j]) = m(i, j);
      return out;
    }
    case EmbedStep::Kind::Pair: return direct_sum<CMat>(m, m);
    case EmbedStep::Kind::Realify: {
      const int n = static_cast<int>(m.rows());
      CMat out(2 * n, 2 * n);
      const RMat re = m.real();
      const RMat im = m.imag();
      out << re.cast<cplx>(), (-im).cast<cplx>(), im.cast<cplx>(), re.cast<cplx>();
      return out;
    }
  }
  return m;
}

namespace {

struct Sub {
  DenseMatrix m;
  EmbedStep embed;
};

DenseMatrix block_of(const DenseMatrix& k, int off, int s) {
  if (k.is_real()) return DenseMatrix(RMat(k.real().block(off, off, s, s)));
  return DenseMatrix(CMat(k.complex().block(off, off, s, s)));
}

DenseMatrix gather(const DenseMatrix& k, const std::vector<int>& idx) {
  const int s = static_cast<int>(idx.size());
  if (k.is_real()) {
    RMat out(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) out(i, j) = k.real()(idx[i], idx[j]);
    return DenseMatrix(out);
  }
  CMat out(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) out(i, j) = k.complex()(idx[i], idx[j]);
  return DenseMatrix(out);
}

// Carrier for a child group: real for SO, complex otherwise.
DenseMatrix as_carrier(const DenseMatrix& m, const AlgebraId& a) {
  if (a.is_real()) return m.is_real() ? m : DenseMatrix(m.to_real(1e-9));
  return m.is_real() ? DenseMatrix(m.to_complex()) : m;
}

std::vector<int> range(int b, int e) {
  std::vector<int> v;
  for (int i = b; i < e; ++i) v.push_back(i);
  return v;
}

// Sub-blocks of a K factor (canonical frame) handed to the child plans.
std::vector<Sub> child_blocks(const PlanNode& pn, const DenseMatrix& k) {
  const int size = k.rows();
  std::vector<Sub> out;
  const bool paired = pn.children.size() == 1 && pn.children[0].algebra.doubled;
  auto ident = [&]() {
    EmbedStep e;
    e.parent_size = size;
    return e;
  };
  switch (pn.type.tag) {
    case TypeTag::A:
    case TypeTag::BD:
    case TypeTag::C: {
      EmbedStep e = ident();
      e.kind = EmbedStep::Kind::Pair;
      out.push_back({block_of(k, 0, size / 2), e});
      break;
    }
    case TypeTag::AI:
    case TypeTag::AII: out.push_back({k, ident()}); break;
    case TypeTag::CI:
    case TypeTag::DIII: {
      const int n = size / 2;
      const CMat kc = k.to_complex();
      const CMat u = kc.topLeftCorner(n, n).real().cast<cplx>() +
                     cplx(0.0, 1.0) * kc.bottomLeftCorner(n, n).real().cast<cplx>();
      EmbedStep e = ident();
      e.kind = EmbedStep::Kind::Realify;
      out.push_back({DenseMatrix(u), e});
      break;
    }
    case TypeTag::AIII:
    case TypeTag::BDI: {
      const int p = pn.type.p;
      const int q = pn.type.q;
      if (paired) {
        out.push_back({k, ident()});
        break;
      }
      EmbedStep ep = ident();
      ep.kind = EmbedStep::Kind::Block;
      EmbedStep eq = ep;
      eq.offset = p;
      out.push_back({block_of(k, 0, p), ep});
      out.push_back({block_of(k, p, q), eq});
      break;
    }
    case TypeTag::CII: {
      const int p = pn.type.p;
      const int q = pn.type.q;
      const int n = p + q;
      std::vector<int> ip = range(0, p);
      for (int i : range(n, n + p)) ip.push_back(i);
      std::vector<int> iq = range(p, n);
      for (int i : range(n + p, 2 * n)) iq.push_back(i);
      EmbedStep e = ident();
      e.kind = EmbedStep::Kind::Indices;
      if (paired) {
        e.idx = ip;
        e.idx.insert(e.idx.end(), iq.begin(), iq.end());
        out.push_back({gather(k, e.idx), e});
        break;
      }
      e.idx = ip;
      out.push_back({gather(k, ip), e});
      e.idx = iq;
      out.push_back({gather(k, iq), e});
      break;
    }
    case TypeTag::Trivial: break;
  }
  if (out.size() != pn.children.size()) {
    throw Error(ErrorCode::BadParams, "plan node " + pn.type.name() + " has " + std::to_string(pn.children.size()) +
                                          " children but " + std::to_string(out.size()) + " K blocks");
  }
  for (size_t i = 0; i < out.size(); ++i) out[i].m = as_carrier(out[i].m, pn.children[i].algebra);
  return out;
}

DenseMatrix conjugate(const DenseMatrix& b, const DenseMatrix& m, bool inverse) {
  if (b.is_real() && m.is_real()) {
    const RMat& br = b.real();
    return DenseMatrix(RMat(inverse ? RMat(br.transpose() * m.real() * br) : RMat(br * m.real() * br.transpose())));
  }
  const CMat bc = b.to_complex();
  const CMat mc = m.to_complex();
  return DenseMatrix(CMat(inverse ? CMat(bc.adjoint() * mc * bc) : CMat(bc * mc * bc.adjoint())));
}

std::string strip_code(const Error& e) {
  const std::string w = e.what();
  const size_t skip = std::strlen(error_code_name(e.code())) + 2;
  return w.size() >= skip ? w.substr(skip) : w;
}

struct Runner {
  RecursionOptions opt;
  std::atomic<int> spare{0};

  FactorNode run(const DenseMatrix& g, const PlanNode& pn, const std::string& path, const EmbedStep& embed) {
    FactorNode node;
    node.type = pn.type;
    node.size = pn.size();
    node.n_param = pn.n_param;
    node.embed = embed;
    node.path = path;
    if (g.rows() != pn.size()) {
      throw Error(ErrorCode::DimMismatch, path + ": block of size " + std::to_string(g.rows()) + " for " +
                                              pn.algebra.name());
    }
    if (pn.is_leaf()) {
      node.leaf = g;
      return node;
    }
    KakFactors f;
    try {
      const DenseMatrix gc = pn.basis_change.rows() ? conjugate(pn.basis_change, g, true) : g;
      KakOptions ko;
      ko.tol = opt.tol;
      f = kak_decompose(gc, pn.type, ko);
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + strip_code(e), e.residual());
    }
    expand(node, f, pn, path, false);
    return node;
  }

  void expand(FactorNode& node, KakFactors& f, const PlanNode& pn, const std::string& path, bool skip_k2) {
    node.a = f.a;
    if (pn.basis_change.rows()) node.basis_change = std::make_shared<const DenseMatrix>(pn.basis_change);
    const std::vector<Sub> s1 = child_blocks(pn, f.k1);
    const std::vector<Sub> s2 = skip_k2 ? std::vector<Sub>{} : child_blocks(pn, f.k2);
    std::vector<std::future<FactorNode>> pending;
    auto launch = [&](const Sub& s, const PlanNode& child, const std::string& p) {
      if (spare.fetch_sub(1) > 0) {
        pending.push_back(std::async(std::launch::async, [this, s, &child, p]() {
          FactorNode r = run(s.m, child, p, s.embed);
          spare.fetch_add(1);
          return r;
        }));
        return true;
      }
      spare.fetch_add(1);
      return false;
    };
    // Slots are filled by position, independent of completion order.
    node.k1_children.resize(s1.size());
    node.k2_children.resize(s2.size());
    std::vector<FactorNode*> slots;
    for (size_t i = 0; i < s1.size(); ++i) {
      const std::string p = path + "/k1." + std::to_string(i);
      if (launch(s1[i], pn.children[i], p)) slots.push_back(&node.k1_children[i]);
      else node.k1_children[i] = run(s1[i].m, pn.children[i], p, s1[i].embed);
    }
    for (size_t i = 0; i < s2.size(); ++i) {
      const std::string p = path + "/k2." + std::to_string(i);
      if (launch(s2[i], pn.children[i], p)) slots.push_back(&node.k2_children[i]);
      else node.k2_children[i] = run(s2[i].m, pn.children[i], p, s2[i].embed);
    }
    for (size_t i = 0; i < pending.size(); ++i) *slots[i] = pending[i].get();
    if (opt.keep_factors) node.factors = std::make_unique<KakFactors>(std::move(f));
  }
};

// Transpose of a real subtree: (X A Y)^T = Y^T A^T X^T.
FactorNode mirrored(const FactorNode& n, const std::string& path) {
  FactorNode m;
  m.type = n.type;
  m.size = n.size;
  m.n_param = n.n_param;
  m.embed = n.embed;
  m.path = path;
  m.basis_change = n.basis_change;
  if (n.is_leaf()) {
    m.leaf = DenseMatrix(RMat(n.leaf.to_real(1e-9).transpose()));
    return m;
  }
  if (!n.a.is_real()) throw Error(ErrorCode::BadParams, "mirroring needs a real CSG element");
  m.a = n.a;
  for (double& x : m.a.angles) x = -x;
  for (size_t i = 0; i < n.k2_children.size(); ++i)
    m.k1_children.push_back(mirrored(n.k2_children[i], path + "/k1." + std::to_string(i)));
  for (size_t i = 0; i < n.k1_children.size(); ++i)
    m.k2_children.push_back(mirrored(n.k1_children[i], path + "/k2." + std::to_string(i)));
  return m;
}

void link(FactorNode& n, const FactorNode* parent) {
  n.parent = parent;
  for (FactorNode& c : n.k1_children) link(c, &n);
  for (FactorNode& c : n.k2_children) link(c, &n);
}

}  // namespace

FactorTree recursive_decompose(const DenseMatrix& G, const Plan& plan, const RecursionOptions& opt) {
  Runner r;
  r.opt = opt;
  r.spare = std::max(0, opt.threads - 1);
  FactorTree t;
  t.plan = plan;
  t.root_size = plan.root.size();
  t.root = std::make_unique<FactorNode>(r.run(as_carrier(G, plan.root.algebra), plan.root, "r", EmbedStep{}));
  link(*t.root, nullptr);
  return t;
}

FactorTree recursive_decompose_from(const KakFactors& root, const Plan& plan, bool mirror_k2,
                                    const RecursionOptions& opt) {
  if (plan.root.is_leaf()) throw Error(ErrorCode::BadParams, "plan root is a leaf");
  Runner r;
  r.opt = opt;
  r.spare = std::max(0, opt.threads - 1);
  FactorTree t;
  t.plan = plan;
  t.root_size = plan.root.size();
  t.root = std::make_unique<FactorNode>();
  FactorNode& n = *t.root;
  n.type = plan.root.type;
  n.size = plan.root.size();
  n.n_param = plan.root.n_param;
  n.path = "r";
  KakFactors f = root;
  r.expand(n, f, plan.root, "r", mirror_k2);
  if (mirror_k2) {
    for (size_t i = 0; i < n.k1_children.size(); ++i)
      n.k2_children.push_back(mirrored(n.k1_children[i], "r/k2." + std::to_string(i)));
  }
  link(n, nullptr);
  return t;
}

// ---------------------------------------------------------------------------

namespace {

void flatten_into(const FactorNode& n, bool split, std::vector<FlatItem>& out) {
  if (n.is_leaf()) {
    FlatItem it;
    it.node = &n;
    if (split && n.size == 2 && n.leaf.is_real()) {
      const RMat& m = n.leaf.real();
      it.kind = FlatItem::Kind::Givens;
      it.mu = 0;
      it.nu = 1;
      it.eta = std::atan2(m(0, 1), m(0, 0));
    } else if (split && n.size == 1) {
      return;
    } else {
      it.kind = FlatItem::Kind::Matrix;
    }
    out.push_back(it);
    return;
  }
  for (const FactorNode& c : n.k1_children) flatten_into(c, split, out);
  const CsgElement& a = n.a;
  if (split && a.is_real() && a.doubling == Doubling::None) {
    const int r = static_cast<int>(a.angles.size());
    for (int j = 0; j < r; ++j) {
      FlatItem it;
      it.kind = FlatItem::Kind::Givens;
      it.node = &n;
      if (a.kind == CsgKind::CS) {
        it.mu = j;
        it.nu = a.p + a.q - std::min(a.p, a.q) + j;
      } else {
        it.mu = 2 * j;
        it.nu = 2 * j + 1;
      }
      it.eta = a.angles[j];
      out.push_back(it);
    }
  } else {
    FlatItem it;
    it.kind = FlatItem::Kind::Csg;
    it.node = &n;
    out.push_back(it);
  }
  for (const FactorNode& c : n.k2_children) flatten_into(c, split, out);
}

CMat conj_by(const FactorNode& n, const CMat& m) {
  if (!n.basis_change) return m;
  const CMat b = n.basis_change->to_complex();
  return b * m * b.adjoint();
}

}  // namespace

std::vector<FlatItem> flatten(const FactorTree& t, bool split_csg) {
  std::vector<FlatItem> out;
  if (t.root) flatten_into(*t.root, split_csg, out);
  return out;
}

CMat materialize(const FlatItem& item, int root_size) {
  const FactorNode* n = item.node;
  CMat m;
  bool canonical = false;
  switch (item.kind) {
    case FlatItem::Kind::Matrix: m = n->leaf.to_complex(); break;
    case FlatItem::Kind::Csg:
      m = n->a.materialize_complex();
      canonical = true;
      break;
    case FlatItem::Kind::Givens: {
      m = CMat::Identity(n->size, n->size);
      const double c = std::cos(item.eta);
      const double s = std::sin(item.eta);
      m(item.mu, item.mu) = c;
      m(item.nu, item.nu) = c;
      m(item.mu, item.nu) = s;
      m(item.nu, item.mu) = -s;
      canonical = !n->is_leaf();
      break;
    }
  }
  if (canonical) m = conj_by(*n, m);
  while (n->parent) {
    m = apply_embed(n->embed, m);
    n = n->parent;
    m = conj_by(*n, m);
  }
  if (m.rows() != root_size) throw Error(ErrorCode::DimMismatch, "item does not embed into the root");
  return m;
}

bool root_plane(const FlatItem& item, int& mu, int& nu) {
  if (item.kind != FlatItem::Kind::Givens) return false;
  const FactorNode* n = item.node;
  mu = item.mu;
  nu = item.nu;
  if (!n->is_leaf() && n->basis_change) return false;
  while (n->parent) {
    const EmbedStep& e = n->embed;
    switch (e.kind) {
      case EmbedStep::Kind::Identity: break;
      case EmbedStep::Kind::Block:
        mu += e.offset;
        nu += e.offset;
        break;
      case EmbedStep::Kind::Indices:
        mu = e.idx[mu];
        nu = e.idx[nu];
        break;
      default: return false;
    }
    n = n->parent;
    if (n->basis_change) return false;
  }
  return true;
}

CMat flatten_product(const FactorTree& t) {
  CMat p = CMat::Identity(t.root_size, t.root_size);
  for (const FlatItem& it : flatten(t)) p = p * materialize(it, t.root_size);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json node_json(const PlanNode& n) {
  nlohmann::json j;
  j["algebra"] = n.algebra.name();
  j["type"] = n.is_leaf() ? "leaf" : n.type.name();
  if (n.n_param) j["n"] = n.n_param;
  j["pad"] = {n.pad_c, n.pad_d};
  if (n.basis_change.rows()) j["basis_change"] = to_json(n.basis_change);
  j["children"] = nlohmann::json::array();
  for (const PlanNode& c : n.children) j["children"].push_back(node_json(c));
  return j;
}

PlanNode node_from_json(const nlohmann::json& j) {
  PlanNode n;
  n.algebra = parse_algebra(j.at("algebra").get<std::string>());
  const std::string t = j.at("type").get<std::string>();
  if (t != "leaf") n.type = parse_type(t);
  n.n_param = j.value("n", 0);
  if (j.contains("pad")) {
    n.pad_c = j["pad"].at(0).get<int>();
    n.pad_d = j["pad"].at(1).get<int>();
  }
  if (j.contains("basis_change")) n.basis_change = matrix_from_json(j["basis_change"]);
  if (j.contains("children"))
    for (const auto& c : j["children"]) n.children.push_back(node_from_json(c));
  return n;
}

nlohmann::json tree_json(const FactorNode& n) {
  nlohmann::json j;
  j["path"] = n.path;
  if (n.is_leaf()) {
    j["leaf"] = to_json(n.leaf);
    return j;
  }
  j["type"] = n.type.name();
  j["a"] = to_json(n.a);
  if (n.basis_change) j["basis_change"] = to_json(*n.basis_change);
  j["k1"] = nlohmann::json::array();
  j["k2"] = nlohmann::json::array();
  for (const FactorNode& c : n.k1_children) j["k1"].push_back(tree_json(c));
  for (const FactorNode& c : n.k2_children) j["k2"].push_back(tree_json(c));
  return j;
}

}  // namespace

nlohmann::json to_json(const Plan& p) {
  nlohmann::json j;
  j["template"] = p.template_name;
  j["param"] = p.param;
  if (!p.csa_axis.empty()) j["csa_axis"] = p.csa_axis;
  j["root"] = node_json(p.root);
  return j;
}

Plan plan_from_json(const nlohmann::json& j) {
  if (!j.contains("root")) {
    PlanRequest req;
    req.kind = parse_template(j.at("template").get<std::string>());
    req.n = j.at("n").get<int>();
    if (j.contains("group")) req.family = parse_algebra(j["group"].get<std::string>() + "(1)").family;
    return build_plan(req);
  }
  Plan p;
  p.template_name = j.value("template", std::string("explicit"));
  p.param = j.value("param", 0);
  p.csa_axis = j.value("csa_axis", std::string());
  p.root = node_from_json(j["root"]);
  return p;
}

nlohmann::json to_json(const FactorTree& t) {
  nlohmann::json j;
  j["plan"] = to_json(t.plan);
  j["root_size"] = t.root_size;
  if (t.root) j["root"] = tree_json(*t.root);
  return j;
}

}  // namespace cartan
