#include "cartan/hamsim.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include "cartan/error.hpp"
#include "cartan/kak.hpp"

namespace cartan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PauliWord two_site(int n, int i, char op) {
  PauliWord w(n);
  w.set(i, op);
  w.set(i + 1, op);
  return w;
}

int level_of(const FactorNode* node) {
  int l = 0;
  for (; node->parent; node = node->parent) ++l;
  return l;
}

// Back-maps items [begin, end) of a split flattening to gates. Items multiply
// left to right, so the last item acts first.
void emit(const std::vector<FlatItem>& items, size_t begin, size_t end, const RhoInverse& inv, Circuit& c,
          std::vector<long long>& layers) {
  for (size_t k = end; k-- > begin;) {
    const FlatItem& it = items[k];
    int mu = 0;
    int nu = 0;
    if (it.kind != FlatItem::Kind::Givens || !root_plane(it, mu, nu)) {
      throw Error(ErrorCode::BadParams, "factor at " + it.node->path + " is not a root-frame Givens rotation");
    }
    // exp(eta (E_mu,nu - E_nu,mu)) = rho(exp(i eta/f P)) = rho(exp(-i theta/2 P)).
    auto [word, f] = inv(mu, nu);
    c.gates.push_back({std::move(word), -2.0 * it.eta / f});
    const int l = level_of(it.node);
    if (static_cast<int>(layers.size()) <= l) layers.resize(l + 1, 0);
    ++layers[l];
  }
}

void check_rho(const RMat& rho, const std::vector<int>& pi) {
  const Eigen::Index m = rho.rows();
  if (rho.cols() != m || m % 2 != 0 || m == 0) throw Error(ErrorCode::BadDim, "rho(iH) must be 2n x 2n");
  if (static_cast<Eigen::Index>(pi.size()) != m) throw Error(ErrorCode::DimMismatch, "permutation size must be 2n");
}

// Decomposes x = K a K^T and runs the canonical BDI recursion on K, with the
// K^T subtree mirrored so that the lifted circuit is exact (no spin sign).
FactorTree decompose_horizontal(const RMat& x, const RecursionOptions& ropt, HorizontalResult& hr) {
  const int m = static_cast<int>(x.rows());
  const int n = m / 2;
  hr = horizontal_decompose(x, n, n, std::max(ropt.tol, 1e-10));
  KakFactors root;
  root.type = parse_type("BDI(" + std::to_string(n) + "," + std::to_string(n) + ")");
  root.k1 = DenseMatrix(hr.K);
  root.a = hr.a;
  root.k2 = DenseMatrix(RMat(hr.K.transpose()));
  PlanRequest req;
  req.kind = PlanTemplate::CanonicalBdi;
  req.n = m;
  return recursive_decompose_from(root, build_plan(req), true, ropt);
}

PauliSentence sentence_from_rho(const RMat& rho, const std::vector<int>& pi) {
  const RhoInverse inv(pi);
  PauliSentence h;
  for (Eigen::Index a = 0; a < rho.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < rho.cols(); ++b) {
      if (rho(a, b) == 0.0) continue;
      const auto [w, f] = inv(static_cast<int>(a), static_cast<int>(b));
      h.add(w, rho(a, b) / f);
    }
  }
  h.normalize();
  return h;
}

}  // namespace

void XYModel::validate() const {
  if (n < 1) throw Error(ErrorCode::BadParams, "XY model needs n >= 1");
  if (static_cast<int>(alpha_x.size()) != n - 1 || static_cast<int>(alpha_y.size()) != n - 1 ||
      static_cast<int>(beta.size()) != n) {
    throw Error(ErrorCode::BadParams, "XY model needs n-1 couplings per axis and n fields");
  }
  for (const auto* v : {&alpha_x, &alpha_y, &beta}) {
    for (double x : *v) {
      if (!std::isfinite(x)) throw Error(ErrorCode::BadParams, "non-finite XY model parameter");
    }
  }
}

PauliSentence XYModel::hamiltonian() const {
  validate();
  PauliSentence h;
  for (int i = 0; i + 1 < n; ++i) {
    h.add(two_site(n, i, 'X'), alpha_x[i]);
    h.add(two_site(n, i, 'Y'), alpha_y[i]);
  }
  for (int i = 0; i < n; ++i) h.add(PauliWord::single(n, i, 'Z'), beta[i]);
  h.normalize();
  return h;
}

XYModel random_xy_model(int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::BadParams, "XY model needs n >= 1");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  XYModel m;
  m.n = n;
  for (int i = 0; i + 1 < n; ++i) m.alpha_x.push_back(u(rng));
  for (int i = 0; i + 1 < n; ++i) m.alpha_y.push_back(u(rng));
  for (int i = 0; i < n; ++i) m.beta.push_back(u(rng));
  return m;
}

nlohmann::json to_json(const XYModel& m) {
  return {{"n", m.n}, {"alpha_x", m.alpha_x}, {"alpha_y", m.alpha_y}, {"beta", m.beta}};
}

XYModel xy_model_from_json(const nlohmann::json& j) {
  XYModel m;
  m.n = j.at("n").get<int>();
  m.alpha_x = j.at("alpha_x").get<std::vector<double>>();
  m.alpha_y = j.at("alpha_y").get<std::vector<double>>();
  m.beta = j.at("beta").get<std::vector<double>>();
  m.validate();
  return m;
}

Circuit Circuit::inverse() const {
  Circuit c;
  c.n_qubits = n_qubits;
  c.gates.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) c.gates.push_back({it->word, -it->angle});
  return c;
}

nlohmann::json to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const PauliRotation& g : c.gates) gates.push_back({{"pauli", g.word.to_string()}, {"angle", g.angle}});
  return {{"n_qubits", c.n_qubits}, {"gates", gates}};
}

Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c;
  c.n_qubits = j.at("n_qubits").get<int>();
  for (const auto& g : j.at("gates")) {
    PauliWord w = PauliWord::parse(g.at("pauli").get<std::string>());
    if (w.n_qubits() != c.n_qubits) throw Error(ErrorCode::DimMismatch, "gate width differs from n_qubits");
    double angle = g.at("angle").get<double>();
    // A sign in the word folds into the angle.
    if (w.phase() == 2) angle = -angle;
    else if (w.phase() != 0) throw Error(ErrorCode::BadParams, "gate words must be Hermitian");
    w.set_phase(0);
    c.gates.push_back({std::move(w), angle});
  }
  return c;
}

nlohmann::json to_json(const CompileReport& r) {
  nlohmann::json j = {{"gate_count", r.gate_count},
                      {"depth_by_layer", r.depth_by_layer},
                      {"wall_time_seconds", r.wall_time_seconds}};
  if (r.residual >= 0.0) j["residual"] = r.residual;
  return j;
}

RMat build_xy_matrix(const XYModel& m) {
  m.validate();
  const int n = m.n;
  RMat b = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) b(i, i) = -2.0 * m.beta[i];
  for (int i = 0; i + 1 < n; ++i) {
    b(i, i + 1) = 2.0 * m.alpha_x[i];
    b(i + 1, i) = 2.0 * m.alpha_y[i];
  }
  RMat r = RMat::Zero(2 * n, 2 * n);
  r.topRightCorner(n, n) = b;
  r.bottomLeftCorner(n, n) = -b.transpose();
  return r;
}

CompiledCircuit compile_rho_evolution(const RMat& rho_ih, const std::vector<int>& pi, double t,
                                      const CompileOptions& opt) {
  check_rho(rho_ih, pi);
  if (!std::isfinite(t)) throw Error(ErrorCode::BadParams, "evolution time must be finite");
  const auto t0 = Clock::now();
  const int n = static_cast<int>(rho_ih.rows()) / 2;
  if (n == 1) {
    const HorizontalCircuit h = compile_rho_horizontal(rho_ih, pi, opt);
    CompiledCircuit out{h.at(t), h.report};
    out.report.wall_time_seconds = seconds_since(t0);
    if (opt.verify) {
      const CMat target = dense_evolution(sentence_from_rho(rho_ih, pi), t);
      out.report.residual = (evaluate_circuit(out.circuit).to_complex() - target).norm();
    }
    return out;
  }
  // rho(exp(-iHt)) = exp(-t rho(iH)).
  const RMat x = -t * rho_ih;
  HorizontalResult hr;
  const FactorTree tree = decompose_horizontal(x, opt.recursion, hr);
  const std::vector<FlatItem> items = flatten(tree, true);
  CompiledCircuit out;
  out.circuit.n_qubits = n;
  out.circuit.gates.reserve(items.size());
  emit(items, 0, items.size(), RhoInverse(pi), out.circuit, out.report.depth_by_layer);
  out.report.gate_count = static_cast<long long>(out.circuit.gates.size());
  out.report.wall_time_seconds = seconds_since(t0);
  if (opt.verify) {
    const CMat target = dense_evolution(sentence_from_rho(rho_ih, pi), t);
    out.report.residual = (evaluate_circuit(out.circuit).to_complex() - target).norm();
  }
  return out;
}

CompiledCircuit compile_evolution(const XYModel& m, double t, const CompileOptions& opt) {
  return compile_rho_evolution(build_xy_matrix(m), identity_permutation(2 * m.n), t, opt);
}

Circuit HorizontalCircuit::at(double t) const {
  Circuit c = k_circuit.inverse();
  for (size_t j = 0; j < csa_words.size(); ++j) c.gates.push_back({csa_words[j], csa_rates[j] * t});
  c.gates.insert(c.gates.end(), k_circuit.gates.begin(), k_circuit.gates.end());
  return c;
}

HorizontalCircuit compile_rho_horizontal(const RMat& rho_ih, const std::vector<int>& pi, const CompileOptions& opt) {
  check_rho(rho_ih, pi);
  const auto t0 = Clock::now();
  const int n = static_cast<int>(rho_ih.rows()) / 2;
  if (n == 1) {
    // so(2) is its own torus: one gate, no K.
    HorizontalCircuit out;
    out.k_circuit.n_qubits = 1;
    auto [word, f] = RhoInverse(pi)(0, 1);
    out.csa_words.push_back(std::move(word));
    out.csa_rates.push_back(2.0 * rho_ih(0, 1) / f);
    out.report.gate_count = 1;
    out.report.depth_by_layer = {1};
    out.report.wall_time_seconds = seconds_since(t0);
    if (opt.verify) {
      const CMat target = dense_evolution(sentence_from_rho(rho_ih, pi), 1.0);
      out.report.residual = (evaluate_circuit(out.at(1.0)).to_complex() - target).norm();
    }
    return out;
  }
  HorizontalResult hr;
  const FactorTree tree = decompose_horizontal(-rho_ih, opt.recursion, hr);
  const std::vector<FlatItem> items = flatten(tree, true);
  // Items: K subtree, then the root CSG, then the mirrored K^T subtree.
  size_t csa_begin = 0;
  while (csa_begin < items.size() && items[csa_begin].node != tree.root.get()) ++csa_begin;
  size_t csa_end = csa_begin;
  while (csa_end < items.size() && items[csa_end].node == tree.root.get()) ++csa_end;

  const RhoInverse inv(pi);
  HorizontalCircuit out;
  out.k_circuit.n_qubits = n;
  std::vector<long long> layers;
  emit(items, 0, csa_begin, inv, out.k_circuit, layers);
  for (size_t k = csa_begin; k < csa_end; ++k) {
    int mu = 0;
    int nu = 0;
    root_plane(items[k], mu, nu);
    auto [word, f] = inv(mu, nu);
    out.csa_words.push_back(std::move(word));
    out.csa_rates.push_back(-2.0 * items[k].eta / f);
  }
  out.report.gate_count = 2 * static_cast<long long>(out.k_circuit.gates.size()) +
                          static_cast<long long>(out.csa_words.size());
  layers.resize(std::max<size_t>(layers.size(), 1), 0);
  for (size_t l = 1; l < layers.size(); ++l) layers[l] *= 2;
  layers[0] += static_cast<long long>(out.csa_words.size());
  out.report.depth_by_layer = layers;
  out.report.wall_time_seconds = seconds_since(t0);
  if (opt.verify) {
    const CMat target = dense_evolution(sentence_from_rho(rho_ih, pi), 1.0);
    out.report.residual = (evaluate_circuit(out.at(1.0)).to_complex() - target).norm();
  }
  return out;
}

HorizontalCircuit compile_horizontal(const XYModel& m, const CompileOptions& opt) {
  return compile_rho_horizontal(build_xy_matrix(m), identity_permutation(2 * m.n), opt);
}

Diagonalization diagonalize(const XYModel& m) {
  const auto t0 = Clock::now();
  const int n = m.n;
  const HorizontalResult hr = horizontal_decompose(build_xy_matrix(m), n, n);
  const RhoInverse inv(identity_permutation(2 * n));
  Diagonalization d;
  // a = sum_j r_j (E_{j,n+j} - E_{n+j,j}) = rho(i sum_j (r_j / f_j) Z_j).
  for (int j = 0; j < n; ++j) {
    const double f = inv(j, n + j).second;
    d.coeffs.push_back(hr.a.angles[j] / f);
  }
  d.wall_time_seconds = seconds_since(t0);
  return d;
}

std::vector<double> expand_spectrum(const std::vector<double>& coeffs) {
  const size_t n = coeffs.size();
  if (n > 20) throw Error(ErrorCode::TooLarge, "spectrum expansion limited to 20 qubits");
  std::vector<double> e(size_t{1} << n, 0.0);
  for (size_t s = 0; s < e.size(); ++s) {
    double v = 0.0;
    for (size_t j = 0; j < n; ++j) v += ((s >> j) & 1) ? -coeffs[j] : coeffs[j];
    e[s] = v;
  }
  std::sort(e.begin(), e.end());
  return e;
}

namespace {

// Drops generators whose removal keeps the closure dimension.
std::vector<PauliWord> prune_generators(std::vector<PauliWord> gens, size_t full_dim, const ClosureOptions& opt) {
  for (size_t k = gens.size(); k-- > 0;) {
    std::vector<PauliWord> rest = gens;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
    if (!rest.empty() && dla_closure(rest, opt).size() == full_dim) gens = std::move(rest);
  }
  return gens;
}

// Sum of dim so(L + 1) over path components with L vertices; -1 if some
// component is not a path.
long long path_algebra_dim(const FrustrationGraph& g) {
  std::vector<int> comp(g.size(), -1);
  long long dim = 0;
  for (int s = 0; s < g.size(); ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> members = {s};
    comp[s] = s;
    for (size_t h = 0; h < members.size(); ++h) {
      for (int u : g.neighbors(members[h])) {
        if (comp[u] < 0) {
          comp[u] = s;
          members.push_back(u);
        }
      }
    }
    std::vector<PauliWord> words;
    for (int v : members) words.push_back(g.vertices()[v]);
    if (!FrustrationGraph(words).is_path()) return -1;
    const long long l = static_cast<long long>(members.size());
    dim += (l + 1) * l / 2;
  }
  return dim;
}

}  // namespace

AutoMapResult auto_map(const PauliSentence& h, const AutoMapOptions& opt) {
  const std::vector<PauliWord> words = h.words();
  if (words.empty()) throw Error(ErrorCode::BadParams, "empty Hamiltonian");
  const int n = h.n_qubits();
  std::vector<std::pair<int, int>> terms;
  for (const PauliWord& w : words) {
    try {
      const MajoranaPair m = majorana_pair(w);
      terms.emplace_back(m.mu, m.nu);
    } catch (const Error& e) {
      throw Error(ErrorCode::NotFreeFermionic, std::string("term is not Majorana-quadratic: ") + e.what());
    }
  }
  AutoMapResult out;
  if (opt.compute_dla) {
    const size_t full = dla_closure(words, opt.closure).size();
    out.generators = prune_generators(words, full, opt.closure);
    const long long want = path_algebra_dim(FrustrationGraph(out.generators));
    if (want < 0) throw Error(ErrorCode::NotFreeFermionic, "frustration graph of the generators is not a union of paths");
    if (want != static_cast<long long>(full)) {
      throw Error(ErrorCode::NotFreeFermionic, "closure dimension " + std::to_string(full) +
                                                   " does not match the path-graph algebra dimension " +
                                                   std::to_string(want));
    }
    out.dla_dim = static_cast<long long>(full);
  } else {
    out.generators = words;
  }
  out.pi = horizontal_order(terms, n, n, opt.horizontal);
  out.rho = RMat::Zero(2 * n, 2 * n);
  for (const auto& [w, coeff] : h.terms()) {
    const RhoEntry e = rho_forward(w, out.pi);
    out.rho(e.row, e.col) += coeff * e.factor;
    out.rho(e.col, e.row) -= coeff * e.factor;
  }
  return out;
}

nlohmann::json to_json(const AutoMapResult& r) {
  nlohmann::json gens = nlohmann::json::array();
  for (const PauliWord& w : r.generators) gens.push_back(w.str());
  return {{"pi", r.pi}, {"generators", gens}, {"dla_dim", r.dla_dim}, {"rho", to_json(DenseMatrix(r.rho))}};
}

DenseMatrix evaluate_circuit(const Circuit& c) {
  const int n = c.n_qubits;
  if (n > 12) throw Error(ErrorCode::TooLarge, "dense circuit evaluation limited to 12 qubits");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMat u = CMat::Identity(dim, dim);
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const PauliRotation& g : c.gates) {
    if (g.word.n_qubits() != n) throw Error(ErrorCode::DimMismatch, "gate width differs from n_qubits");
    uint64_t xm = 0;
    uint64_t zm = 0;
    for (int q = 0; q < n; ++q) {
      const uint64_t bit = uint64_t{1} << (n - 1 - q);
      if (g.word.x(q)) xm |= bit;
      if (g.word.z(q)) zm |= bit;
    }
    const cplx pre = ipow[(g.word.phase() + std::popcount(xm & zm)) & 3];
    // P|c> = coef(c) |c ^ xm>.
    auto coef = [&](uint64_t col) { return (std::popcount(zm & col) & 1) ? -pre : pre; };
    const double cs = std::cos(0.5 * g.angle);
    const cplx ms = cplx(0.0, -std::sin(0.5 * g.angle));
    for (Eigen::Index j = 0; j < dim; ++j) {
      cplx* col = u.col(j).data();
      if (xm == 0) {
        for (uint64_t r = 0; r < static_cast<uint64_t>(dim); ++r) col[r] *= cs + ms * coef(r);
        continue;
      }
      for (uint64_t r = 0; r < static_cast<uint64_t>(dim); ++r) {
        const uint64_t s = r ^ xm;
        if (s < r) continue;
        const cplx a = col[r];
        const cplx b = col[s];
        col[r] = cs * a + ms * coef(s) * b;
        col[s] = cs * b + ms * coef(r) * a;
      }
    }
  }
  return DenseMatrix(u);
}

CMat dense_evolution(const PauliSentence& h, double t) {
  if (h.n_qubits() > 12) throw Error(ErrorCode::TooLarge, "dense evolution limited to 12 qubits");
  const CMat hm = h.matrix();
  Eigen::SelfAdjointEigenSolver<CMat> es(hm);
  const RVec& ev = es.eigenvalues();
  CVec ph(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k) ph(k) = std::exp(cplx(0.0, -t * ev(k)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace cartan
