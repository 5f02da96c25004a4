#include "cartan/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <functional>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "cartan/error.hpp"

namespace cartan {

namespace {

int popcount_and(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
  int s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::popcount(a[i] & b[i]);
  return s;
}

void require_same_n(const PauliWord& a, const PauliWord& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw Error(ErrorCode::DimMismatch, "Pauli words on " + std::to_string(a.n_qubits()) + " and " +
                                            std::to_string(b.n_qubits()) + " qubits");
  }
}

}  // namespace

PauliWord::PauliWord(int n_qubits) : n_(n_qubits) {
  if (n_qubits < 0) throw Error(ErrorCode::BadParams, "negative qubit count");
  const size_t words = (static_cast<size_t>(n_qubits) + 63) / 64;
  x_.assign(words, 0);
  z_.assign(words, 0);
}

PauliWord PauliWord::parse(const std::string& s) {
  size_t i = 0;
  int phase = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    if (s[i] == '-') phase = 2;
    ++i;
  }
  if (i < s.size() && s[i] == 'i') {
    phase += 1;
    ++i;
  }
  const std::string body = s.substr(i);
  if (body.empty()) throw Error(ErrorCode::BadParams, "empty Pauli word '" + s + "'");
  PauliWord w(static_cast<int>(body.size()));
  for (size_t q = 0; q < body.size(); ++q) w.set(static_cast<int>(q), body[q]);
  w.set_phase(phase);
  return w;
}

PauliWord PauliWord::single(int n_qubits, int qubit, char op) {
  PauliWord w(n_qubits);
  w.set(qubit, op);
  return w;
}

void PauliWord::set(int q, char op) {
  if (q < 0 || q >= n_) throw Error(ErrorCode::BadParams, "qubit index out of range");
  bool xb = false;
  bool zb = false;
  switch (op) {
    case 'I': break;
    case 'X': xb = true; break;
    case 'Y': xb = zb = true; break;
    case 'Z': zb = true; break;
    default: throw Error(ErrorCode::BadParams, std::string("bad Pauli character '") + op + "'");
  }
  const uint64_t m = uint64_t{1} << (q & 63);
  x_[q >> 6] = xb ? (x_[q >> 6] | m) : (x_[q >> 6] & ~m);
  z_[q >> 6] = zb ? (z_[q >> 6] | m) : (z_[q >> 6] & ~m);
}

void PauliWord::fill(int begin, int end, char op) {
  if (begin < 0 || end > n_ || begin > end) throw Error(ErrorCode::BadParams, "qubit range out of bounds");
  const bool xb = op == 'X' || op == 'Y';
  const bool zb = op == 'Z' || op == 'Y';
  if (!xb && !zb && op != 'I') throw Error(ErrorCode::BadParams, std::string("bad Pauli character '") + op + "'");
  for (int lo = begin; lo < end;) {
    const int limb = lo >> 6;
    const int hi = std::min(end, (limb + 1) << 6);
    const int width = hi - lo;
    const uint64_t m = (width == 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1)) << (lo & 63);
    x_[limb] = xb ? (x_[limb] | m) : (x_[limb] & ~m);
    z_[limb] = zb ? (z_[limb] | m) : (z_[limb] & ~m);
    lo = hi;
  }
}

char PauliWord::op(int q) const {
  static const char table[4] = {'I', 'X', 'Z', 'Y'};
  return table[(x(q) ? 1 : 0) | (z(q) ? 2 : 0)];
}

PauliWord PauliWord::unsigned_word() const {
  PauliWord w = *this;
  w.phase_ = 0;
  return w;
}

bool PauliWord::is_identity() const {
  for (size_t i = 0; i < x_.size(); ++i) {
    if (x_[i] | z_[i]) return false;
  }
  return true;
}

int PauliWord::weight() const {
  int s = 0;
  for (size_t i = 0; i < x_.size(); ++i) s += std::popcount(x_[i] | z_[i]);
  return s;
}

std::string PauliWord::str() const {
  std::string s(n_, 'I');
  for (int q = 0; q < n_; ++q) s[q] = op(q);
  return s;
}

std::string PauliWord::to_string() const {
  static const char* prefix[4] = {"", "i", "-", "-i"};
  return prefix[phase_] + str();
}

bool PauliWord::commutes(const PauliWord& o) const {
  require_same_n(*this, o);
  return ((popcount_and(x_, o.z_) + popcount_and(z_, o.x_)) & 1) == 0;
}

// With sigma(x, z) = i^{x.z} X^x Z^z, the product picks up (-1)^{z1.x2} from
// moving Z^{z1} past X^{x2}.
PauliWord PauliWord::operator*(const PauliWord& o) const {
  require_same_n(*this, o);
  PauliWord r(n_);
  int k = phase_ + o.phase_ + popcount_and(x_, z_) + popcount_and(o.x_, o.z_) + 2 * popcount_and(z_, o.x_);
  for (size_t i = 0; i < x_.size(); ++i) {
    r.x_[i] = x_[i] ^ o.x_[i];
    r.z_[i] = z_[i] ^ o.z_[i];
  }
  k -= popcount_and(r.x_, r.z_);
  r.set_phase(k);
  return r;
}

CMat PauliWord::matrix() const {
  if (n_ > 12) throw Error(ErrorCode::TooLarge, "dense Pauli matrix limited to 12 qubits");
  const Eigen::Index dim = Eigen::Index{1} << n_;
  uint64_t xm = 0;
  uint64_t zm = 0;
  for (int q = 0; q < n_; ++q) {
    const uint64_t bit = uint64_t{1} << (n_ - 1 - q);
    if (x(q)) xm |= bit;
    if (z(q)) zm |= bit;
  }
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx pre = ipow[(phase_ + std::popcount(xm & zm)) & 3];
  CMat m = CMat::Zero(dim, dim);
  for (uint64_t c = 0; c < static_cast<uint64_t>(dim); ++c) {
    const double s = (std::popcount(zm & c) & 1) ? -1.0 : 1.0;
    m(static_cast<Eigen::Index>(c ^ xm), static_cast<Eigen::Index>(c)) = pre * s;
  }
  return m;
}

bool PauliWord::operator<(const PauliWord& o) const {
  if (n_ != o.n_) return n_ < o.n_;
  // Most significant limb first so that the order is lexicographic in the
  // bitstrings read from the last qubit down.
  for (size_t i = x_.size(); i-- > 0;) {
    if (x_[i] != o.x_[i]) return x_[i] < o.x_[i];
  }
  for (size_t i = z_.size(); i-- > 0;) {
    if (z_[i] != o.z_[i]) return z_[i] < o.z_[i];
  }
  return phase_ < o.phase_;
}

bool PauliWord::operator==(const PauliWord& o) const {
  return n_ == o.n_ && phase_ == o.phase_ && x_ == o.x_ && z_ == o.z_;
}

size_t PauliWordHash::operator()(const PauliWord& w) const {
  uint64_t h = 1469598103934665603ull ^ static_cast<uint64_t>(w.n_qubits());
  auto mix = [&h](uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (uint64_t v : w.x_bits()) mix(v);
  for (uint64_t v : w.z_bits()) mix(v);
  mix(static_cast<uint64_t>(w.phase()));
  return static_cast<size_t>(h);
}

std::optional<PauliWord> commutator(const PauliWord& a, const PauliWord& b) {
  if (a.commutes(b)) return std::nullopt;
  return a * b;
}

// [iP, iQ] = -2 PQ = 2i * (i PQ).
std::optional<PauliWord> bracket(const PauliWord& p, const PauliWord& q) {
  if (p.commutes(q)) return std::nullopt;
  PauliWord r = p * q;
  r.set_phase(r.phase() + 1);
  return r;
}

void PauliSentence::add(const PauliWord& w, double coeff) {
  if (!terms_.empty() && terms_.begin()->first.n_qubits() != w.n_qubits()) {
    throw Error(ErrorCode::DimMismatch, "sentence mixes qubit counts");
  }
  if (w.phase() % 2 != 0) throw Error(ErrorCode::BadParams, "sentence terms must be Hermitian words");
  const double c = w.phase() == 2 ? -coeff : coeff;
  terms_[w.unsigned_word()] += c;
}

void PauliSentence::normalize() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (!std::isfinite(it->second)) throw Error(ErrorCode::BadParams, "non-finite coefficient for " + it->first.str());
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
}

std::vector<PauliWord> PauliSentence::words() const {
  std::vector<PauliWord> out;
  out.reserve(terms_.size());
  for (const auto& kv : terms_) out.push_back(kv.first);
  return out;
}

int PauliSentence::n_qubits() const { return terms_.empty() ? 0 : terms_.begin()->first.n_qubits(); }

CMat PauliSentence::matrix() const {
  const int n = n_qubits();
  CMat m = CMat::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (const auto& kv : terms_) m += kv.second * kv.first.matrix();
  return m;
}

nlohmann::json to_json(const PauliSentence& s) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& kv : s.terms()) terms.push_back({{"pauli", kv.first.str()}, {"coeff", kv.second}});
  return {{"terms", terms}};
}

PauliSentence sentence_from_json(const nlohmann::json& j) {
  if (!j.contains("terms") || !j["terms"].is_array()) throw Error(ErrorCode::BadParams, "sentence JSON needs a terms array");
  PauliSentence s;
  for (const auto& t : j["terms"]) {
    s.add(PauliWord::parse(t.at("pauli").get<std::string>()), t.at("coeff").get<double>());
  }
  s.normalize();
  return s;
}

std::vector<PauliWord> dla_closure(const std::vector<PauliWord>& generators, const ClosureOptions& opt) {
  std::vector<PauliWord> basis;
  std::unordered_set<PauliWord, PauliWordHash> seen;
  auto push = [&](PauliWord w) {
    w.set_phase(0);
    if (seen.insert(w).second) {
      basis.push_back(std::move(w));
      if (basis.size() > opt.max_words) {
        throw Error(ErrorCode::ClosureTooLarge, "closure exceeds " + std::to_string(opt.max_words) + " words");
      }
    }
  };
  for (const PauliWord& g : generators) {
    if (!basis.empty()) require_same_n(basis.front(), g);
    push(g);
  }
  for (size_t i = 0; i < basis.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (basis[i].commutes(basis[j])) continue;
      push(basis[i] * basis[j]);
    }
  }
  std::sort(basis.begin(), basis.end());
  return basis;
}

EvenOddSplit even_odd_cd(const std::vector<PauliWord>& generators, const ClosureOptions& opt) {
  std::vector<PauliWord> gens;
  std::unordered_set<PauliWord, PauliWordHash> gen_set;
  for (const PauliWord& g : generators) {
    PauliWord w = g.unsigned_word();
    if (gen_set.insert(w).second) gens.push_back(w);
  }
  // Bit 0: reached at even order, bit 1: at odd order.
  std::unordered_map<PauliWord, int, PauliWordHash> parity;
  std::deque<std::pair<PauliWord, int>> queue;
  auto reach = [&](const PauliWord& w, int par) {
    int& mask = parity[w];
    const int bit = 1 << par;
    if (mask & bit) return;
    mask |= bit;
    if (mask == 3) {
      throw Error(ErrorCode::NotDisjoint, "word " + w.str() +
                                              " is reached at both parities; the generators are not a minimal "
                                              "generating set of a horizontal subspace");
    }
    if (parity.size() > opt.max_words) {
      throw Error(ErrorCode::ClosureTooLarge, "closure exceeds " + std::to_string(opt.max_words) + " words");
    }
    queue.emplace_back(w, par);
  };
  for (const PauliWord& g : gens) reach(g, 0);
  while (!queue.empty()) {
    auto [w, par] = queue.front();
    queue.pop_front();
    for (const PauliWord& g : gens) {
      if (g.commutes(w)) continue;
      reach((g * w).unsigned_word(), par ^ 1);
    }
  }

  EvenOddSplit out;
  for (const auto& kv : parity) (kv.second == 1 ? out.p_words : out.k_words).push_back(kv.first);
  std::sort(out.k_words.begin(), out.k_words.end());
  std::sort(out.p_words.begin(), out.p_words.end());

  // Sampled check of [k,k] in k, [k,p] in p, [p,p] in k.
  std::mt19937_64 rng(0x5eed);
  auto check = [&](const std::vector<PauliWord>& a, const std::vector<PauliWord>& b, int want, const char* what) {
    if (a.empty() || b.empty()) return;
    const size_t total = a.size() * b.size();
    const size_t samples = std::min<size_t>(total, 20000);
    for (size_t s = 0; s < samples; ++s) {
      const size_t idx = samples == total ? s : static_cast<size_t>(rng() % total);
      const PauliWord& x = a[idx / b.size()];
      const PauliWord& y = b[idx % b.size()];
      if (x.commutes(y)) continue;
      const auto it = parity.find((x * y).unsigned_word());
      if (it == parity.end() || it->second != want) {
        throw Error(ErrorCode::NotDisjoint, std::string("commutation relation ") + what + " fails for " + x.str() +
                                                ", " + y.str());
      }
    }
  };
  check(out.k_words, out.k_words, 2, "[k,k] in k");
  check(out.k_words, out.p_words, 1, "[k,p] in p");
  check(out.p_words, out.p_words, 2, "[p,p] in k");
  return out;
}

FrustrationGraph::FrustrationGraph(std::vector<PauliWord> words)
    : n_(static_cast<int>(words.size())), stride_((words.size() + 63) / 64), words_(std::move(words)) {
  adj_.assign(static_cast<size_t>(n_) * stride_, 0);
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) {
      if (!words_[a].commutes(words_[b])) connect(a, b);
    }
  }
}

FrustrationGraph::FrustrationGraph(int n_vertices, const std::vector<std::pair<int, int>>& edges)
    : n_(n_vertices), stride_((static_cast<size_t>(n_vertices) + 63) / 64) {
  adj_.assign(static_cast<size_t>(n_) * stride_, 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_ || a == b) throw Error(ErrorCode::BadParams, "bad graph edge");
    connect(a, b);
  }
}

void FrustrationGraph::connect(int a, int b) {
  adj_[a * stride_ + (b >> 6)] |= uint64_t{1} << (b & 63);
  adj_[b * stride_ + (a >> 6)] |= uint64_t{1} << (a & 63);
}

int FrustrationGraph::degree(int a) const {
  int d = 0;
  for (size_t i = 0; i < stride_; ++i) d += std::popcount(adj_[a * stride_ + i]);
  return d;
}

std::vector<int> FrustrationGraph::neighbors(int a) const {
  std::vector<int> out;
  for (int b = 0; b < n_; ++b) {
    if (adjacent(a, b)) out.push_back(b);
  }
  return out;
}

int FrustrationGraph::edge_count() const {
  int e = 0;
  for (int a = 0; a < n_; ++a) e += degree(a);
  return e / 2;
}

bool FrustrationGraph::is_path() const {
  if (n_ == 0) return false;
  if (edge_count() != n_ - 1) return false;
  for (int a = 0; a < n_; ++a) {
    if (degree(a) > 2) return false;
  }
  std::vector<char> seen(n_, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == n_;
}

std::vector<PauliWord> jw_majoranas(int n) {
  if (n < 1) throw Error(ErrorCode::BadParams, "jw_majoranas needs n >= 1");
  std::vector<PauliWord> c;
  c.reserve(2 * n);
  for (int half = 0; half < 2; ++half) {
    for (int j = 0; j < n; ++j) {
      PauliWord w(n);
      w.fill(0, j, 'Z');
      w.set(j, half == 0 ? 'Y' : 'X');
      c.push_back(std::move(w));
    }
  }
  return c;
}

namespace {

// c_m under the Jordan-Wigner map.
PauliWord majorana(int n, int m) {
  PauliWord w(n);
  const int j = m % n;
  w.fill(0, j, 'Z');
  w.set(j, m < n ? 'Y' : 'X');
  return w;
}

}  // namespace

PauliWord majorana_product(int n, int a, int b) {
  if (a < 0 || b < 0 || a >= 2 * n || b >= 2 * n) throw Error(ErrorCode::BadParams, "Majorana index out of range");
  return majorana(n, a) * majorana(n, b);
}

MajoranaPair majorana_pair(const PauliWord& word) {
  const int n = word.n_qubits();
  if (word.phase() % 2 != 0) throw Error(ErrorCode::NotQuadratic, word.to_string() + " is not Hermitian");
  int first = -1;
  int last = -1;
  for (int q = 0; q < n; ++q) {
    if (word.op(q) != 'I') {
      if (first < 0) first = q;
      last = q;
    }
  }
  if (first < 0) throw Error(ErrorCode::NotQuadratic, "identity is not a Majorana pair");
  MajoranaPair r;
  if (first == last) {
    if (word.op(first) != 'Z') throw Error(ErrorCode::NotQuadratic, word.to_string() + " is not a Majorana pair");
    r.mu = first;
    r.nu = n + first;
  } else {
    const char a = word.op(first);
    const char b = word.op(last);
    if ((a != 'X' && a != 'Y') || (b != 'X' && b != 'Y')) {
      throw Error(ErrorCode::NotQuadratic, word.to_string() + " is not a Majorana pair");
    }
    for (int q = first + 1; q < last; ++q) {
      if (word.op(q) != 'Z') throw Error(ErrorCode::NotQuadratic, word.to_string() + " is not a Majorana pair");
    }
    // Y Z = iX and X Z = -iY at the first qubit.
    r.mu = a == 'X' ? first : n + first;
    r.nu = b == 'Y' ? last : n + last;
  }
  const PauliWord prod = majorana(n, r.mu) * majorana(n, r.nu);
  // i P = w c_mu c_nu with c_mu c_nu = i^k sigma and P = i^kp sigma.
  const int d = ((1 + word.phase() - prod.phase()) % 4 + 4) % 4;
  if (d % 2 != 0) throw Error(ErrorCode::NotQuadratic, "phase mismatch for " + word.to_string());
  r.w = d == 0 ? 1 : -1;
  return r;
}

std::vector<int> identity_permutation(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return p;
}

std::vector<int> inverse_permutation(const std::vector<int>& pi) {
  std::vector<int> inv(pi.size(), -1);
  for (size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] < 0 || pi[i] >= static_cast<int>(pi.size()) || inv[pi[i]] >= 0) {
      throw Error(ErrorCode::BadParams, "not a permutation");
    }
    inv[pi[i]] = static_cast<int>(i);
  }
  return inv;
}

RhoEntry rho_forward(const PauliWord& word, const std::vector<int>& pi) {
  if (static_cast<int>(pi.size()) != 2 * word.n_qubits()) {
    throw Error(ErrorCode::DimMismatch, "permutation size must be 2n");
  }
  const MajoranaPair m = majorana_pair(word);
  RhoEntry e;
  int a = pi[m.mu];
  int b = pi[m.nu];
  double f = 2.0 * m.w;
  if (a > b) {
    std::swap(a, b);
    f = -f;
  }
  e.row = a;
  e.col = b;
  e.factor = f;
  return e;
}

RhoInverse::RhoInverse(const std::vector<int>& pi) : n_(static_cast<int>(pi.size()) / 2), inv_(inverse_permutation(pi)) {
  if (pi.size() % 2 != 0) throw Error(ErrorCode::BadParams, "permutation size must be even");
}

std::pair<PauliWord, double> RhoInverse::operator()(int mu, int nu) const {
  const int two_n = 2 * n_;
  if (mu == nu || mu < 0 || nu < 0 || mu >= two_n || nu >= two_n) {
    throw Error(ErrorCode::BadParams, "bad Majorana coordinates");
  }
  // c_a c_b = i^k sigma, so i sigma = i^{1-k} c_a c_b.
  PauliWord prod = majorana(n_, inv_[mu]) * majorana(n_, inv_[nu]);
  const int d = ((1 - prod.phase()) % 4 + 4) % 4;
  prod.set_phase(0);
  return {prod, d == 0 ? 2.0 : -2.0};
}

std::pair<PauliWord, double> rho_inverse(int mu, int nu, const std::vector<int>& pi) {
  return RhoInverse(pi)(mu, nu);
}

namespace {

// Induced-subgraph embedding into the p x q rook graph. With a label
// function (shared Majorana of two adjacent terms), every occupied line must
// also carry one common label.
class RookEmbedder {
 public:
  RookEmbedder(std::vector<std::vector<int>> adj, std::function<bool(int, int)> adjacent,
               std::function<int(int, int)> label, int p, int q, long long budget)
      : adj_(std::move(adj)), adjacent_(std::move(adjacent)), label_(std::move(label)), p_(p), q_(q), budget_(budget) {
    order_vertices();
    row_occ_.assign(p, {});
    col_occ_.assign(q, {});
    pos_.assign(adj_.size(), {-1, -1});
  }

  bool run() { return place(0); }
  const std::vector<std::pair<int, int>>& positions() const { return pos_; }

 private:
  // Per component: highest degree first, then breadth-first by degree.
  void order_vertices() {
    const int m = static_cast<int>(adj_.size());
    std::vector<int> by_degree(m);
    for (int v = 0; v < m; ++v) by_degree[v] = v;
    std::stable_sort(by_degree.begin(), by_degree.end(),
                     [&](int a, int b) { return adj_[a].size() > adj_[b].size(); });
    std::vector<char> seen(m, 0);
    for (int s : by_degree) {
      if (seen[s]) continue;
      seen[s] = 1;
      size_t head = order_.size();
      order_.push_back(s);
      while (head < order_.size()) {
        const int v = order_[head++];
        std::vector<int> next;
        for (int u : adj_[v]) {
          if (!seen[u]) {
            seen[u] = 1;
            next.push_back(u);
          }
        }
        std::stable_sort(next.begin(), next.end(), [&](int a, int b) { return adj_[a].size() > adj_[b].size(); });
        order_.insert(order_.end(), next.begin(), next.end());
      }
    }
    rank_.assign(m, 0);
    for (int i = 0; i < m; ++i) rank_[order_[i]] = i;
  }

  // Members of a line must share one Majorana.
  bool line_ok(const std::vector<int>& line, int v) const {
    if (!label_ || line.size() < 2) return true;
    return label_(v, line[0]) == label_(line[0], line[1]);
  }

  bool feasible(int v, int a, int b, int placed_neighbors) const {
    if (a < 0 || b < 0 || a >= p_ || b >= q_) return false;
    const auto& row = row_occ_[a];
    const auto& col = col_occ_[b];
    for (int u : row) {
      if (pos_[u].second == b) return false;
    }
    if (static_cast<int>(row.size() + col.size()) != placed_neighbors) return false;
    for (int u : row) {
      if (!adjacent_(u, v)) return false;
    }
    for (int u : col) {
      if (!adjacent_(u, v)) return false;
    }
    return line_ok(row, v) && line_ok(col, v);
  }

  int first_empty(const std::vector<std::vector<int>>& lines) const {
    for (size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) return static_cast<int>(i);
    }
    return -1;
  }

  bool place(size_t k) {
    if (k == order_.size()) return true;
    const int v = order_[k];
    int anchor = -1;
    int placed = 0;
    for (int u : adj_[v]) {
      if (rank_[u] < static_cast<int>(k)) {
        ++placed;
        if (anchor < 0 || rank_[u] < rank_[anchor]) anchor = u;
      }
    }
    std::vector<std::pair<int, int>> cand;
    if (anchor < 0) {
      // Every cell with an empty row and column is equivalent.
      cand.emplace_back(first_empty(row_occ_), first_empty(col_occ_));
    } else {
      const auto [a0, b0] = pos_[anchor];
      for (int b = 0; b < q_; ++b) {
        if (b != b0 && !col_occ_[b].empty()) cand.emplace_back(a0, b);
      }
      cand.emplace_back(a0, first_empty(col_occ_));
      for (int a = 0; a < p_; ++a) {
        if (a != a0 && !row_occ_[a].empty()) cand.emplace_back(a, b0);
      }
      cand.emplace_back(first_empty(row_occ_), b0);
    }
    for (const auto& [a, b] : cand) {
      if (++spent_ > budget_) {
        throw Error(ErrorCode::Budget, "horizontal placement exceeded " + std::to_string(budget_) + " expansions");
      }
      if (!feasible(v, a, b, placed)) continue;
      pos_[v] = {a, b};
      row_occ_[a].push_back(v);
      col_occ_[b].push_back(v);
      if (place(k + 1)) return true;
      row_occ_[a].pop_back();
      col_occ_[b].pop_back();
      pos_[v] = {-1, -1};
    }
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::function<bool(int, int)> adjacent_;
  std::function<int(int, int)> label_;
  int p_;
  int q_;
  long long budget_;
  long long spent_ = 0;
  std::vector<int> order_;
  std::vector<int> rank_;
  std::vector<std::vector<int>> row_occ_;
  std::vector<std::vector<int>> col_occ_;
  std::vector<std::pair<int, int>> pos_;
};

}  // namespace

std::vector<std::pair<int, int>> rook_embed(const FrustrationGraph& g, int p, int q, const HorizontalOptions& opt) {
  if (p < 0 || q < 0) throw Error(ErrorCode::BadParams, "rook graph sides must be non-negative");
  std::vector<std::vector<int>> adj(g.size());
  for (int v = 0; v < g.size(); ++v) adj[v] = g.neighbors(v);
  RookEmbedder emb(std::move(adj), [&g](int a, int b) { return g.adjacent(a, b); }, nullptr, p, q, opt.budget);
  if (!emb.run()) {
    throw Error(ErrorCode::NotEmbeddable, "graph has no induced embedding into the " + std::to_string(p) + "x" +
                                              std::to_string(q) + " rook graph");
  }
  return emb.positions();
}

std::vector<int> horizontal_order(const std::vector<std::pair<int, int>>& terms, int p, int q,
                                  const HorizontalOptions& opt) {
  if (p < 0 || q < 0 || p + q == 0) throw Error(ErrorCode::BadParams, "horizontal_order needs p + q > 0");
  const int m = p + q;
  std::vector<std::pair<int, int>> t;
  {
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : terms) {
      if (a == b || a < 0 || b < 0 || a >= m || b >= m) {
        throw Error(ErrorCode::BadParams, "term is not a pair of distinct Majoranas in range");
      }
      if (a > b) std::swap(a, b);
      if (seen.insert({a, b}).second) t.emplace_back(a, b);
    }
  }
  if (t.empty()) return identity_permutation(m);

  const int count = static_cast<int>(t.size());
  std::vector<std::vector<int>> by_majorana(m);
  for (int v = 0; v < count; ++v) {
    by_majorana[t[v].first].push_back(v);
    by_majorana[t[v].second].push_back(v);
  }
  std::vector<std::vector<int>> adj(count);
  for (const auto& list : by_majorana) {
    for (int a : list) {
      for (int b : list) {
        if (a != b) adj[a].push_back(b);
      }
    }
  }
  auto shared = [&t](int a, int b) {
    const auto [a1, a2] = t[a];
    const auto [b1, b2] = t[b];
    if (a1 == b1 || a1 == b2) return a1;
    if (a2 == b1 || a2 == b2) return a2;
    return -1;
  };
  RookEmbedder emb(std::move(adj), [&](int a, int b) { return shared(a, b) >= 0; }, shared, p, q, opt.budget);
  if (!emb.run()) {
    throw Error(ErrorCode::NotEmbeddable, "term frustration graph has no induced embedding into the " +
                                              std::to_string(p) + "x" + std::to_string(q) + " rook graph");
  }
  const auto& pos = emb.positions();

  std::vector<std::vector<int>> rows(p), cols(q);
  for (size_t v = 0; v < t.size(); ++v) {
    rows[pos[v].first].push_back(static_cast<int>(v));
    cols[pos[v].second].push_back(static_cast<int>(v));
  }
  // Line id: row a -> a, column b -> p + b. Also the final slot.
  std::vector<int> line_of(m, -1);
  std::vector<int> majorana_of(m, -1);
  auto assign = [&](int line, int maj) {
    if (majorana_of[line] >= 0 || line_of[maj] >= 0) return;
    majorana_of[line] = maj;
    line_of[maj] = line;
  };
  auto common = [&](int a, int b) {
    return (t[a].first == t[b].first || t[a].first == t[b].second) ? t[a].first : t[a].second;
  };
  auto for_lines = [&](const std::function<void(const std::vector<int>&, int, bool)>& f) {
    for (int a = 0; a < p; ++a) f(rows[a], a, true);
    for (int b = 0; b < q; ++b) f(cols[b], p + b, false);
  };
  // Lines with two or more occupied cells carry the shared Majorana.
  for_lines([&](const std::vector<int>& l, int id, bool) {
    if (l.size() >= 2) assign(id, common(l[0], l[1]));
  });
  // Singly occupied lines whose term has one factor placed elsewhere.
  for_lines([&](const std::vector<int>& l, int id, bool) {
    if (l.size() != 1 || majorana_of[id] >= 0) return;
    const auto [x, y] = t[l[0]];
    if (line_of[x] >= 0 && line_of[y] < 0) assign(id, y);
    else if (line_of[y] >= 0 && line_of[x] < 0) assign(id, x);
  });
  // Remaining singly occupied lines: rows take the first factor, columns the second.
  for_lines([&](const std::vector<int>& l, int id, bool is_row) {
    if (l.size() != 1 || majorana_of[id] >= 0) return;
    const auto [x, y] = t[l[0]];
    const int pick = is_row ? x : y;
    const int other = is_row ? y : x;
    assign(id, line_of[pick] < 0 ? pick : other);
  });
  // Unassigned Majoranas fill the free slots in ascending order.
  std::vector<int> pi(m, -1);
  for (int maj = 0; maj < m; ++maj) {
    if (line_of[maj] >= 0) pi[maj] = line_of[maj];
  }
  int slot = 0;
  for (int maj = 0; maj < m; ++maj) {
    if (pi[maj] >= 0) continue;
    while (majorana_of[slot] >= 0) ++slot;
    pi[maj] = slot++;
  }
  for (const auto& [a, b] : t) {
    if ((pi[a] < p) == (pi[b] < p)) {
      throw Error(ErrorCode::NotEmbeddable, "line assignment is inconsistent for term (" + std::to_string(a) + "," +
                                                std::to_string(b) + ")");
    }
  }
  return pi;
}

}  // namespace cartan
