#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cartan/error.hpp"
#include "cartan/pauli.hpp"

using namespace cartan;

namespace {

const cplx kI(0.0, 1.0);

PauliWord random_word(int n, std::mt19937_64& rng) {
  static const char ops[4] = {'I', 'X', 'Y', 'Z'};
  PauliWord w(n);
  for (int q = 0; q < n; ++q) w.set(q, ops[rng() % 4]);
  return w;
}


PauliWord with_phase(PauliWord w, int k) {
  w.set_phase(k);
  return w;
}

std::vector<PauliWord> xy_generators(int n) {
  std::vector<PauliWord> g;
  for (int i = 0; i + 1 < n; ++i) {
    PauliWord w(n);
    w.set(i, 'X');
    w.set(i + 1, 'X');
    g.push_back(w);
  }
  for (int i = 0; i < n; ++i) g.push_back(PauliWord::single(n, i, 'Z'));
  return g;
}

// X or Y at i and j > i with Z strictly between, or a single Z.
bool is_xy_string(const PauliWord& w) {
  const std::string s = w.str();
  const size_t a = s.find_first_not_of('I');
  const size_t b = s.find_last_not_of('I');
  if (a == std::string::npos) return false;
  if (a == b) return s[a] == 'Z';
  auto xy = [](char c) { return c == 'X' || c == 'Y'; };
  if (!xy(s[a]) || !xy(s[b])) return false;
  for (size_t k = a + 1; k < b; ++k) {
    if (s[k] != 'Z') return false;
  }
  return true;
}

// Horizontal iff some p-subset of Majoranas (the rows) splits every term.
bool brute_force_horizontal(const std::vector<std::pair<int, int>>& terms, int p, int q) {
  const int m = p + q;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != p) continue;
    bool ok = true;
    for (auto [a, b] : terms) {
      if (((mask >> a) & 1) == ((mask >> b) & 1)) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

RMat rho_matrix(const PauliWord& w, const std::vector<int>& pi) {
  const int m = static_cast<int>(pi.size());
  RMat r = RMat::Zero(m, m);
  const RhoEntry e = rho_forward(w, pi);
  r(e.row, e.col) = e.factor;
  r(e.col, e.row) = -e.factor;
  return r;
}

}  // namespace

TEST(PauliWord, ParseAndPrint) {
  const PauliWord w = PauliWord::parse("-iXZY");
  EXPECT_EQ(w.n_qubits(), 3);
  EXPECT_EQ(w.phase(), 3);
  EXPECT_EQ(w.str(), "XZY");
  EXPECT_EQ(w.to_string(), "-iXZY");
  EXPECT_EQ(PauliWord::parse("+Z").to_string(), "Z");
  EXPECT_THROW(PauliWord::parse("XQ"), Error);
  EXPECT_THROW(PauliWord::parse("-"), Error);
}

TEST(PauliWord, ProductMatchesMatrices) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const PauliWord a = with_phase(random_word(n, rng), static_cast<int>(rng() % 4));
    const PauliWord b = with_phase(random_word(n, rng), static_cast<int>(rng() % 4));
    const CMat am = a.matrix();
    const CMat bm = b.matrix();
    EXPECT_LT(((a * b).matrix() - am * bm).norm(), 1e-12);
    const bool comm = (am * bm - bm * am).norm() < 1e-12;
    EXPECT_EQ(a.commutes(b), comm);
  }
}

TEST(PauliWord, WideWordsAcrossLimbs) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 70 + static_cast<int>(rng() % 100);
    const PauliWord a = random_word(n, rng);
    const PauliWord b = random_word(n, rng);
    // Per-qubit commutation parity.
    int anti = 0;
    for (int q = 0; q < n; ++q) {
      const char x = a.op(q);
      const char y = b.op(q);
      if (x != 'I' && y != 'I' && x != y) ++anti;
    }
    EXPECT_EQ(a.commutes(b), anti % 2 == 0);
    const PauliWord ab = a * b;
    EXPECT_EQ((ab * b).unsigned_word(), a);
  }
}

TEST(Bracket, Examples) {
  const PauliWord x0 = PauliWord::parse("XI");
  EXPECT_FALSE(bracket(x0, PauliWord::parse("XX")).has_value());
  // [iX, iZ] = -(XZ - ZX) = 2iY.
  const auto r = bracket(PauliWord::parse("X"), PauliWord::parse("Z"));
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->to_string(), "Y");
  const CMat x = PauliWord::parse("X").matrix();
  const CMat z = PauliWord::parse("Z").matrix();
  EXPECT_LT(((kI * x) * (kI * z) - (kI * z) * (kI * x) - 2.0 * kI * r->matrix()).norm(), 1e-14);
}

TEST(Bracket, MatchesMatrixCommutator) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const PauliWord p = random_word(n, rng);
    const PauliWord q = random_word(n, rng);
    const CMat ip = kI * p.matrix();
    const CMat iq = kI * q.matrix();
    const CMat c = ip * iq - iq * ip;
    const auto r = bracket(p, q);
    if (!r) {
      EXPECT_LT(c.norm(), 1e-12);
      continue;
    }
    EXPECT_EQ(r->phase() % 2, 0);
    EXPECT_LT((c - 2.0 * kI * r->matrix()).norm(), 1e-12);
  }
}

// [[iQ,iR],iR] is proportional to iQ when Q and R anticommute, else zero.
TEST(PauliLemma, DoubleBracketReturnsQ) {
  std::mt19937_64 rng(4);
  int checked = 0;
  while (checked < 100) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const PauliWord q = random_word(n, rng);
    const PauliWord r = random_word(n, rng);
    const auto qr = bracket(q, r);
    if (!qr) {
      continue;
    }
    // [iQ,iR] = 2i S, then [2iS, iR] = 2 * 2i * bracket(S, R).
    const auto s = bracket(*qr, r);
    ASSERT_TRUE(s.has_value());
    EXPECT_TRUE(s->same_operator(q));
    // Exact value: [[iQ,iR],iR] = -4 iQ.
    EXPECT_EQ(s->phase(), (q.phase() + 2) % 4);
    ++checked;
  }
}

TEST(PauliLemma, CyclicAndEqualityAndJacobi) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 2000; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const PauliWord p = random_word(n, rng);
    const PauliWord q = random_word(n, rng);
    const PauliWord r = random_word(n, rng);
    // iP ~ [iQ, iR] implies iQ ~ [iP, iR] and iR ~ [iP, iQ].
    const auto qr = bracket(q, r);
    if (qr && qr->same_operator(p)) {
      const auto pr = bracket(p, r);
      const auto pq = bracket(p, q);
      ASSERT_TRUE(pr && pq);
      EXPECT_TRUE(pr->same_operator(q));
      EXPECT_TRUE(pq->same_operator(r));
    }
    // [iP,iR] ~ [iQ,iR] != 0 implies P ~ Q.
    const auto pr = bracket(p, r);
    if (pr && qr && pr->same_operator(*qr)) EXPECT_TRUE(p.same_operator(q));
    // Jacobi cases with exact signs; brackets of brackets carry the factor 2i.
    auto nested = [](const PauliWord& a, const PauliWord& b, const PauliWord& c) -> std::optional<PauliWord> {
      const auto ab = bracket(a, b);
      if (!ab) return std::nullopt;
      return bracket(*ab, c);
    };
    const auto lhs = nested(p, q, r);
    const bool pq_comm = p.commutes(q);
    if (pq_comm || (p * q).commutes(r)) {
      EXPECT_FALSE(lhs.has_value());
    } else if (p.commutes(r) && !q.commutes(r)) {
      const auto rhs = nested(q, r, p);
      ASSERT_TRUE(lhs && rhs);
      EXPECT_EQ(*lhs, with_phase(*rhs, rhs->phase() + 2));
    } else if (q.commutes(r) && !r.commutes(p)) {
      const auto rhs = nested(r, p, q);
      ASSERT_TRUE(lhs && rhs);
      EXPECT_EQ(*lhs, with_phase(*rhs, rhs->phase() + 2));
    }
  }
}

// A nested commutator in which a word appears twice reduces to the remaining words.
TEST(PauliLemma, RepeatedWordCancels) {
  std::mt19937_64 rng(6);
  int checked = 0;
  while (checked < 200) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const PauliWord a = random_word(n, rng);
    const PauliWord r = random_word(n, rng);
    const PauliWord b = random_word(n, rng);
    // [[[iA, iR], iB], iR] versus [iA, iB].
    const auto ar = bracket(a, r);
    if (!ar) continue;
    const auto arb = bracket(*ar, b);
    if (!arb) continue;
    const auto full = bracket(*arb, r);
    if (!full) continue;
    const auto ab = bracket(a, b);
    ASSERT_TRUE(ab.has_value());
    EXPECT_TRUE(full->same_operator(*ab));
    ++checked;
  }
}

TEST(Closure, Examples) {
  const auto z = dla_closure({PauliWord::parse("Z")});
  ASSERT_EQ(z.size(), 1u);
  EXPECT_EQ(z[0].str(), "Z");
  EXPECT_EQ(dla_closure({PauliWord::parse("X"), PauliWord::parse("Z")}).size(), 3u);
  EXPECT_EQ(dla_closure(xy_generators(3)).size(), 15u);
}

// 2x2 brute force: the real span of i{X,Y,Z} closes into su(2).
TEST(Closure, SingleQubitBruteForce) {
  const std::vector<std::string> ops = {"X", "Y", "Z"};
  for (unsigned mask = 1; mask < 8; ++mask) {
    std::vector<PauliWord> g;
    for (int k = 0; k < 3; ++k) {
      if (mask & (1u << k)) g.push_back(PauliWord::parse(ops[k]));
    }
    const size_t want = g.size() >= 2 ? 3 : 1;
    EXPECT_EQ(dla_closure(g).size(), want);
  }
}

TEST(Closure, XyDimensionAndStructure) {
  for (int n = 2; n <= 8; ++n) {
    const auto basis = dla_closure(xy_generators(n));
    EXPECT_EQ(static_cast<int>(basis.size()), 2 * n * n - n) << n;
    for (const PauliWord& w : basis) EXPECT_TRUE(is_xy_string(w)) << w.str();
    EXPECT_TRUE(std::is_sorted(basis.begin(), basis.end()));
  }
}

TEST(Closure, Deterministic) {
  auto g = xy_generators(5);
  const auto a = dla_closure(g);
  std::reverse(g.begin(), g.end());
  EXPECT_EQ(dla_closure(g), a);
}

TEST(Closure, Cap) {
  ClosureOptions opt;
  opt.max_words = 10;
  EXPECT_THROW(dla_closure(xy_generators(4), opt), Error);
}

TEST(EvenOdd, CommutingSet) {
  const std::vector<PauliWord> g = {PauliWord::parse("ZI"), PauliWord::parse("IZ"), PauliWord::parse("ZZ")};
  const EvenOddSplit s = even_odd_cd(g);
  EXPECT_TRUE(s.k_words.empty());
  EXPECT_EQ(s.p_words.size(), 3u);
}

TEST(EvenOdd, XyRelationsExhaustive) {
  for (int n = 2; n <= 4; ++n) {
    const auto g = xy_generators(n);
    const EvenOddSplit s = even_odd_cd(g);
    EXPECT_EQ(static_cast<int>(s.k_words.size() + s.p_words.size()), 2 * n * n - n);
    std::set<PauliWord> k(s.k_words.begin(), s.k_words.end());
    std::set<PauliWord> p(s.p_words.begin(), s.p_words.end());
    for (const PauliWord& w : g) EXPECT_TRUE(p.count(w));
    auto in = [](const std::set<PauliWord>& set, const PauliWord& w) { return set.count(w.unsigned_word()) > 0; };
    for (const PauliWord& a : s.k_words) {
      for (const PauliWord& b : s.k_words) {
        if (auto c = bracket(a, b)) EXPECT_TRUE(in(k, *c));
      }
      for (const PauliWord& b : s.p_words) {
        if (auto c = bracket(a, b)) EXPECT_TRUE(in(p, *c));
      }
    }
    for (const PauliWord& a : s.p_words) {
      for (const PauliWord& b : s.p_words) {
        if (auto c = bracket(a, b)) EXPECT_TRUE(in(k, *c));
      }
    }
  }
}

// Another horizontal generating set of the same algebra gives the same split.
TEST(EvenOdd, UniqueForHorizontalGenerators) {
  const int n = 4;
  const EvenOddSplit a = even_odd_cd(xy_generators(n));
  std::vector<PauliWord> g;
  for (int i = 0; i + 1 < n; ++i) {
    PauliWord w(n);
    w.set(i, 'Y');
    w.set(i + 1, 'Y');
    g.push_back(w);
  }
  for (int i = 0; i < n; ++i) g.push_back(PauliWord::single(n, i, 'Z'));
  ASSERT_EQ(dla_closure(g).size(), dla_closure(xy_generators(n)).size());
  const EvenOddSplit b = even_odd_cd(g);
  EXPECT_EQ(a.k_words, b.k_words);
  EXPECT_EQ(a.p_words, b.p_words);
}

TEST(EvenOdd, NotDisjoint) {
  try {
    even_odd_cd({PauliWord::parse("X"), PauliWord::parse("Y"), PauliWord::parse("Z")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotDisjoint);
  }
}

TEST(Frustration, Examples) {
  const FrustrationGraph empty({PauliWord::parse("ZI"), PauliWord::parse("IZ"), PauliWord::parse("ZZ")});
  EXPECT_EQ(empty.edge_count(), 0);
  const FrustrationGraph g(xy_generators(4));
  EXPECT_EQ(g.size(), 7);
  EXPECT_TRUE(g.is_path());
  for (int a = 0; a < g.size(); ++a) EXPECT_FALSE(g.adjacent(a, a));
}

TEST(Frustration, MatchesMatrixAnticommutation) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 6);
    std::vector<PauliWord> w;
    for (int k = 0; k < 12; ++k) w.push_back(random_word(n, rng));
    const FrustrationGraph g(w);
    for (int a = 0; a < g.size(); ++a) {
      for (int b = 0; b < g.size(); ++b) {
        const CMat x = w[a].matrix();
        const CMat y = w[b].matrix();
        EXPECT_EQ(g.adjacent(a, b), (x * y + y * x).norm() < 1e-12);
        EXPECT_EQ(g.adjacent(a, b), g.adjacent(b, a));
      }
    }
  }
}

TEST(Majoranas, Examples) {
  const auto c1 = jw_majoranas(1);
  ASSERT_EQ(c1.size(), 2u);
  EXPECT_EQ(c1[0].str(), "Y");
  EXPECT_EQ(c1[1].str(), "X");
  const auto c3 = jw_majoranas(3);
  EXPECT_EQ(c3[1].str(), "ZYI");
  EXPECT_EQ(c3[4].str(), "ZXI");
  EXPECT_EQ(c3[2].str(), "ZZY");
  EXPECT_EQ(c3[5].str(), "ZZX");
}

TEST(Majoranas, CanonicalAnticommutation) {
  for (int n = 1; n <= 8; ++n) {
    const auto c = jw_majoranas(n);
    for (size_t a = 0; a < c.size(); ++a) {
      for (size_t b = 0; b < c.size(); ++b) {
        if (a == b) {
          EXPECT_TRUE((c[a] * c[b]).is_identity());
          EXPECT_EQ((c[a] * c[b]).phase(), 0);
        } else {
          EXPECT_FALSE(c[a].commutes(c[b]));
        }
      }
    }
  }
}

TEST(Majoranas, PairDecompositionMatchesMatrices) {
  const int n = 3;
  const auto c = jw_majoranas(n);
  for (int mu = 0; mu < 2 * n; ++mu) {
    for (int nu = 0; nu < 2 * n; ++nu) {
      if (mu == nu) continue;
      PauliWord w = (c[mu] * c[nu]).unsigned_word();
      for (int ph : {0, 2}) {
        w.set_phase(ph);
        const MajoranaPair m = majorana_pair(w);
        const CMat lhs = kI * w.matrix();
        const CMat rhs = double(m.w) * c[m.mu].matrix() * c[m.nu].matrix();
        EXPECT_LT((lhs - rhs).norm(), 1e-12);
      }
    }
  }
  EXPECT_THROW(majorana_pair(PauliWord::parse("XXX")), Error);
  EXPECT_THROW(majorana_pair(PauliWord::parse("XIZ")), Error);
  EXPECT_THROW(majorana_pair(PauliWord::parse("iZII")), Error);
}

TEST(Rho, Examples) {
  const auto id3 = identity_permutation(6);
  const RhoEntry z = rho_forward(PauliWord::parse("ZII"), id3);
  EXPECT_EQ(z.row, 0);
  EXPECT_EQ(z.col, 3);
  EXPECT_EQ(z.factor, -2.0);
  const RhoEntry xx = rho_forward(PauliWord::parse("XXII"), identity_permutation(8));
  EXPECT_EQ(xx.row, 0);
  EXPECT_EQ(xx.col, 5);
  EXPECT_EQ(xx.factor, 2.0);
  EXPECT_THROW(rho_forward(PauliWord::parse("XYZ"), id3), Error);
}

TEST(Rho, RoundTrip) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<int> pi = identity_permutation(2 * n);
    std::shuffle(pi.begin(), pi.end(), rng);
    const int mu = static_cast<int>(rng() % (2 * n));
    int nu = static_cast<int>(rng() % (2 * n));
    while (nu == mu) nu = static_cast<int>(rng() % (2 * n));
    const auto [w, f] = rho_inverse(mu, nu, pi);
    const RhoEntry e = rho_forward(w, pi);
    EXPECT_EQ(e.row, std::min(mu, nu));
    EXPECT_EQ(e.col, std::max(mu, nu));
    EXPECT_EQ(e.factor, mu < nu ? f : -f);
  }
}

// rho is a Lie algebra homomorphism on quadratic words.
TEST(Rho, Homomorphism) {
  const int n = 3;
  std::mt19937_64 rng(9);
  std::vector<int> pi = identity_permutation(2 * n);
  std::shuffle(pi.begin(), pi.end(), rng);
  const auto c = jw_majoranas(n);
  std::vector<PauliWord> quad;
  for (int a = 0; a < 2 * n; ++a) {
    for (int b = a + 1; b < 2 * n; ++b) quad.push_back((c[a] * c[b]).unsigned_word());
  }
  for (const PauliWord& p : quad) {
    for (const PauliWord& q : quad) {
      const RMat rp = rho_matrix(p, pi);
      const RMat rq = rho_matrix(q, pi);
      const auto r = bracket(p, q);
      const RMat want = rp * rq - rq * rp;
      if (!r) {
        EXPECT_LT(want.norm(), 1e-14);
        continue;
      }
      // [iP, iQ] = 2 i R.
      EXPECT_LT((2.0 * rho_matrix(*r, pi) - want).norm(), 1e-12);
    }
  }
}

TEST(Horizontal, EmptyGivesIdentity) {
  EXPECT_EQ(horizontal_order({}, 3, 3), identity_permutation(6));
}

TEST(Horizontal, XyModelTerms) {
  for (int n : {2, 3, 4, 5, 10, 40}) {
    std::vector<std::pair<int, int>> terms;
    std::vector<PauliWord> words;
    for (int i = 0; i + 1 < n; ++i) {
      for (char op : {'X', 'Y'}) {
        PauliWord w(n);
        w.set(i, op);
        w.set(i + 1, op);
        words.push_back(w);
      }
    }
    for (int i = 0; i < n; ++i) words.push_back(PauliWord::single(n, i, 'Z'));
    for (const PauliWord& w : words) {
      const MajoranaPair m = majorana_pair(w);
      terms.emplace_back(m.mu, m.nu);
    }
    const std::vector<int> pi = horizontal_order(terms, n, n);
    EXPECT_NO_THROW(inverse_permutation(pi));
    for (const PauliWord& w : words) {
      const RhoEntry e = rho_forward(w, pi);
      EXPECT_LT(e.row, n);
      EXPECT_GE(e.col, n);
    }
  }
}

TEST(Horizontal, ClawIsNotEmbeddable) {
  // Brute force: no cell of the 3x3 rook graph has three pairwise
  // non-adjacent neighbours.
  auto adj = [](int u, int v) { return u != v && (u / 3 == v / 3 || u % 3 == v % 3); };
  for (int c = 0; c < 9; ++c) {
    std::vector<int> nb;
    for (int v = 0; v < 9; ++v) {
      if (adj(c, v)) nb.push_back(v);
    }
    for (size_t a = 0; a < nb.size(); ++a) {
      for (size_t b = a + 1; b < nb.size(); ++b) {
        for (size_t d = b + 1; d < nb.size(); ++d) {
          EXPECT_TRUE(adj(nb[a], nb[b]) || adj(nb[a], nb[d]) || adj(nb[b], nb[d]));
        }
      }
    }
  }
  // Centre 0 anticommutes with 1, 2, 3, which mutually commute.
  const FrustrationGraph claw(4, {{0, 1}, {0, 2}, {0, 3}});
  try {
    rook_embed(claw, 3, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotEmbeddable);
  }
  // The same words as Pauli strings.
  const FrustrationGraph words({PauliWord::parse("XII"), PauliWord::parse("ZII"), PauliWord::parse("ZZI"),
                                PauliWord::parse("ZIZ")});
  EXPECT_EQ(words.edge_count(), 3);
  EXPECT_THROW(rook_embed(words, 3, 3), Error);
  // Removing a leaf makes it embeddable.
  EXPECT_EQ(rook_embed(FrustrationGraph(3, {{0, 1}, {0, 2}}), 3, 3).size(), 3u);
}

// Three Majorana pairs that pairwise share one index form a triangle; it
// embeds in a rook line but no Majorana is common to all three.
TEST(Horizontal, TriangleOfPairsIsNotEmbeddable) {
  EXPECT_EQ(rook_embed(FrustrationGraph(3, {{0, 1}, {1, 2}, {0, 2}}), 3, 3).size(), 3u);
  try {
    horizontal_order({{0, 1}, {1, 2}, {0, 2}}, 3, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotEmbeddable);
  }
}

TEST(Horizontal, MatchesBruteForce) {
  std::mt19937_64 rng(10);
  int yes = 0;
  int no = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const int p = 1 + static_cast<int>(rng() % 4);
    const int q = 1 + static_cast<int>(rng() % 4);
    const int m = p + q;
    if (m < 2) continue;
    std::vector<std::pair<int, int>> terms;
    const int count = 1 + static_cast<int>(rng() % 7);
    for (int k = 0; k < count; ++k) {
      const int a = static_cast<int>(rng() % m);
      int b = static_cast<int>(rng() % m);
      while (b == a) b = static_cast<int>(rng() % m);
      terms.emplace_back(a, b);
    }
    if (brute_force_horizontal(terms, p, q)) {
      ++yes;
      const std::vector<int> pi = horizontal_order(terms, p, q);
      EXPECT_NO_THROW(inverse_permutation(pi));
      for (auto [a, b] : terms) EXPECT_NE(pi[a] < p, pi[b] < p);
    } else {
      ++no;
      EXPECT_THROW(horizontal_order(terms, p, q), Error);
    }
  }
  EXPECT_GT(yes, 50);
  EXPECT_GT(no, 50);
}

TEST(Horizontal, BudgetExhaustion) {
  HorizontalOptions opt;
  opt.budget = 3;
  std::vector<std::pair<int, int>> terms;
  for (int i = 0; i < 9; ++i) terms.emplace_back(i, i + 10);
  try {
    horizontal_order(terms, 10, 10, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Budget);
  }
}

TEST(Sentence, JsonAndNormalize) {
  const nlohmann::json j = {{"terms", {{{"pauli", "XXI"}, {"coeff", 0.5}}, {{"pauli", "-ZII"}, {"coeff", 1.0}},
                                       {{"pauli", "IZI"}, {"coeff", 0.0}}}}};
  const PauliSentence s = sentence_from_json(j);
  ASSERT_EQ(s.terms().size(), 2u);
  EXPECT_EQ(s.terms().at(PauliWord::parse("ZII")), -1.0);
  const PauliSentence t = sentence_from_json(to_json(s));
  EXPECT_EQ(t.terms(), s.terms());
  EXPECT_LT((s.matrix() - s.matrix().adjoint()).norm(), 1e-14);
}

TEST(PauliWord, FillMatchesSet) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 200);
    const int a = static_cast<int>(rng() % (n + 1));
    const int b = a + static_cast<int>(rng() % (n - a + 1));
    const char op = "IXYZ"[rng() % 4];
    PauliWord w = random_word(n, rng);
    PauliWord v = w;
    w.fill(a, b, op);
    for (int k = a; k < b; ++k) v.set(k, op);
    EXPECT_EQ(w, v);
  }
}

TEST(Majoranas, ProductAndBulkInverse) {
  const int n = 70;
  const auto c = jw_majoranas(n);
  std::mt19937_64 rng(12);
  std::vector<int> pi = identity_permutation(2 * n);
  std::shuffle(pi.begin(), pi.end(), rng);
  const RhoInverse inv(pi);
  for (int rep = 0; rep < 300; ++rep) {
    const int a = static_cast<int>(rng() % (2 * n));
    const int b = static_cast<int>(rng() % (2 * n));
    EXPECT_EQ(majorana_product(n, a, b), c[a] * c[b]);
    if (a != b) EXPECT_EQ(inv(a, b), rho_inverse(a, b, pi));
  }
}
