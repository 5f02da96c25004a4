#pragma once

// Pauli words in symplectic (x, z) encoding, their Lie algebra, frustration
// graphs, Jordan-Wigner Majoranas and the so(2n) representation of
// Majorana-quadratic words.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cartan/densela.hpp"

namespace cartan {

// i^phase * (sigma_0 (x) sigma_1 (x) ...), with (x, z) = (1,0) X, (0,1) Z,
// (1,1) Y. Qubit 0 is the leftmost character and the most significant bit of
// the dense matrix index.
class PauliWord {
 public:
  PauliWord() = default;
  explicit PauliWord(int n_qubits);
  // "XZY", "-iXX", "+Z", "iI".
  static PauliWord parse(const std::string& s);
  static PauliWord single(int n_qubits, int qubit, char op);

  int n_qubits() const { return n_; }
  int phase() const { return phase_; }
  void set_phase(int k) { phase_ = ((k % 4) + 4) % 4; }
  bool x(int q) const { return (x_[q >> 6] >> (q & 63)) & 1u; }
  bool z(int q) const { return (z_[q >> 6] >> (q & 63)) & 1u; }
  void set(int q, char op);
  // Sets qubits [begin, end) to op.
  void fill(int begin, int end, char op);
  char op(int q) const;
  const std::vector<uint64_t>& x_bits() const { return x_; }
  const std::vector<uint64_t>& z_bits() const { return z_; }

  // Same word with phase 0.
  PauliWord unsigned_word() const;
  bool is_identity() const;
  int weight() const;
  // Characters only, no phase.
  std::string str() const;
  // With phase prefix ("", "i", "-", "-i").
  std::string to_string() const;

  bool commutes(const PauliWord& o) const;
  PauliWord operator*(const PauliWord& o) const;

  // Dense 2^n matrix including the phase; n <= 12.
  CMat matrix() const;

  // Ordered by x bits, then z bits, then phase.
  bool operator<(const PauliWord& o) const;
  bool operator==(const PauliWord& o) const;
  bool operator!=(const PauliWord& o) const { return !(*this == o); }
  // Equal up to phase.
  bool same_operator(const PauliWord& o) const { return x_ == o.x_ && z_ == o.z_; }

 private:
  int n_ = 0;
  int phase_ = 0;
  std::vector<uint64_t> x_;
  std::vector<uint64_t> z_;
};

struct PauliWordHash {
  size_t operator()(const PauliWord& w) const;
};

// [a, b] = 2 * result when a and b anticommute; nullopt when they commute.
std::optional<PauliWord> commutator(const PauliWord& a, const PauliWord& b);

// For Hermitian words P, Q: [iP, iQ] = 2i * result, so the result carries the
// sign in its phase (0 or 2). nullopt when P and Q commute.
std::optional<PauliWord> bracket(const PauliWord& p, const PauliWord& q);

// Real combination of phase-free words.
class PauliSentence {
 public:
  PauliSentence() = default;

  void add(const PauliWord& w, double coeff);
  // Drops zero coefficients; rejects non-finite ones.
  void normalize();
  const std::map<PauliWord, double>& terms() const { return terms_; }
  std::vector<PauliWord> words() const;
  int n_qubits() const;
  CMat matrix() const;

 private:
  std::map<PauliWord, double> terms_;
};

nlohmann::json to_json(const PauliSentence& s);
PauliSentence sentence_from_json(const nlohmann::json& j);

struct ClosureOptions {
  size_t max_words = 1000000;
};

// Basis words of the Lie closure of span{i w}, phase-free and sorted.
std::vector<PauliWord> dla_closure(const std::vector<PauliWord>& generators, const ClosureOptions& opt = {});

struct EvenOddSplit {
  std::vector<PauliWord> k_words;
  std::vector<PauliWord> p_words;
};

// Words reached by even-order nested commutators of the generators go to p,
// odd-order ones to k. Throws NotDisjoint if a word is reached at both parities.
EvenOddSplit even_odd_cd(const std::vector<PauliWord>& generators, const ClosureOptions& opt = {});

class FrustrationGraph {
 public:
  explicit FrustrationGraph(std::vector<PauliWord> words);
  // Edges from an explicit adjacency list (vertices carry no words).
  FrustrationGraph(int n_vertices, const std::vector<std::pair<int, int>>& edges);

  int size() const { return n_; }
  const std::vector<PauliWord>& vertices() const { return words_; }
  bool adjacent(int a, int b) const { return (adj_[a * stride_ + (b >> 6)] >> (b & 63)) & 1u; }
  int degree(int a) const;
  std::vector<int> neighbors(int a) const;
  int edge_count() const;
  // Connected, acyclic, max degree 2 (a single vertex counts).
  bool is_path() const;

 private:
  void connect(int a, int b);

  int n_ = 0;
  size_t stride_ = 0;
  std::vector<PauliWord> words_;
  std::vector<uint64_t> adj_;
};

// c_j = Z..Z Y_j and c_{n+j} = Z..Z X_j for j = 0..n-1.
std::vector<PauliWord> jw_majoranas(int n);

// Majorana pair (mu, nu) with i P = w c_mu c_nu, w = +-1. Throws NotQuadratic.
struct MajoranaPair {
  int mu = 0;
  int nu = 0;
  int w = 1;
};
MajoranaPair majorana_pair(const PauliWord& word);

struct HorizontalOptions {
  long long budget = 10000000;
};

// Cells (row, column) of an induced embedding of g into the p x q rook graph,
// whose vertices are the cells and whose edges join cells sharing a line.
std::vector<std::pair<int, int>> rook_embed(const FrustrationGraph& g, int p, int q, const HorizontalOptions& opt = {});

// Permutation pi of the 2n Majorana indices (old index -> new position) under
// which every term pair lands across the p | q split, found by embedding the
// term frustration graph as an induced subgraph of the p x q rook graph.
std::vector<int> horizontal_order(const std::vector<std::pair<int, int>>& terms, int p, int q,
                                  const HorizontalOptions& opt = {});

// rho(i P) = factor * (E_{row,col} - E_{col,row}) with row < col, factor +-2.
struct RhoEntry {
  int row = 0;
  int col = 0;
  double factor = 0.0;
};
RhoEntry rho_forward(const PauliWord& word, const std::vector<int>& pi);

// Word P with rho(i P) = factor * (E_{mu,nu} - E_{nu,mu}).
std::pair<PauliWord, double> rho_inverse(int mu, int nu, const std::vector<int>& pi);

// rho_inverse with the permutation inverted once, for bulk back-mapping.
class RhoInverse {
 public:
  explicit RhoInverse(const std::vector<int>& pi);
  std::pair<PauliWord, double> operator()(int mu, int nu) const;

 private:
  int n_ = 0;
  std::vector<int> inv_;
};

// c_a c_b as a word with phase.
PauliWord majorana_product(int n, int a, int b);

std::vector<int> identity_permutation(int n);
std::vector<int> inverse_permutation(const std::vector<int>& pi);

}  // namespace cartan
