#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "cartan/error.hpp"
#include "cartan/hamsim.hpp"

using namespace cartan;

namespace {

const cplx kI(0.0, 1.0);

// exp(-iHt) by Pade scaling and squaring.
CMat oracle_evolution(const XYModel& m, double t) {
  const CMat h = m.hamiltonian().matrix();
  const CMat x = (-kI * t) * h;
  return x.exp();
}

CMat oracle_evolution(const PauliSentence& h, double t) {
  const CMat x = (-kI * t) * h.matrix();
  return x.exp();
}

std::vector<double> dense_spectrum(const PauliSentence& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h.matrix());
  std::vector<double> e(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(e.begin(), e.end());
  return e;
}

bool is_xy_string(const PauliWord& w) {
  const std::string s = w.str();
  const size_t a = s.find_first_not_of('I');
  const size_t b = s.find_last_not_of('I');
  if (a == std::string::npos) return false;
  if (a == b) return s[a] == 'Z';
  if ((s[a] != 'X' && s[a] != 'Y') || (s[b] != 'X' && s[b] != 'Y')) return false;
  for (size_t k = a + 1; k < b; ++k) {
    if (s[k] != 'Z') return false;
  }
  return true;
}

int span(const PauliWord& w) {
  const std::string s = w.str();
  return static_cast<int>(s.find_last_not_of('I') - s.find_first_not_of('I')) + 1;
}

}  // namespace

TEST(XyMatrix, ThreeSiteLayout) {
  XYModel m;
  m.n = 3;
  m.alpha_x = {0.11, 0.13};
  m.alpha_y = {0.17, 0.19};
  m.beta = {0.23, 0.29, 0.31};
  const double ax1 = 0.11, ax2 = 0.13, ay1 = 0.17, ay2 = 0.19, b1 = 0.23, b2 = 0.29, b3 = 0.31;
  RMat want(6, 6);
  want << 0, 0, 0, -b1, ax1, 0,
          0, 0, 0, ay1, -b2, ax2,
          0, 0, 0, 0, ay2, -b3,
          b1, -ay1, 0, 0, 0, 0,
          -ax1, b2, -ay2, 0, 0, 0,
          0, -ax2, b3, 0, 0, 0;
  want *= 2.0;
  EXPECT_EQ(build_xy_matrix(m), want);
}

TEST(XyMatrix, ZeroCouplings) {
  XYModel m;
  m.n = 4;
  m.alpha_x.assign(3, 0.0);
  m.alpha_y.assign(3, 0.0);
  m.beta.assign(4, 0.0);
  EXPECT_EQ(build_xy_matrix(m).norm(), 0.0);
}

TEST(XyMatrix, SpectrumMatchesSingularValues) {
  Rng rng(1);
  for (int n : {1, 2, 5, 9}) {
    const XYModel m = random_xy_model(n, rng);
    const RMat r = build_xy_matrix(m);
    const RMat b = r.topRightCorner(n, n);
    Eigen::ComplexEigenSolver<CMat> es(r.cast<cplx>() / (2.0 * kI));
    std::vector<double> ev;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) ev.push_back(es.eigenvalues()(k).real());
    std::sort(ev.begin(), ev.end());
    Eigen::JacobiSVD<RMat> svd(b / 2.0);
    std::vector<double> want;
    for (Eigen::Index k = 0; k < n; ++k) {
      want.push_back(svd.singularValues()(k));
      want.push_back(-svd.singularValues()(k));
    }
    std::sort(want.begin(), want.end());
    for (size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(ev[k], want[k], 1e-12);
  }
}

TEST(XyMatrix, MatchesRhoOfHamiltonianTerms) {
  Rng rng(2);
  const XYModel m = random_xy_model(6, rng);
  const std::vector<int> pi = identity_permutation(12);
  RMat r = RMat::Zero(12, 12);
  const PauliSentence h = m.hamiltonian();
  for (const auto& [w, c] : h.terms()) {
    const RhoEntry e = rho_forward(w, pi);
    r(e.row, e.col) += c * e.factor;
    r(e.col, e.row) -= c * e.factor;
  }
  EXPECT_LT((r - build_xy_matrix(m)).norm(), 1e-15);
}

TEST(Evaluate, SingleZ) {
  Circuit c;
  c.n_qubits = 1;
  c.gates.push_back({PauliWord::parse("Z"), 0.7});
  const CMat u = evaluate_circuit(c).to_complex();
  EXPECT_NEAR(std::abs(u(0, 0) - std::exp(cplx(0, -0.35))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u(1, 1) - std::exp(cplx(0, 0.35))), 0.0, 1e-15);
  EXPECT_EQ(u(0, 1), cplx(0.0));
}

TEST(Evaluate, Empty) {
  Circuit c;
  c.n_qubits = 3;
  EXPECT_EQ(evaluate_circuit(c).to_complex(), CMat::Identity(8, 8));
}

TEST(Evaluate, RandomGatesMatchExpm) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const char* words[] = {"XYZ", "IZI", "YYX", "XII", "ZZZ"};
  for (int rep = 0; rep < 10; ++rep) {
    Circuit c;
    c.n_qubits = 3;
    CMat want = CMat::Identity(8, 8);
    for (int k = 0; k < 3; ++k) {
      const PauliWord w = PauliWord::parse(words[rng() % 5]);
      const double a = u(rng);
      c.gates.push_back({w, a});
      const CMat g = ((-0.5 * a * kI) * w.matrix()).exp();
      want = g * want;
    }
    EXPECT_LT((evaluate_circuit(c).to_complex() - want).norm(), 1e-12);
  }
  Circuit big;
  big.n_qubits = 13;
  EXPECT_THROW(evaluate_circuit(big), Error);
}

TEST(Compile, ZeroTimeIsIdentity) {
  Rng rng(4);
  const XYModel m = random_xy_model(5, rng);
  const CompiledCircuit c = compile_evolution(m, 0.0);
  EXPECT_EQ(c.report.gate_count, 45);
  for (const PauliRotation& g : c.circuit.gates) EXPECT_EQ(g.angle, 0.0);
}

TEST(Compile, GateCount) {
  Rng rng(5);
  for (int n = 1; n <= 40; n += (n < 10 ? 1 : 7)) {
    const CompiledCircuit c = compile_evolution(random_xy_model(n, rng), 0.8);
    EXPECT_EQ(c.report.gate_count, 2LL * n * n - n) << n;
    EXPECT_EQ(static_cast<long long>(c.circuit.gates.size()), c.report.gate_count);
    long long sum = 0;
    for (long long l : c.report.depth_by_layer) sum += l;
    EXPECT_EQ(sum, c.report.gate_count);
  }
}

TEST(Compile, DenseExactness) {
  Rng rng(6);
  for (int n = 2; n <= 7; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const XYModel m = random_xy_model(n, rng);
      for (double t : {0.1, 1.0, -2.5}) {
        const CompiledCircuit c = compile_evolution(m, t);
        const double res = (evaluate_circuit(c.circuit).to_complex() - oracle_evolution(m, t)).norm();
        EXPECT_LE(res, 1e-8 * std::pow(2.0, n / 2.0)) << n << " " << t;
      }
    }
  }
}

TEST(Compile, VerifyOption) {
  Rng rng(7);
  CompileOptions opt;
  opt.verify = true;
  const CompiledCircuit c = compile_evolution(random_xy_model(4, rng), 0.6, opt);
  EXPECT_GE(c.report.residual, 0.0);
  EXPECT_LT(c.report.residual, 1e-9);
}

TEST(Compile, GateInventory) {
  Rng rng(8);
  for (int n : {4, 7, 12, 25}) {
    const CompiledCircuit c = compile_evolution(random_xy_model(n, rng), 1.0);
    int z = 0;
    for (const PauliRotation& g : c.circuit.gates) {
      EXPECT_TRUE(is_xy_string(g.word)) << g.word.str();
      EXPECT_EQ(g.word.phase(), 0);
      if (g.word.weight() == 1) ++z;
      EXPECT_LE(span(g.word), (n + 1) / 2 + 1) << g.word.str();
    }
    EXPECT_EQ(z, n);
    ASSERT_GE(c.report.depth_by_layer.size(), 1u);
    EXPECT_EQ(c.report.depth_by_layer[0], n);
  }
}

TEST(Horizontal, KIndependentOfTimeAndLinearRates) {
  Rng rng(9);
  const XYModel m = random_xy_model(5, rng);
  const HorizontalCircuit h = compile_horizontal(m);
  const size_t nk = h.k_circuit.gates.size();
  EXPECT_EQ(2 * nk + h.csa_words.size(), 45u);
  EXPECT_EQ(h.report.gate_count, 45);
  std::vector<Circuit> cs;
  for (double t : {0.1, 1.0, 10.0}) cs.push_back(h.at(t));
  for (const Circuit& c : cs) {
    for (size_t k = 0; k < nk; ++k) {
      EXPECT_EQ(c.gates[nk + h.csa_words.size() + k].word, cs[0].gates[nk + h.csa_words.size() + k].word);
      EXPECT_EQ(c.gates[nk + h.csa_words.size() + k].angle, cs[0].gates[nk + h.csa_words.size() + k].angle);
      EXPECT_EQ(c.gates[k].angle, cs[0].gates[k].angle);
    }
  }
  const Circuit a = h.at(0.7);
  const Circuit b = h.at(1.4);
  for (size_t j = 0; j < h.csa_words.size(); ++j) EXPECT_EQ(b.gates[nk + j].angle, 2.0 * a.gates[nk + j].angle);
}

TEST(Horizontal, DenseExactness) {
  Rng rng(10);
  for (int n = 1; n <= 6; ++n) {
    const XYModel m = random_xy_model(n, rng);
    const HorizontalCircuit h = compile_horizontal(m);
    for (double t : {0.1, 1.0, 10.0}) {
      const double res = (evaluate_circuit(h.at(t)).to_complex() - oracle_evolution(m, t)).norm();
      EXPECT_LE(res, 1e-8) << n << " " << t;
    }
  }
}

TEST(Diagonalize, NoCouplingsReadsOffFields) {
  XYModel m;
  m.n = 3;
  m.alpha_x.assign(2, 0.0);
  m.alpha_y.assign(2, 0.0);
  m.beta = {0.3, -1.2, 0.7};
  const Diagonalization d = diagonalize(m);
  ASSERT_EQ(d.coeffs.size(), 3u);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(d.coeffs[j], m.beta[j]);
  const std::vector<double> s = expand_spectrum(d.coeffs);
  EXPECT_EQ(s.size(), 8u);
  EXPECT_NEAR(s.front(), -2.2, 1e-15);
  EXPECT_NEAR(s.back(), 2.2, 1e-15);
}

TEST(Diagonalize, SpectrumMatchesDense) {
  Rng rng(11);
  for (int n = 1; n <= 9; ++n) {
    const XYModel m = random_xy_model(n, rng);
    const std::vector<double> got = expand_spectrum(diagonalize(m).coeffs);
    const std::vector<double> want = dense_spectrum(m.hamiltonian());
    ASSERT_EQ(got.size(), want.size());
    for (size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-10) << n;
  }
}

TEST(Diagonalize, CoefficientsAreHalfSingularValues) {
  Rng rng(12);
  const XYModel m = random_xy_model(8, rng);
  std::vector<double> c = diagonalize(m).coeffs;
  for (double& x : c) x = std::abs(x);
  std::sort(c.begin(), c.end());
  Eigen::JacobiSVD<RMat> svd(RMat(build_xy_matrix(m).topRightCorner(8, 8)) / 2.0);
  std::vector<double> s(svd.singularValues().data(), svd.singularValues().data() + 8);
  std::sort(s.begin(), s.end());
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(c[k], s[k], 1e-12);
}

TEST(AutoMap, XyModelMatchesHardcodedUpToPermutation) {
  Rng rng(13);
  for (int n = 2; n <= 12; ++n) {
    const XYModel m = random_xy_model(n, rng);
    const AutoMapResult a = auto_map(m.hamiltonian());
    EXPECT_EQ(a.dla_dim, 2LL * n * n - n);
    EXPECT_TRUE(FrustrationGraph(a.generators).is_path());
    EXPECT_EQ(static_cast<int>(a.generators.size()), 2 * n - 1);
    const RMat hard = build_xy_matrix(m);
    // A signed permutation S with S hard S^T = auto.
    RMat s = RMat::Zero(2 * n, 2 * n);
    for (int k = 0; k < 2 * n; ++k) s(a.pi[k], k) = 1.0;
    EXPECT_LT((s * hard * s.transpose() - a.rho).norm(), 1e-14);
    // Horizontal for BDI(n, n).
    EXPECT_EQ(a.rho.topLeftCorner(n, n).norm(), 0.0);
    EXPECT_EQ(a.rho.bottomRightCorner(n, n).norm(), 0.0);
    Eigen::JacobiSVD<RMat> s1(RMat(hard.topRightCorner(n, n)));
    Eigen::JacobiSVD<RMat> s2(RMat(a.rho.topRightCorner(n, n)));
    EXPECT_LT((s1.singularValues() - s2.singularValues()).norm(), 1e-10);
  }
}

TEST(AutoMap, FieldsOnly) {
  PauliSentence h;
  for (int i = 0; i < 4; ++i) h.add(PauliWord::single(4, i, 'Z'), 0.5 + i);
  const AutoMapResult a = auto_map(h);
  EXPECT_EQ(a.dla_dim, 4);
  EXPECT_EQ(a.rho.topLeftCorner(4, 4).norm(), 0.0);
  const RMat b = a.rho.topRightCorner(4, 4);
  EXPECT_EQ(RMat(b.diagonal().asDiagonal()), b);
}

TEST(AutoMap, RejectsNonFreeFermionic) {
  PauliSentence h;
  h.add(PauliWord::parse("XXX"), 1.0);
  h.add(PauliWord::parse("ZII"), 1.0);
  try {
    auto_map(h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFreeFermionic);
  }
  PauliSentence g;
  g.add(PauliWord::parse("XI"), 1.0);
  g.add(PauliWord::parse("ZI"), 1.0);
  EXPECT_THROW(auto_map(g), Error);
}

// Majorana-quadratic Hamiltonian that is horizontal only after reordering.
TEST(AutoMap, ScrambledChainCompilesExactly) {
  Rng rng(14);
  const int n = 4;
  std::vector<int> sigma = identity_permutation(2 * n);
  std::shuffle(sigma.begin(), sigma.end(), rng);
  // Path c_0 c_n, c_n c_1, c_1 c_{n+1}, ... relabelled by sigma.
  std::vector<std::pair<int, int>> chain;
  for (int j = 0; j < n; ++j) {
    chain.emplace_back(j, n + j);
    if (j + 1 < n) chain.emplace_back(n + j, j + 1);
  }
  PauliSentence h;
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (auto [a, b] : chain) {
    PauliWord w = majorana_product(n, sigma[a], sigma[b]);
    // c_a c_b = i^k s with odd k, so s is Hermitian.
    w.set_phase(0);
    h.add(w, u(rng));
  }
  const AutoMapResult a = auto_map(h);
  for (double t : {0.3, 1.7}) {
    const CompiledCircuit c = compile_rho_evolution(a.rho, a.pi, t);
    EXPECT_EQ(c.report.gate_count, 2 * n * n - n);
    EXPECT_LT((evaluate_circuit(c.circuit).to_complex() - oracle_evolution(h, t)).norm(), 1e-9);
  }
}

TEST(AutoMap, IntermediateSkipsClosure) {
  Rng rng(15);
  const XYModel m = random_xy_model(6, rng);
  AutoMapOptions opt;
  opt.compute_dla = false;
  const AutoMapResult a = auto_map(m.hamiltonian(), opt);
  EXPECT_EQ(a.dla_dim, 0);
  EXPECT_EQ(a.rho, auto_map(m.hamiltonian()).rho);
}

TEST(Json, CircuitRoundTrip) {
  Rng rng(16);
  const CompiledCircuit c = compile_evolution(random_xy_model(3, rng), 0.4);
  const Circuit d = circuit_from_json(to_json(c.circuit));
  ASSERT_EQ(d.gates.size(), c.circuit.gates.size());
  for (size_t k = 0; k < d.gates.size(); ++k) {
    EXPECT_EQ(d.gates[k].word, c.circuit.gates[k].word);
    EXPECT_EQ(d.gates[k].angle, c.circuit.gates[k].angle);
  }
  const XYModel m = random_xy_model(4, rng);
  EXPECT_EQ(build_xy_matrix(xy_model_from_json(to_json(m))), build_xy_matrix(m));
}
