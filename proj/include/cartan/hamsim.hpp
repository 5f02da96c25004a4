#pragma once

// Fixed-depth time-evolution compiler for free-fermionic (so(2n)) Pauli
// Hamiltonians, exact diagonalization by a single BDI decomposition, and a
// dense circuit evaluator.

#include <string>
#include <vector>

#include "cartan/densela.hpp"
#include "cartan/pauli.hpp"
#include "cartan/random.hpp"
#include "cartan/recursion.hpp"

namespace cartan {

// H = sum_i alpha_x[i] X_i X_{i+1} + alpha_y[i] Y_i Y_{i+1} + sum_i beta[i] Z_i.
struct XYModel {
  int n = 0;
  std::vector<double> alpha_x;
  std::vector<double> alpha_y;
  std::vector<double> beta;

  void validate() const;
  PauliSentence hamiltonian() const;
};

// Couplings and fields uniform in [-1, 1].
XYModel random_xy_model(int n, Rng& rng);

nlohmann::json to_json(const XYModel& m);
XYModel xy_model_from_json(const nlohmann::json& j);

struct PauliRotation {
  PauliWord word;
  double angle = 0.0;
};

// Each gate is exp(-i angle/2 word); the first gate acts first.
struct Circuit {
  int n_qubits = 0;
  std::vector<PauliRotation> gates;

  // Gates reversed with negated angles.
  Circuit inverse() const;
};

nlohmann::json to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& j);

struct CompileReport {
  long long gate_count = 0;
  // Gates per recursion level, root first.
  std::vector<long long> depth_by_layer;
  double wall_time_seconds = 0.0;
  // Frobenius distance to the dense target; negative when not verified.
  double residual = -1.0;
};

nlohmann::json to_json(const CompileReport& r);

struct CompileOptions {
  RecursionOptions recursion;
  // Dense verification against exp(-iHt), n <= 12.
  bool verify = false;
};

struct CompiledCircuit {
  Circuit circuit;
  CompileReport report;
};

// rho(iH) = [[0, B], [-B^T, 0]] in the Jordan-Wigner Majorana order.
RMat build_xy_matrix(const XYModel& m);

// Circuit for exp(-iHt).
CompiledCircuit compile_evolution(const XYModel& m, double t, const CompileOptions& opt = {});

// Same for any rho(iH) horizontal for BDI(n, n) under Majorana permutation pi.
CompiledCircuit compile_rho_evolution(const RMat& rho_ih, const std::vector<int>& pi, double t,
                                      const CompileOptions& opt = {});

// exp(-iHt) = K exp(t a) K^dag with a t-independent K circuit.
struct HorizontalCircuit {
  Circuit k_circuit;
  std::vector<PauliWord> csa_words;
  // The CSA gate on csa_words[j] has angle csa_rates[j] * t.
  std::vector<double> csa_rates;
  CompileReport report;

  Circuit at(double t) const;
};

HorizontalCircuit compile_horizontal(const XYModel& m, const CompileOptions& opt = {});
HorizontalCircuit compile_rho_horizontal(const RMat& rho_ih, const std::vector<int>& pi,
                                         const CompileOptions& opt = {});

// H = C (sum_j coeffs[j] Z_j) C^dag for a circuit C.
struct Diagonalization {
  std::vector<double> coeffs;
  double wall_time_seconds = 0.0;
};

Diagonalization diagonalize(const XYModel& m);
// All 2^n sums sum_j +-coeffs[j], ascending; n <= 20.
std::vector<double> expand_spectrum(const std::vector<double>& coeffs);

struct AutoMapOptions {
  // Compute the DLA by closure; otherwise the Majorana structure of the
  // terms is taken as given.
  bool compute_dla = true;
  ClosureOptions closure;
  HorizontalOptions horizontal;
};

struct AutoMapResult {
  RMat rho;
  std::vector<int> pi;
  std::vector<PauliWord> generators;
  // Zero when the closure was skipped.
  long long dla_dim = 0;
};

AutoMapResult auto_map(const PauliSentence& h, const AutoMapOptions& opt = {});
nlohmann::json to_json(const AutoMapResult& r);

// Dense product of the gates, n <= 12.
DenseMatrix evaluate_circuit(const Circuit& c);

// exp(-iHt) by dense Hermitian eigendecomposition, n <= 12.
CMat dense_evolution(const PauliSentence& h, double t);

}  // namespace cartan
