#pragma once

// Qubit-level synthesis: recursive AIII + A decomposition into multiplexed
// rotations, and gate emission for the CSG factors of the completely
// orthogonal and completely symplectic recursions.

#include <string>
#include <vector>

#include "cartan/densela.hpp"
#include "cartan/recursion.hpp"

namespace cartan {

enum class GateKind { MultiplexedRot, SingleQubitUnitary, GlobalPhase };

// Qubit 0 is the most significant bit of the dense index.
struct GateOp {
  GateKind kind = GateKind::GlobalPhase;
  // MultiplexedRot: for control bitstring j (controls[0] most significant),
  // exp(-i angles[j]/2 sigma_axis) on the target.
  char axis = 'Z';
  int target = 0;
  std::vector<int> controls;
  std::vector<double> angles;
  // SingleQubitUnitary: 2x2 matrix on the target.
  CMat u;
  // GlobalPhase: multiplies by exp(i phase).
  double phase = 0.0;
};

// Ordered op list; the first op acts first.
struct GateIR {
  int n_qubits = 0;
  std::vector<GateOp> ops;

  int count(GateKind k) const;
  void append(const GateIR& other);
};

nlohmann::json to_json(const GateIR& g);
GateIR gate_ir_from_json(const nlohmann::json& j);

// Dense unitary of the ops, n <= 10.
CMat evaluate(const GateIR& g);

enum class CsaAxis { Y, X };

// QSD (Y) or Block-ZXZ (X) recursion down to single-qubit unitaries.
GateIR qsd_synthesize(const CMat& u, CsaAxis axis = CsaAxis::Y, const KakOptions& opt = {});

// Gates for a dense diagonal unitary: one multiplexed Z per qubit and a
// global phase.
GateIR diagonal_to_gates(const CVec& diag, int n_qubits);

// Gates for a root-frame matrix that is diagonal or a real multiplexed
// rotation on one target; false otherwise.
bool csg_to_gates(const CMat& m, int n_qubits, GateIR& out, double tol = 1e-12);

enum class OrthoSympFlavor { Orthogonal, Symplectic };

struct SynthStep {
  enum class Kind { Gates, Factor };
  Kind kind = Kind::Factor;
  GateIR gates;
  // Factor: the flattened tree item (K leaf, or a CSG not expressible as gates).
  FlatItem item;
};

struct OrthoSympSynthesis {
  FactorTree tree;
  // Acting order: the first step acts first.
  std::vector<SynthStep> steps;
};

OrthoSympSynthesis ortho_symp_synthesize(const CMat& u, OrthoSympFlavor flavor,
                                         const RecursionOptions& opt = {});

// Dense product of all steps.
CMat evaluate(const OrthoSympSynthesis& s);

nlohmann::json to_json(const OrthoSympSynthesis& s);

}  // namespace cartan
