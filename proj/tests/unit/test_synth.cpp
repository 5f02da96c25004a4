#include <gtest/gtest.h>

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "cartan/error.hpp"
#include "cartan/random.hpp"
#include "cartan/synth.hpp"

using namespace cartan;

namespace {

const cplx kI(0.0, 1.0);

CMat pauli(char a) {
  CMat m(2, 2);
  switch (a) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Sum over control values of the tensor product of projectors, the rotation
// and identities, built factor by factor in qubit order.
CMat mux_oracle(const GateOp& op, int n) {
  const int d = 1 << n;
  CMat total = CMat::Zero(d, d);
  const int nc = static_cast<int>(op.controls.size());
  for (int j = 0; j < (1 << nc); ++j) {
    CMat rot = ((-0.5 * op.angles[j] * kI) * pauli(op.axis)).exp();
    CMat m = CMat::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
      CMat f = CMat::Identity(2, 2);
      if (q == op.target) {
        f = rot;
      } else {
        for (int c = 0; c < nc; ++c) {
          if (op.controls[c] != q) continue;
          const int b = (j >> (nc - 1 - c)) & 1;
          f = CMat::Zero(2, 2);
          f(b, b) = 1.0;
        }
      }
      m = CMat(Eigen::kroneckerProduct(m, f));
    }
    total += m;
  }
  return total;
}

int count_axis(const GateIR& g, char axis) {
  int c = 0;
  for (const GateOp& op : g.ops) c += op.kind == GateKind::MultiplexedRot && op.axis == axis;
  return c;
}

}  // namespace

TEST(GateIr, MultiplexedRotationSemantics) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (char axis : {'X', 'Y', 'Z'}) {
    GateOp op;
    op.kind = GateKind::MultiplexedRot;
    op.axis = axis;
    op.target = 1;
    op.controls = {3, 0};
    for (int j = 0; j < 4; ++j) op.angles.push_back(u(rng));
    GateIR g;
    g.n_qubits = 4;
    g.ops.push_back(op);
    EXPECT_LT((evaluate(g) - mux_oracle(op, 4)).norm(), 1e-13) << axis;
  }
}

TEST(GateIr, SingleQubitAndPhase) {
  Rng rng(2);
  GateIR g;
  g.n_qubits = 2;
  GateOp a;
  a.kind = GateKind::SingleQubitUnitary;
  a.target = 1;
  a.u = haar_unitary(2, rng);
  GateOp p;
  p.kind = GateKind::GlobalPhase;
  p.phase = 0.4;
  g.ops = {a, p};
  const CMat want = std::exp(kI * 0.4) * CMat(Eigen::kroneckerProduct(CMat::Identity(2, 2), a.u));
  EXPECT_LT((evaluate(g) - want).norm(), 1e-14);
}

TEST(GateIr, RejectsMalformed) {
  GateIR g;
  g.n_qubits = 2;
  GateOp op;
  op.kind = GateKind::MultiplexedRot;
  op.target = 0;
  op.controls = {0};
  op.angles = {0.0, 0.0};
  g.ops.push_back(op);
  EXPECT_THROW(evaluate(g), Error);
  g.ops[0].controls = {1};
  g.ops[0].angles = {0.0};
  EXPECT_THROW(evaluate(g), Error);
}

TEST(GateIr, JsonRoundTrip) {
  Rng rng(3);
  const GateIR g = qsd_synthesize(haar_unitary(8, rng));
  const GateIR h = gate_ir_from_json(to_json(g));
  ASSERT_EQ(h.ops.size(), g.ops.size());
  EXPECT_EQ(to_json(h), to_json(g));
  EXPECT_EQ((evaluate(h) - evaluate(g)).norm(), 0.0);
}

TEST(Qsd, OneQubitIsSingleGate) {
  Rng rng(4);
  const CMat u = haar_unitary(2, rng);
  const GateIR g = qsd_synthesize(u);
  ASSERT_EQ(g.ops.size(), 1u);
  EXPECT_EQ(g.ops[0].kind, GateKind::SingleQubitUnitary);
  EXPECT_EQ(evaluate(g), u);
}

TEST(Qsd, HaarReconstruction) {
  Rng rng(5);
  for (int n = 2; n <= 5; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const CMat u = haar_unitary(1 << n, rng);
      for (CsaAxis axis : {CsaAxis::Y, CsaAxis::X}) {
        const double res = (evaluate(qsd_synthesize(u, axis)) - u).norm();
        EXPECT_LE(res, 1e-9 * std::pow(2.0, n / 2.0)) << n;
      }
    }
  }
}

TEST(Qsd, GateInventory) {
  Rng rng(6);
  for (int n = 1; n <= 5; ++n) {
    const GateIR y = qsd_synthesize(haar_unitary(1 << n, rng), CsaAxis::Y);
    const GateIR x = qsd_synthesize(haar_unitary(1 << n, rng), CsaAxis::X);
    int blocks = 0;
    for (int k = 0; k < n - 1; ++k) blocks = 4 * blocks + 1;
    EXPECT_EQ(count_axis(y, 'Y'), blocks);
    EXPECT_EQ(count_axis(y, 'X'), 0);
    EXPECT_EQ(count_axis(x, 'X'), blocks);
    EXPECT_EQ(count_axis(x, 'Y'), 0);
    EXPECT_EQ(count_axis(y, 'Z'), 2 * blocks);
    EXPECT_EQ(y.count(GateKind::SingleQubitUnitary), 1 << (2 * (n - 1)));
    for (const GateOp& op : y.ops) {
      if (op.kind != GateKind::MultiplexedRot || op.axis != 'Y' || op.target != 0) continue;
      EXPECT_EQ(op.angles.size(), size_t{1} << (n - 1));
    }
  }
}

TEST(Qsd, StructuredInputs) {
  for (int n = 1; n <= 4; ++n) {
    const int d = 1 << n;
    const CMat id = CMat::Identity(d, d);
    EXPECT_LT((evaluate(qsd_synthesize(id)) - id).norm(), 1e-12);
    CMat perm = CMat::Zero(d, d);
    for (int i = 0; i < d; ++i) perm((i * 3 + 1) % d, i) = 1.0;
    if (d > 2) EXPECT_LT((evaluate(qsd_synthesize(perm)) - perm).norm(), 1e-10);
  }
}

TEST(Qsd, BadInputs) {
  EXPECT_THROW(qsd_synthesize(CMat::Identity(3, 3)), Error);
  EXPECT_THROW(qsd_synthesize(CMat::Identity(1, 1)), Error);
  try {
    qsd_synthesize(CMat::Identity(6, 6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadDim);
  }
  EXPECT_THROW(qsd_synthesize(CMat::Ones(4, 4)), Error);
}

TEST(Diagonal, RandomPhases) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int n = 1; n <= 5; ++n) {
    CVec d(1 << n);
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::polar(1.0, u(rng));
    const GateIR g = diagonal_to_gates(d, n);
    EXPECT_EQ(count_axis(g, 'Z'), n);
    EXPECT_EQ(g.count(GateKind::GlobalPhase), 1);
    EXPECT_LT((evaluate(g) - CMat(d.asDiagonal())).norm(), 1e-13);
  }
}

TEST(CsgGates, RejectsGenericUnitary) {
  Rng rng(8);
  GateIR g;
  EXPECT_FALSE(csg_to_gates(haar_unitary(8, rng), 3, g));
  // Real but coupling two qubits.
  CMat m = CMat::Identity(4, 4);
  m(0, 0) = m(3, 3) = 0.0;
  m(0, 3) = -1.0;
  m(3, 0) = 1.0;
  EXPECT_FALSE(csg_to_gates(m, 2, g));
}

TEST(OrthoSymp, IdentityIsTrivial) {
  for (OrthoSympFlavor f : {OrthoSympFlavor::Orthogonal, OrthoSympFlavor::Symplectic}) {
    const OrthoSympSynthesis s = ortho_symp_synthesize(CMat::Identity(4, 4), f);
    EXPECT_LT((evaluate(s) - CMat::Identity(4, 4)).norm(), 1e-12);
    for (const SynthStep& st : s.steps) {
      if (st.kind != SynthStep::Kind::Gates) continue;
      for (const GateOp& op : st.gates.ops) {
        for (double a : op.angles) EXPECT_NEAR(std::remainder(a, 2 * M_PI), 0.0, 1e-12);
      }
    }
  }
}

TEST(OrthoSymp, OrthogonalFlavor) {
  Rng rng(9);
  for (int n = 2; n <= 4; ++n) {
    const int d = 1 << n;
    const CMat u = haar_unitary(d, rng);
    const OrthoSympSynthesis s = ortho_symp_synthesize(u, OrthoSympFlavor::Orthogonal);
    EXPECT_LE((evaluate(s) - u).norm(), 1e-9 * std::sqrt(d));
    int root_steps = 0;
    for (const SynthStep& st : s.steps) {
      if (st.item.kind == FlatItem::Kind::Csg) {
        EXPECT_EQ(st.kind, SynthStep::Kind::Gates) << st.item.node->path;
      }
      if (st.item.node == s.tree.root.get()) {
        ++root_steps;
        // First step: diagonal phases only.
        EXPECT_EQ(count_axis(st.gates, 'Z'), n);
        EXPECT_EQ(count_axis(st.gates, 'Y'), 0);
      } else {
        const CMat m = materialize(st.item, d);
        EXPECT_LT(m.imag().norm(), 1e-11) << st.item.node->path;
      }
    }
    EXPECT_EQ(root_steps, 1);
  }
}

TEST(OrthoSymp, SymplecticFlavorDecouplesLastQubitFirst) {
  Rng rng(10);
  for (int n = 2; n <= 4; ++n) {
    const int d = 1 << n;
    const CMat u = haar_unitary(d, rng);
    const OrthoSympSynthesis s = ortho_symp_synthesize(u, OrthoSympFlavor::Symplectic);
    EXPECT_LE((evaluate(s) - u).norm(), 1e-9 * std::sqrt(d));
    bool seen = false;
    for (const SynthStep& st : s.steps) {
      if (st.item.kind == FlatItem::Kind::Csg) EXPECT_EQ(st.kind, SynthStep::Kind::Gates);
      if (st.item.node->path != "r/k1.0" || st.item.kind != FlatItem::Kind::Csg) continue;
      seen = true;
      ASSERT_EQ(st.gates.ops.size(), 1u);
      EXPECT_EQ(st.gates.ops[0].axis, 'Y');
      EXPECT_EQ(st.gates.ops[0].target, n - 1);
    }
    EXPECT_TRUE(seen);
  }
}

TEST(OrthoSymp, BadInputs) {
  EXPECT_THROW(ortho_symp_synthesize(CMat::Identity(2, 2), OrthoSympFlavor::Orthogonal), Error);
  EXPECT_THROW(ortho_symp_synthesize(CMat::Identity(6, 6), OrthoSympFlavor::Symplectic), Error);
}
