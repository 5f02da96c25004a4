#include "cartan/synth.hpp"

#include <cmath>

#include "cartan/error.hpp"
#include "cartan/kak.hpp"

namespace cartan {

namespace {

const cplx kI(0.0, 1.0);

int log2_size(Eigen::Index m) {
  int k = 0;
  while ((Eigen::Index{1} << k) < m) ++k;
  if (m < 2 || (Eigen::Index{1} << k) != m) throw Error(ErrorCode::BadDim, "matrix size is not a power of two");
  return k;
}

Eigen::Matrix2cd rotation(char axis, double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  Eigen::Matrix2cd r;
  switch (axis) {
    case 'X': r << c, -kI * s, -kI * s, c; break;
    case 'Y': r << c, -s, s, c; break;
    default: r << std::exp(-kI * (theta / 2)), 0.0, 0.0, std::exp(kI * (theta / 2)); break;
  }
  return r;
}

GateOp mux(char axis, int target, std::vector<int> controls, std::vector<double> angles) {
  GateOp op;
  op.kind = GateKind::MultiplexedRot;
  op.axis = axis;
  op.target = target;
  op.controls = std::move(controls);
  op.angles = std::move(angles);
  return op;
}

std::vector<int> range(int begin, int end) {
  std::vector<int> r;
  for (int i = begin; i < end; ++i) r.push_back(i);
  return r;
}

// Left-multiplies u by a 2x2 matrix on `target`, chosen per row pair.
template <typename Pick>
void apply_pairs(CMat& u, int n, int target, Pick pick) {
  const Eigen::Index bit = Eigen::Index{1} << (n - 1 - target);
  const Eigen::Index dim = u.rows();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & bit) continue;
    const Eigen::Matrix2cd g = pick(i);
    const Eigen::Index j = i | bit;
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      const cplx a = u(i, c);
      const cplx b = u(j, c);
      u(i, c) = g(0, 0) * a + g(0, 1) * b;
      u(j, c) = g(1, 0) * a + g(1, 1) * b;
    }
  }
}

int control_index(Eigen::Index i, int n, const std::vector<int>& controls) {
  int j = 0;
  for (int q : controls) j = (j << 1) | static_cast<int>((i >> (n - 1 - q)) & 1);
  return j;
}

void check_op(const GateOp& op, int n) {
  if (op.kind == GateKind::GlobalPhase) return;
  if (op.target < 0 || op.target >= n) throw Error(ErrorCode::BadParams, "gate target out of range");
  if (op.kind == GateKind::SingleQubitUnitary) {
    if (op.u.rows() != 2 || op.u.cols() != 2) throw Error(ErrorCode::BadDim, "single-qubit gate must be 2x2");
    return;
  }
  for (int q : op.controls) {
    if (q < 0 || q >= n || q == op.target) throw Error(ErrorCode::BadParams, "bad control qubit");
  }
  if (op.angles.size() != (size_t{1} << op.controls.size())) {
    throw Error(ErrorCode::BadParams, "multiplexed rotation needs 2^controls angles");
  }
  if (op.axis != 'X' && op.axis != 'Y' && op.axis != 'Z') throw Error(ErrorCode::BadParams, "axis must be X, Y or Z");
}

// A0 (+) A1 = (V (+) V)(D (+) D^dag)(W (+) W) by the type A decomposition.
struct Demux {
  CMat v, w;
  std::vector<double> z_angles;
};

Demux demultiplex(const CMat& a0, const CMat& a1, const KakOptions& opt) {
  const Eigen::Index h = a0.rows();
  CMat g = CMat::Zero(2 * h, 2 * h);
  g.topLeftCorner(h, h) = a0;
  g.bottomRightCorner(h, h) = a1;
  InvolutionType type;
  type.tag = TypeTag::A;
  const KakFactors f = kak_decompose(DenseMatrix(g), type, opt);
  const CMat k1 = f.k1.to_complex();
  const CMat k2 = f.k2.to_complex();
  const CMat mid = f.middle();
  Demux d;
  d.v = f.global_phase * k1.topLeftCorner(h, h);
  d.w = k2.topLeftCorner(h, h);
  d.z_angles.resize(static_cast<size_t>(h));
  // diag(d0, d1) = e^{i g} Rz(arg d1 - arg d0); e^{i g} is folded into V.
  for (Eigen::Index j = 0; j < h; ++j) {
    const double p0 = std::arg(mid(j, j));
    const double p1 = std::arg(mid(h + j, h + j));
    d.z_angles[static_cast<size_t>(j)] = p1 - p0;
    d.v.col(j) *= std::exp(kI * (0.5 * (p0 + p1)));
  }
  return d;
}

void qsd_rec(const CMat& u, int first, int n, CsaAxis axis, const KakOptions& opt, GateIR& out) {
  const int k = n - first;
  if (k == 1) {
    GateOp op;
    op.kind = GateKind::SingleQubitUnitary;
    op.target = first;
    op.u = u;
    out.ops.push_back(std::move(op));
    return;
  }
  const int h = static_cast<int>(u.rows() / 2);
  ComplexCsd c = csd(u, h, h);
  // Per control value j the CS block is [[cos a, sin a], [-sin a, cos a]] = Ry(-2a).
  std::vector<double> angles;
  for (double a : c.F.angles) angles.push_back(-2.0 * a);
  if (axis == CsaAxis::X) {
    // Ry(t) = S Rx(t) S^dag with S = diag(1, i) on the target.
    c.L1 *= kI;
    c.R1 *= -kI;
  }
  const std::vector<int> controls = range(first + 1, n);
  const Demux r = demultiplex(c.R0, c.R1, opt);
  qsd_rec(r.w, first + 1, n, axis, opt, out);
  out.ops.push_back(mux('Z', first, controls, r.z_angles));
  qsd_rec(r.v, first + 1, n, axis, opt, out);
  out.ops.push_back(mux(axis == CsaAxis::Y ? 'Y' : 'X', first, controls, std::move(angles)));
  const Demux l = demultiplex(c.L0, c.L1, opt);
  qsd_rec(l.w, first + 1, n, axis, opt, out);
  out.ops.push_back(mux('Z', first, controls, l.z_angles));
  qsd_rec(l.v, first + 1, n, axis, opt, out);
}

}  // namespace

int GateIR::count(GateKind k) const {
  int c = 0;
  for (const GateOp& op : ops) c += op.kind == k;
  return c;
}

void GateIR::append(const GateIR& other) {
  if (other.n_qubits != n_qubits) throw Error(ErrorCode::DimMismatch, "gate lists on different registers");
  ops.insert(ops.end(), other.ops.begin(), other.ops.end());
}

nlohmann::json to_json(const GateIR& g) {
  nlohmann::json ops = nlohmann::json::array();
  for (const GateOp& op : g.ops) {
    nlohmann::json o;
    switch (op.kind) {
      case GateKind::MultiplexedRot:
        o["kind"] = "mux_rot";
        o["axis"] = std::string(1, op.axis);
        o["target"] = op.target;
        o["controls"] = op.controls;
        o["angles"] = op.angles;
        break;
      case GateKind::SingleQubitUnitary:
        o["kind"] = "unitary";
        o["target"] = op.target;
        o["matrix"] = to_json(DenseMatrix(op.u));
        break;
      case GateKind::GlobalPhase:
        o["kind"] = "global_phase";
        o["phase"] = op.phase;
        break;
    }
    ops.push_back(std::move(o));
  }
  return {{"n_qubits", g.n_qubits}, {"ops", ops}};
}

GateIR gate_ir_from_json(const nlohmann::json& j) {
  try {
    GateIR g;
    g.n_qubits = j.at("n_qubits").get<int>();
    for (const auto& o : j.at("ops")) {
      GateOp op;
      const std::string kind = o.at("kind").get<std::string>();
      if (kind == "mux_rot") {
        op.kind = GateKind::MultiplexedRot;
        const std::string axis = o.at("axis").get<std::string>();
        if (axis.size() != 1) throw Error(ErrorCode::BadParams, "bad axis: " + axis);
        op.axis = axis[0];
        op.target = o.at("target").get<int>();
        op.controls = o.at("controls").get<std::vector<int>>();
        op.angles = o.at("angles").get<std::vector<double>>();
      } else if (kind == "unitary") {
        op.kind = GateKind::SingleQubitUnitary;
        op.target = o.at("target").get<int>();
        op.u = matrix_from_json(o.at("matrix")).to_complex();
      } else if (kind == "global_phase") {
        op.kind = GateKind::GlobalPhase;
        op.phase = o.at("phase").get<double>();
      } else {
        throw Error(ErrorCode::BadParams, "unknown gate kind: " + kind);
      }
      check_op(op, g.n_qubits);
      g.ops.push_back(std::move(op));
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadParams, std::string("gate list JSON: ") + e.what());
  }
}

CMat evaluate(const GateIR& g) {
  const int n = g.n_qubits;
  if (n < 1) throw Error(ErrorCode::BadParams, "gate list needs at least one qubit");
  if (n > 10) throw Error(ErrorCode::TooLarge, "dense evaluation limited to 10 qubits");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMat u = CMat::Identity(dim, dim);
  for (const GateOp& op : g.ops) {
    check_op(op, n);
    switch (op.kind) {
      case GateKind::GlobalPhase: u *= std::exp(kI * op.phase); break;
      case GateKind::SingleQubitUnitary: {
        const Eigen::Matrix2cd m = op.u;
        apply_pairs(u, n, op.target, [&](Eigen::Index) { return m; });
        break;
      }
      case GateKind::MultiplexedRot: {
        std::vector<Eigen::Matrix2cd> rots;
        for (double a : op.angles) rots.push_back(rotation(op.axis, a));
        apply_pairs(u, n, op.target, [&](Eigen::Index i) { return rots[control_index(i, n, op.controls)]; });
        break;
      }
    }
  }
  return u;
}

GateIR qsd_synthesize(const CMat& u, CsaAxis axis, const KakOptions& opt) {
  if (u.rows() != u.cols()) throw Error(ErrorCode::BadDim, "unitary must be square");
  const int n = log2_size(u.rows());
  if (!is_unitary(DenseMatrix(u), std::max(opt.tol, 1e-10))) throw Error(ErrorCode::NotInGroup, "input is not unitary");
  GateIR out;
  out.n_qubits = n;
  qsd_rec(u, 0, n, axis, opt, out);
  return out;
}

GateIR diagonal_to_gates(const CVec& diag, int n_qubits) {
  if (diag.size() != (Eigen::Index{1} << n_qubits)) throw Error(ErrorCode::BadDim, "diagonal size must be 2^n");
  std::vector<double> phi(static_cast<size_t>(diag.size()));
  for (Eigen::Index i = 0; i < diag.size(); ++i) phi[static_cast<size_t>(i)] = std::arg(diag(i));
  GateIR out;
  out.n_qubits = n_qubits;
  // Peel the least significant qubit: (p0, p1) = mean + Rz(p1 - p0).
  for (int t = n_qubits - 1; t >= 0; --t) {
    std::vector<double> angles(phi.size() / 2);
    std::vector<double> mean(phi.size() / 2);
    for (size_t k = 0; k < angles.size(); ++k) {
      angles[k] = phi[2 * k + 1] - phi[2 * k];
      mean[k] = 0.5 * (phi[2 * k] + phi[2 * k + 1]);
    }
    out.ops.push_back(mux('Z', t, range(0, t), std::move(angles)));
    phi = std::move(mean);
  }
  GateOp g;
  g.kind = GateKind::GlobalPhase;
  g.phase = phi[0];
  out.ops.push_back(std::move(g));
  return out;
}

bool csg_to_gates(const CMat& m, int n_qubits, GateIR& out, double tol) {
  const Eigen::Index dim = m.rows();
  out = GateIR{};
  out.n_qubits = n_qubits;
  if (dim != (Eigen::Index{1} << n_qubits) || m.cols() != dim) return false;
  const double off_diag = (m - CMat(m.diagonal().asDiagonal())).norm();
  if (off_diag <= tol) {
    out = diagonal_to_gates(m.diagonal(), n_qubits);
    return true;
  }
  if (m.imag().norm() > tol) return false;
  for (int t = 0; t < n_qubits; ++t) {
    const Eigen::Index bit = Eigen::Index{1} << (n_qubits - 1 - t);
    double outside = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (i != j && (i ^ j) != bit) outside += std::norm(m(i, j));
      }
    }
    if (std::sqrt(outside) > tol) continue;
    const std::vector<int> controls = [&] {
      std::vector<int> c;
      for (int q = 0; q < n_qubits; ++q) {
        if (q != t) c.push_back(q);
      }
      return c;
    }();
    std::vector<double> angles(static_cast<size_t>(dim / 2));
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const Eigen::Index j = i | bit;
      const double c = m(i, i).real();
      const double s = m(j, i).real();
      // Must be [[c, -s], [s, c]].
      if (std::abs(m(j, j).real() - c) > tol || std::abs(m(i, j).real() + s) > tol) return false;
      angles[static_cast<size_t>(control_index(i, n_qubits, controls))] = 2.0 * std::atan2(s, c);
    }
    out.ops.push_back(mux('Y', t, controls, std::move(angles)));
    return true;
  }
  return false;
}

OrthoSympSynthesis ortho_symp_synthesize(const CMat& u, OrthoSympFlavor flavor, const RecursionOptions& opt) {
  if (u.rows() != u.cols()) throw Error(ErrorCode::BadDim, "unitary must be square");
  const int n = log2_size(u.rows());
  if (n < 2) throw Error(ErrorCode::BadDim, "orthogonal/symplectic synthesis needs at least two qubits");
  PlanRequest req;
  req.kind = flavor == OrthoSympFlavor::Orthogonal ? PlanTemplate::CompletelyOrthogonal
                                                    : PlanTemplate::CompletelySymplectic;
  req.n = n;
  OrthoSympSynthesis out;
  out.tree = recursive_decompose(DenseMatrix(u), build_plan(req), opt);
  const std::vector<FlatItem> items = flatten(out.tree);
  const int size = static_cast<int>(u.rows());
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    SynthStep step;
    step.item = *it;
    if (it->kind == FlatItem::Kind::Csg && csg_to_gates(materialize(*it, size), n, step.gates)) {
      step.kind = SynthStep::Kind::Gates;
    } else {
      step.kind = SynthStep::Kind::Factor;
      step.gates = GateIR{};
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

CMat evaluate(const OrthoSympSynthesis& s) {
  const int size = s.tree.root_size;
  CMat u = CMat::Identity(size, size);
  for (const SynthStep& step : s.steps) {
    if (step.kind == SynthStep::Kind::Gates) {
      u = evaluate(step.gates) * u;
    } else {
      u = materialize(step.item, size) * u;
    }
  }
  return u;
}

nlohmann::json to_json(const OrthoSympSynthesis& s) {
  nlohmann::json steps = nlohmann::json::array();
  for (const SynthStep& step : s.steps) {
    if (step.kind == SynthStep::Kind::Gates) {
      steps.push_back({{"kind", "gates"}, {"node", step.item.node->path}, {"gates", to_json(step.gates)}});
    } else {
      steps.push_back({{"kind", step.item.kind == FlatItem::Kind::Csg ? "csg" : "leaf"},
                       {"node", step.item.node->path}});
    }
  }
  return {{"tree", to_json(s.tree)}, {"steps", steps}};
}

}  // namespace cartan
