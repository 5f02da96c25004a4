// Command-line front end. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cartan/error.hpp"
#include "cartan/hamsim.hpp"
#include "cartan/involution.hpp"
#include "cartan/kak.hpp"
#include "cartan/recursion.hpp"
#include "cartan/synth.hpp"

using namespace cartan;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  double tol = 1e-10;
  uint64_t seed = 1;
  int threads = 1;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadParams, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadParams, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadParams, "cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Size parameter of a non-split type from the matrix side length.
int size_param(const InvolutionType& t, Eigen::Index rows) {
  const int m = static_cast<int>(rows);
  switch (t.tag) {
    case TypeTag::AI: return m;
    case TypeTag::A:
    case TypeTag::AII:
    case TypeTag::BD:
    case TypeTag::DIII:
    case TypeTag::CI: return m / 2;
    case TypeTag::C: return m / 4;
    default: return 0;
  }
}

// Side length of the group elements of a type with size parameter n.
int group_side(const InvolutionType& t, int n) {
  switch (t.tag) {
    case TypeTag::AI: return n;
    case TypeTag::A:
    case TypeTag::AII:
    case TypeTag::BD:
    case TypeTag::DIII:
    case TypeTag::CI: return 2 * n;
    case TypeTag::C: return 4 * n;
    case TypeTag::AIII:
    case TypeTag::BDI: return t.p + t.q;
    case TypeTag::CII: return 2 * (t.p + t.q);
    default: return 0;
  }
}

double reconstruction_tol(double tol, const CMat& g) {
  return tol * std::sqrt(static_cast<double>(g.rows())) * std::max(1.0, g.norm());
}

struct ModelArgs {
  int n = 0;
  std::vector<double> ax, ay, beta;
  std::string model_path;
};

void add_model_options(CLI::App* sub, ModelArgs& m) {
  sub->add_option("--n", m.n, "Number of qubits");
  sub->add_option("--alpha-x", m.ax, "XX couplings (n-1 values)")->delimiter(',');
  sub->add_option("--alpha-y", m.ay, "YY couplings (n-1 values)")->delimiter(',');
  sub->add_option("--beta", m.beta, "Z fields (n values)")->delimiter(',');
  sub->add_option("--model", m.model_path, "XY model JSON");
}

XYModel resolve_model(const ModelArgs& a, const Globals& g) {
  if (!a.model_path.empty()) return xy_model_from_json(read_json(a.model_path));
  const bool explicit_params = !a.ax.empty() || !a.ay.empty() || !a.beta.empty();
  if (explicit_params) {
    XYModel m;
    m.n = static_cast<int>(a.beta.size());
    if (a.n != 0 && a.n != m.n) throw UsageError("--n does not match the number of --beta values");
    m.alpha_x = a.ax;
    m.alpha_y = a.ay;
    m.beta = a.beta;
    m.validate();
    return m;
  }
  if (a.n < 1) throw UsageError("give --n (random model), explicit couplings, or --model");
  Rng rng(g.seed);
  return random_xy_model(a.n, rng);
}

CompileOptions compile_options(const Globals& g, bool verify) {
  CompileOptions opt;
  opt.recursion.tol = g.tol;
  opt.recursion.threads = g.threads;
  opt.verify = verify;
  return opt;
}

// ---- subcommands ----

struct KakArgs {
  std::string type, in, out;
  int n = 0;
  int random = 0;
};

int run_kak(const KakArgs& a, const Globals& g) {
  const InvolutionType type = parse_type(a.type);
  DenseMatrix G;
  int n = a.n;
  if (!a.in.empty()) {
    G = matrix_from_json(read_json(a.in));
    if (n == 0) n = size_param(type, G.rows());
  } else if (a.random > 0) {
    n = a.random;
    Rng rng(g.seed);
    G = random_group_element(type, n, rng);
  } else {
    throw UsageError("kak needs --in or --random");
  }
  KakOptions opt;
  opt.tol = g.tol;
  const KakFactors f = kak_decompose(G, type, opt);
  const CMat gc = G.to_complex();
  const double residual = (f.reconstruct() - gc).norm();
  json j = to_json(f);
  j["residual"] = residual;
  if (a.in.empty()) j["seed"] = g.seed;
  if (a.out.empty()) {
    write_json("", j);
  } else {
    write_json(a.out, j);
    std::cout << "residual " << fmt17(residual) << "\n";
  }
  return residual <= reconstruction_tol(g.tol, gc) ? 0 : 1;
}

int run_compose(const std::string& a, const std::string& b, const std::string& out) {
  const Involution t1 = involution_from_json(read_json(a));
  const Involution t2 = involution_from_json(read_json(b));
  Involution t3 = compose(t1, t2);
  t3.declared_type = classify(t3);
  json j = to_json(t3);
  j["classified"] = t3.declared_type.name();
  write_json(out, j);
  return 0;
}

int run_grading(const std::string& in, const std::string& out) {
  const json arr = read_json(in);
  if (!arr.is_array() || arr.empty()) throw Error(ErrorCode::BadParams, "grading input must be a non-empty array");
  std::vector<Involution> thetas;
  for (const json& t : arr) thetas.push_back(involution_from_json(t));
  const Grading gr = grading_from_involutions(thetas, algebra_basis(thetas[0].algebra));
  json dims = json::object();
  for (const auto& [key, basis] : gr.subspaces) dims[key] = basis.size();
  write_json(out, {{"c", gr.c},
                   {"algebra", thetas[0].algebra.name()},
                   {"dims", dims},
                   {"total_dim", gr.total_dim()},
                   {"residual", grading_residual(gr)}});
  return 0;
}

struct PlanArgs {
  std::string tmpl, family = "SO", in, out;
  int n = 0;
};

int run_plan(const PlanArgs& a, const Globals& g) {
  PlanRequest req;
  req.kind = parse_template(a.tmpl);
  req.n = a.n;
  if (a.family == "U") {
    req.family = Family::U;
  } else if (a.family == "SU") {
    req.family = Family::SU;
  } else if (a.family == "SO") {
    req.family = Family::SO;
  } else if (a.family == "SP") {
    req.family = Family::SP;
  } else {
    throw UsageError("--family must be U, SU, SO or SP");
  }
  const Plan plan = build_plan(req);
  const ParamCount pc = count_parameters(plan);
  json j = {{"plan", to_json(plan)},
            {"depth", plan.depth()},
            {"total_params", pc.total_params},
            {"overparam", pc.overparam}};
  int code = 0;
  if (!a.in.empty()) {
    const DenseMatrix G = matrix_from_json(read_json(a.in));
    RecursionOptions opt;
    opt.tol = g.tol;
    opt.threads = g.threads;
    const FactorTree tree = recursive_decompose(G, plan, opt);
    const CMat gc = G.to_complex();
    const double residual = (flatten_product(tree) - gc).norm();
    j["tree"] = to_json(tree);
    j["residual"] = residual;
    if (residual > reconstruction_tol(g.tol, gc)) code = 1;
  }
  write_json(a.out, j);
  return code;
}

struct CompileArgs {
  ModelArgs model;
  double t = 1.0;
  bool horizontal = false;
  bool verify = false;
  std::string out, report;
};

int run_compile(const CompileArgs& a, const Globals& g) {
  const XYModel m = resolve_model(a.model, g);
  const CompileOptions opt = compile_options(g, a.verify);
  json out;
  CompileReport rep;
  if (a.horizontal) {
    const HorizontalCircuit h = compile_horizontal(m, opt);
    json csa = json::array();
    for (size_t k = 0; k < h.csa_words.size(); ++k) {
      csa.push_back({{"pauli", h.csa_words[k].str()}, {"rate", h.csa_rates[k]}});
    }
    out = {{"n_qubits", m.n}, {"t", a.t}, {"k_circuit", to_json(h.k_circuit)}, {"csa", csa},
           {"circuit", to_json(h.at(a.t))}};
    rep = h.report;
  } else {
    const CompiledCircuit c = compile_evolution(m, a.t, opt);
    out = to_json(c.circuit);
    rep = c.report;
  }
  json r = to_json(rep);
  r["n"] = m.n;
  r["t"] = a.t;
  r["seed"] = g.seed;
  r["horizontal"] = a.horizontal;
  write_json(a.out, out);
  if (!a.out.empty() || !a.report.empty()) write_json(a.report, r);
  if (a.verify && rep.residual > 1e-8 * std::pow(2.0, m.n / 2.0)) return 1;
  return 0;
}

int run_diagonalize(const ModelArgs& ma, bool spectrum, const std::string& out, const Globals& g) {
  const XYModel m = resolve_model(ma, g);
  const Diagonalization d = diagonalize(m);
  json j = {{"n", m.n}, {"coeffs", d.coeffs}};
  if (spectrum) j["spectrum"] = expand_spectrum(d.coeffs);
  write_json(out, j);
  std::cerr << "wall_time_seconds " << fmt17(d.wall_time_seconds) << "\n";
  return 0;
}

struct SynthArgs {
  std::string in, method = "qsd", out;
  int random = 0;
};

int run_synth(const SynthArgs& a, const Globals& g) {
  CMat u;
  if (!a.in.empty()) {
    u = matrix_from_json(read_json(a.in)).to_complex();
  } else if (a.random > 0) {
    if (a.random > 10) throw UsageError("--random is limited to 10 qubits");
    Rng rng(g.seed);
    u = haar_unitary(1 << a.random, rng);
  } else {
    throw UsageError("synth needs --in or --random");
  }
  KakOptions kopt;
  kopt.tol = g.tol;
  json j;
  CMat rebuilt;
  if (a.method == "qsd" || a.method == "block-zxz") {
    const GateIR ir = qsd_synthesize(u, a.method == "qsd" ? CsaAxis::Y : CsaAxis::X, kopt);
    j = to_json(ir);
    if (ir.n_qubits <= 10) rebuilt = evaluate(ir);
  } else if (a.method == "orthogonal" || a.method == "symplectic") {
    RecursionOptions ropt;
    ropt.tol = g.tol;
    ropt.threads = g.threads;
    const OrthoSympSynthesis s = ortho_symp_synthesize(
        u, a.method == "orthogonal" ? OrthoSympFlavor::Orthogonal : OrthoSympFlavor::Symplectic, ropt);
    j = to_json(s);
    rebuilt = evaluate(s);
  } else {
    throw UsageError("--method must be qsd, block-zxz, orthogonal or symplectic");
  }
  write_json(a.out, j);
  if (rebuilt.size() == 0) return 0;
  const double residual = (rebuilt - u).norm();
  if (!a.out.empty()) std::cout << "residual " << fmt17(residual) << "\n";
  return residual <= reconstruction_tol(g.tol, u) ? 0 : 1;
}

// One timed workflow run; returns gate count (0 for first-step-only).
long long bench_once(const std::string& workflow, int n, double t, const Globals& g, double& seconds) {
  Rng rng(g.seed);
  const XYModel m = random_xy_model(n, rng);
  const CompileOptions opt = compile_options(g, false);
  if (workflow == "minimal") {
    const auto t0 = std::chrono::steady_clock::now();
    const CompiledCircuit c = compile_evolution(m, t, opt);
    seconds = seconds_since(t0);
    return c.report.gate_count;
  }
  if (workflow == "intermediate" || workflow == "complete") {
    const PauliSentence h = m.hamiltonian();
    AutoMapOptions aopt;
    aopt.compute_dla = workflow == "complete";
    const auto t0 = std::chrono::steady_clock::now();
    const AutoMapResult am = auto_map(h, aopt);
    const CompiledCircuit c = compile_rho_evolution(am.rho, am.pi, t, opt);
    seconds = seconds_since(t0);
    return c.report.gate_count;
  }
  if (workflow == "first-step-only") {
    const auto t0 = std::chrono::steady_clock::now();
    const HorizontalResult hr = horizontal_decompose(build_xy_matrix(m), n, n, g.tol);
    seconds = seconds_since(t0);
    (void)hr;
    return 0;
  }
  throw UsageError("unknown workflow: " + workflow);
}

struct BenchArgs {
  std::vector<std::string> workflows = {"minimal"};
  std::vector<int> ns = {50, 100, 200, 400, 1000};
  double t = 1.0;
  std::string out;
};

int run_bench(const BenchArgs& a, const Globals& g) {
  for (const std::string& w : a.workflows) {
    if (w != "minimal" && w != "intermediate" && w != "complete" && w != "first-step-only") {
      throw UsageError("unknown workflow: " + w);
    }
  }
  for (int n : a.ns) {
    if (n < 1) throw UsageError("--ns values must be positive");
  }
  std::ostringstream csv;
  csv << "n,workflow,wall_seconds,gate_count,seed\n";
  for (const std::string& w : a.workflows) {
    for (int n : a.ns) {
      double seconds = 0.0;
      const long long gates = bench_once(w, n, a.t, g, seconds);
      csv << n << "," << w << "," << fmt17(seconds) << "," << gates << "," << g.seed << "\n";
      std::cerr << w << " n=" << n << " " << fmt17(seconds) << " s\n";
    }
  }
  write_text(a.out, csv.str());
  return 0;
}

int run_verify(const std::string& in, const std::string& against, const Globals& g) {
  const json j = read_json(in);
  const CMat target = matrix_from_json(read_json(against)).to_complex();
  CMat got;
  std::string kind;
  if (j.contains("k1")) {
    kind = "kak";
    got = kak_factors_from_json(j).reconstruct();
  } else if (j.contains("ops")) {
    kind = "gates";
    got = evaluate(gate_ir_from_json(j));
  } else if (j.contains("gates")) {
    kind = "circuit";
    got = evaluate_circuit(circuit_from_json(j)).to_complex();
  } else {
    throw Error(ErrorCode::BadParams, "unrecognized input: expected KAK factors, a gate list or a circuit");
  }
  if (got.rows() != target.rows() || got.cols() != target.cols()) {
    throw Error(ErrorCode::DimMismatch, "result and reference differ in shape");
  }
  const double residual = (got - target).norm();
  const double tol = reconstruction_tol(g.tol, target);
  const bool passed = residual <= tol;
  write_json("", {{"kind", kind}, {"residual", residual}, {"tolerance", tol}, {"passed", passed}});
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  if (const char* env = std::getenv("CARTAN_KAK_TOL")) {
    try {
      g.tol = std::stod(env);
    } catch (const std::exception&) {
      std::cerr << "error: CARTAN_KAK_TOL is not a number\n";
      return 2;
    }
  }

  CLI::App app{"Cartan decompositions, recursive KAK plans and free-fermion circuit compilation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--tol", g.tol, "Numerical tolerance (default 1e-10 or CARTAN_KAK_TOL)");
  app.add_option("--seed", g.seed, "Seed for all randomness");
  app.add_option("--threads", g.threads, "Upper bound on concurrent subtrees")->check(CLI::PositiveNumber);

  KakArgs kak;
  auto* kak_cmd = app.add_subcommand("kak", "KAK decomposition of a group element");
  kak_cmd->add_option("--type", kak.type, "Involution type, e.g. AI or BDI(2,2)")->required();
  kak_cmd->add_option("--in", kak.in, "Matrix JSON");
  kak_cmd->add_option("--n", kak.n, "Size parameter (default: inferred)");
  kak_cmd->add_option("--random", kak.random, "Decompose a seeded random element with this size parameter");
  kak_cmd->add_option("--out", kak.out, "Output JSON (default stdout)");

  std::string comp_a, comp_b, comp_out;
  auto* comp_cmd = app.add_subcommand("compose", "Compose two commuting involutions");
  comp_cmd->add_option("--a", comp_a, "Involution JSON")->required();
  comp_cmd->add_option("--b", comp_b, "Involution JSON")->required();
  comp_cmd->add_option("--out", comp_out, "Output JSON (default stdout)");

  std::string gr_in, gr_out;
  auto* gr_cmd = app.add_subcommand("grading", "Grading from a set of commuting involutions");
  gr_cmd->add_option("--in", gr_in, "JSON array of involutions")->required();
  gr_cmd->add_option("--out", gr_out, "Output JSON (default stdout)");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Build a recursion plan and optionally execute it");
  plan_cmd->add_option("--template", plan.tmpl,
                       "param_optimal, canonical_bdi, qsd, block_zxz, completely_orthogonal, completely_symplectic")
      ->required();
  plan_cmd->add_option("--n", plan.n, "Template size parameter")->required();
  plan_cmd->add_option("--family", plan.family, "Group for param_optimal: U, SU, SO or SP");
  plan_cmd->add_option("--in", plan.in, "Matrix JSON to decompose");
  plan_cmd->add_option("--out", plan.out, "Output JSON (default stdout)");

  CompileArgs comp;
  auto* cx_cmd = app.add_subcommand("compile-xy", "Compile exp(-iHt) for the transverse-field XY model");
  add_model_options(cx_cmd, comp.model);
  cx_cmd->add_option("--t", comp.t, "Evolution time");
  cx_cmd->add_flag("--horizontal", comp.horizontal, "Emit the t-independent K circuit and CSA rates");
  cx_cmd->add_flag("--verify", comp.verify, "Dense check against exp(-iHt) (n <= 12)");
  cx_cmd->add_option("--out", comp.out, "Circuit JSON (default stdout)");
  cx_cmd->add_option("--report", comp.report, "Report JSON (default stdout when --out is set)");

  ModelArgs diag_model;
  bool diag_spectrum = false;
  std::string diag_out;
  auto* dx_cmd = app.add_subcommand("diagonalize-xy", "Single-particle energies of the XY model");
  add_model_options(dx_cmd, diag_model);
  dx_cmd->add_flag("--spectrum", diag_spectrum, "Also expand the full 2^n spectrum (n <= 20)");
  dx_cmd->add_option("--out", diag_out, "Output JSON (default stdout)");

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Synthesize a 2^N unitary");
  syn_cmd->add_option("--in", syn.in, "Matrix JSON");
  syn_cmd->add_option("--random", syn.random, "Synthesize a seeded Haar unitary on this many qubits");
  syn_cmd->add_option("--method", syn.method, "qsd, block-zxz, orthogonal or symplectic");
  syn_cmd->add_option("--out", syn.out, "Output JSON (default stdout)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Compile-time sweep as CSV");
  bench_cmd->add_option("--workflow", bench.workflows, "minimal, intermediate, complete, first-step-only")
      ->delimiter(',');
  bench_cmd->add_option("--ns", bench.ns, "Qubit counts")->delimiter(',');
  bench_cmd->add_option("--t", bench.t, "Evolution time");
  bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");

  std::string ver_in, ver_against;
  auto* ver_cmd = app.add_subcommand("verify", "Residual of factors, gates or a circuit against a matrix");
  ver_cmd->add_option("--in", ver_in, "KAK factors, gate list or circuit JSON")->required();
  ver_cmd->add_option("--against", ver_against, "Matrix JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*kak_cmd) return run_kak(kak, g);
    if (*comp_cmd) return run_compose(comp_a, comp_b, comp_out);
    if (*gr_cmd) return run_grading(gr_in, gr_out);
    if (*plan_cmd) return run_plan(plan, g);
    if (*cx_cmd) return run_compile(comp, g);
    if (*dx_cmd) return run_diagonalize(diag_model, diag_spectrum, diag_out, g);
    if (*syn_cmd) return run_synth(syn, g);
    if (*bench_cmd) return run_bench(bench, g);
    if (*ver_cmd) return run_verify(ver_in, ver_against, g);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
