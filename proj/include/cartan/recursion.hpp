#pragma once

// Recursive KAK decompositions: plans (trees of involution types acting on
// the K blocks of their parent), their execution into factor trees, and
// flattening of a tree into an ordered factor list.

#include <memory>
#include <string>
#include <vector>

#include "cartan/densela.hpp"
#include "cartan/involution.hpp"
#include "cartan/kak.hpp"

namespace cartan {

struct PlanNode {
  // Group the node acts on (a doubled algebra for A, BD and C nodes).
  AlgebraId algebra;
  // Trivial for leaves.
  InvolutionType type;
  // Size parameter for canonical_involution (0 for split types and leaves).
  int n_param = 0;
  // B with theta = Ad_B o theta_canonical o Ad_B^dag; empty when absent.
  DenseMatrix basis_change;
  // Offsets of the block inside the enclosing matrix of the same
  // representation: the involution reads Ad_{I_c (+) I_{p,q} (+) I_d}.
  int pad_c = 0;
  int pad_d = 0;
  // One child per K block, or a single doubled child taking the whole K.
  std::vector<PlanNode> children;

  bool is_leaf() const { return type.tag == TypeTag::Trivial; }
  int size() const { return algebra.size(); }
};

struct Plan {
  std::string template_name;
  // Template parameter (matrix size, qubit count, or group size).
  int param = 0;
  // "Y" for QSD-style AIII steps, "X" for Block-ZXZ; empty otherwise.
  std::string csa_axis;
  PlanNode root;

  int depth() const;
};

enum class PlanTemplate { ParamOptimal, CanonicalBdi, Qsd, BlockZxz, CompletelyOrthogonal, CompletelySymplectic };

struct PlanRequest {
  PlanTemplate kind = PlanTemplate::CanonicalBdi;
  // Group for ParamOptimal: U, SO or SP (SU is treated as U).
  Family family = Family::SO;
  // Matrix size for CanonicalBdi and ParamOptimal(U/SO), n of Sp(n) for
  // ParamOptimal(SP), qubit count N for the remaining templates.
  int n = 0;
};

Plan build_plan(const PlanRequest& req);
// "param_optimal", "canonical_bdi", "qsd", "block_zxz",
// "completely_orthogonal", "completely_symplectic".
PlanTemplate parse_template(const std::string& s);
const char* template_name(PlanTemplate t);

struct ParamCount {
  long long total_params = 0;
  long long overparam = 0;
};

ParamCount count_parameters(const Plan& plan);

// Maps a node-local matrix into the parent's canonical frame.
struct EmbedStep {
  enum class Kind { Identity, Block, Indices, Pair, Realify };
  Kind kind = Kind::Identity;
  int offset = 0;
  int parent_size = 0;
  std::vector<int> idx;
};

CMat apply_embed(const EmbedStep& e, const CMat& m);

struct FactorNode {
  InvolutionType type;
  int size = 0;
  int n_param = 0;
  // Leaves: the block itself.
  DenseMatrix leaf;
  // Internal nodes: the CSG element (canonical frame) and, when kept, the
  // full K factors.
  CsgElement a;
  std::unique_ptr<KakFactors> factors;
  std::shared_ptr<const DenseMatrix> basis_change;
  EmbedStep embed;
  std::vector<FactorNode> k1_children;
  std::vector<FactorNode> k2_children;
  const FactorNode* parent = nullptr;
  // Path from the root, e.g. "r/k1.0/k2.1".
  std::string path;

  bool is_leaf() const { return type.tag == TypeTag::Trivial; }
};

// Move-only: flattened items refer to nodes by address.
struct FactorTree {
  Plan plan;
  std::unique_ptr<FactorNode> root;
  int root_size = 0;
};

struct RecursionOptions {
  double tol = 1e-10;
  // Upper bound on concurrently decomposed sibling subtrees.
  int threads = 1;
  // Keep K1, K2 and Delta of internal nodes (memory heavy at large sizes).
  bool keep_factors = false;
};

FactorTree recursive_decompose(const DenseMatrix& G, const Plan& plan, const RecursionOptions& opt = {});

// Executes the plan with prescribed root factors. With mirror_k2 the K2
// subtree is the transpose of the K1 subtree (requires k2 = k1^T, real).
FactorTree recursive_decompose_from(const KakFactors& root, const Plan& plan, bool mirror_k2,
                                    const RecursionOptions& opt = {});

struct FlatItem {
  enum class Kind { Matrix, Csg, Givens };
  Kind kind = Kind::Matrix;
  const FactorNode* node = nullptr;
  // Matrix: a leaf block (node frame). Csg: the node's CSG element
  // (canonical frame). Givens: exp(eta (E_{mu,nu} - E_{nu,mu})) in the
  // canonical frame of `node`, or a 2x2 leaf read as a rotation.
  int mu = 0;
  int nu = 0;
  double eta = 0.0;
};

// Left-to-right factor list whose product is the input. With split_csg, real
// CSG elements and SO(2) leaves become individual Givens rotations.
std::vector<FlatItem> flatten(const FactorTree& t, bool split_csg = false);

// Dense root-size matrix of an item.
CMat materialize(const FlatItem& item, int root_size);
// Root indices of a Givens item when every enclosing embedding is an index
// placement without basis change.
bool root_plane(const FlatItem& item, int& mu, int& nu);
// Ordered product of all items (dense check).
CMat flatten_product(const FactorTree& t);

nlohmann::json to_json(const Plan& p);
Plan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FactorTree& t);

}  // namespace cartan
