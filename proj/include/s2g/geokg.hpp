#pragma once

#include <string>
#include <utility>
#include <vector>

#include "s2g/ndgrad.hpp"
#include "s2g/optree.hpp"

namespace s2g {

enum class KgNodeKind { Shape, Quantity, Null };

/// Geometry knowledge graph: shape nodes, their quantity nodes, and one
/// detached null node standing in wherever no physical meaning applies.
struct KGraph {
  struct Node {
    std::string name;
    KgNodeKind kind;
  };

  std::vector<Node> nodes;
  std::vector<std::pair<int, int>> edges;  // undirected, i < j, no self-edges

  int size() const { return static_cast<int>(nodes.size()); }
  int find(const std::string& name) const;
  int null_node() const;
  int degree(int node) const;
  Mat adjacency() const;  // symmetric 0/1, zero diagonal
};

/// Resolves (formula, argument position) to the KG node carrying that
/// argument's physical meaning.
class ArgBinding {
 public:
  void bind(const std::string& formula, int arg, int node);
  int node_for(const std::string& formula, int arg) const;

  /// Every (formula, index) pair in the registry must resolve.
  void check_total(const FormulaRegistry& reg) const;

  const std::vector<std::tuple<std::string, int, int>>& entries() const { return entries_; }

 private:
  std::vector<std::tuple<std::string, int, int>> entries_;
};

/// The built-in graph for the six supported shapes: per shape, the shape
/// node and its quantity nodes form a clique; quantity nodes carry
/// shape-qualified names such as circle.radius.
std::pair<KGraph, ArgBinding> build_default_kg(const FormulaRegistry& reg);

/// Symmetric normalization with self-loops: D^(-1/2) (A + I) D^(-1/2)
/// where D is the degree matrix of A + I.
Mat normalize_adjacency(const Mat& adjacency);

/// Feature table plus the two layer weights of the graph encoder.
struct GcnParams {
  ParamStore::Entry* features;  // num_nodes x d
  ParamStore::Entry* w0;        // d x d
  ParamStore::Entry* w1;        // d x d
};

/// Two-layer graph convolution: Z = Â relu(Â X W0) W1, differentiable in
/// X, W0 and W1.
Var gcn_embed(Tape& tape, const GcnParams& params, const Mat& norm_adjacency);

/// Node whose embedding guides the generation of a child: the bound
/// argument node under a formula parent, the null node everywhere else
/// (operator children and the root).
int z_node_for_child(const KGraph& kg, const ArgBinding& binding, const FormulaRegistry& reg,
                     const NodeKind& parent_kind, int child_index);
int z_node_for_root(const KGraph& kg);

// JSON dump/load so larger graphs can be swapped in without code changes.
std::string kg_to_json(const KGraph& kg, const ArgBinding& binding);
std::pair<KGraph, ArgBinding> kg_from_json(const std::string& json_text);
std::pair<KGraph, ArgBinding> load_kg_file(const std::string& path);

}  // namespace s2g
