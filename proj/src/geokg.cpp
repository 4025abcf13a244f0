#include "s2g/geokg.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace s2g {

int KGraph::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (nodes[static_cast<std::size_t>(i)].name == name) return i;
  }
  throw Error("no KG node named " + name);
}

int KGraph::null_node() const {
  for (int i = 0; i < size(); ++i) {
    if (nodes[static_cast<std::size_t>(i)].kind == KgNodeKind::Null) return i;
  }
  throw Error("KG has no null node");
}

int KGraph::degree(int node) const {
  int d = 0;
  for (const auto& [a, b] : edges) d += (a == node) + (b == node);
  return d;
}

Mat KGraph::adjacency() const {
  Mat a = Mat::Zero(size(), size());
  for (const auto& [i, j] : edges) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

void ArgBinding::bind(const std::string& formula, int arg, int node) {
  entries_.emplace_back(formula, arg, node);
}

int ArgBinding::node_for(const std::string& formula, int arg) const {
  for (const auto& [f, a, n] : entries_) {
    if (f == formula && a == arg) return n;
  }
  throw Error("no KG binding for " + formula + " argument " + std::to_string(arg));
}

void ArgBinding::check_total(const FormulaRegistry& reg) const {
  for (const auto& def : reg) {
    for (int a = 0; a < def.arity; ++a) node_for(def.name, a);
  }
}

std::pair<KGraph, ArgBinding> build_default_kg(const FormulaRegistry& reg) {
  // shape owning each built-in formula
  static const std::map<std::string, std::string> kShapeOf = {
      {"square_area", "square"},         {"square_perimeter", "square"},
      {"cubic_volume", "cubic"},         {"circle_area", "circle"},
      {"circumference_r", "circle"},     {"circumference_d", "circle"},
      {"triangle_area", "triangle"},     {"rectangle_area", "rectangle"},
      {"rectangle_perimeter", "rectangle"}, {"cuboid_volume", "cuboid"},
      {"cuboid_surface", "cuboid"}};
  static const std::vector<std::string> kShapes = {"square", "cubic",     "circle",
                                                   "triangle", "rectangle", "cuboid"};

  KGraph kg;
  ArgBinding binding;
  for (const auto& shape : kShapes) {
    int shape_node = kg.size();
    kg.nodes.push_back({shape, KgNodeKind::Shape});
    std::vector<int> members{shape_node};
    for (const auto& def : reg) {
      auto it = kShapeOf.find(def.name);
      if (it == kShapeOf.end()) {
        throw Error("formula " + def.name + " belongs to no built-in shape; load a KG file");
      }
      if (it->second != shape) continue;
      for (int a = 0; a < def.arity; ++a) {
        std::string qname = shape + "." + def.arg_labels[static_cast<std::size_t>(a)];
        int node;
        try {
          node = kg.find(qname);
        } catch (const Error&) {
          node = kg.size();
          kg.nodes.push_back({qname, KgNodeKind::Quantity});
          members.push_back(node);
        }
        binding.bind(def.name, a, node);
      }
    }
    // same-shape nodes link to each other
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        kg.edges.emplace_back(members[i], members[j]);
      }
    }
  }
  kg.nodes.push_back({"null", KgNodeKind::Null});
  binding.check_total(reg);
  return {std::move(kg), std::move(binding)};
}

Mat normalize_adjacency(const Mat& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw ShapeMismatch("adjacency must be square");
  Eigen::Index n = adjacency.rows();
  Mat with_loops = adjacency + Mat::Identity(n, n);
  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_sqrt_deg(i) = 1.0 / std::sqrt(with_loops.row(i).sum());
  }
  return inv_sqrt_deg.asDiagonal() * with_loops * inv_sqrt_deg.asDiagonal();
}

Var gcn_embed(Tape& tape, const GcnParams& params, const Mat& norm_adjacency) {
  Var a_hat = tape.constant(norm_adjacency);
  Var x = tape.param(*params.features);
  Var h = tape.relu(tape.matmul(a_hat, tape.matmul(x, tape.param(*params.w0))));
  return tape.matmul(tape.matmul(a_hat, h), tape.param(*params.w1));
}

int z_node_for_child(const KGraph& kg, const ArgBinding& binding, const FormulaRegistry& reg,
                     const NodeKind& parent_kind, int child_index) {
  if (const auto* f = std::get_if<FormulaNode>(&parent_kind)) {
    return binding.node_for(reg.at(f->formula_id).name, child_index);
  }
  return kg.null_node();
}

int z_node_for_root(const KGraph& kg) { return kg.null_node(); }

// ---------------------------------------------------------------------------
// JSON

std::string kg_to_json(const KGraph& kg, const ArgBinding& binding) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& node : kg.nodes) {
    const char* kind = node.kind == KgNodeKind::Shape      ? "shape"
                       : node.kind == KgNodeKind::Quantity ? "quantity"
                                                           : "null";
    doc["nodes"].push_back({{"name", node.name}, {"kind", kind}});
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& [i, j] : kg.edges) doc["edges"].push_back({i, j});
  doc["bindings"] = nlohmann::json::array();
  for (const auto& [formula, arg, node] : binding.entries()) {
    doc["bindings"].push_back(
        {{"formula", formula}, {"arg", arg}, {"node", kg.nodes[static_cast<std::size_t>(node)].name}});
  }
  return doc.dump(2);
}

std::pair<KGraph, ArgBinding> kg_from_json(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text);
  KGraph kg;
  int nulls = 0;
  for (const auto& n : doc.at("nodes")) {
    std::string kind = n.at("kind").get<std::string>();
    KgNodeKind k;
    if (kind == "shape") {
      k = KgNodeKind::Shape;
    } else if (kind == "quantity") {
      k = KgNodeKind::Quantity;
    } else if (kind == "null") {
      k = KgNodeKind::Null;
      ++nulls;
    } else {
      throw Error("bad KG node kind: " + kind);
    }
    kg.nodes.push_back({n.at("name").get<std::string>(), k});
  }
  if (nulls != 1) throw Error("KG must contain exactly one null node");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : doc.at("edges")) {
    int i = e.at(0).get<int>();
    int j = e.at(1).get<int>();
    if (i == j) throw Error("KG self-edges are not allowed");
    if (i < 0 || j < 0 || i >= kg.size() || j >= kg.size()) throw Error("KG edge out of range");
    auto key = std::minmax(i, j);
    if (seen.insert(key).second) kg.edges.emplace_back(key.first, key.second);
  }
  ArgBinding binding;
  for (const auto& b : doc.at("bindings")) {
    binding.bind(b.at("formula").get<std::string>(), b.at("arg").get<int>(),
                 kg.find(b.at("node").get<std::string>()));
  }
  return {std::move(kg), std::move(binding)};
}

std::pair<KGraph, ArgBinding> load_kg_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return kg_from_json(text);
}

}  // namespace s2g
