#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "s2g/errors.hpp"

namespace s2g {

/// Highest slot index + 1 that trees may reference by default.
constexpr int kDefaultMaxSlots = 10;

/// Binary arithmetic operator node: one of + - * / ^.
struct OpNode {
  char symbol;
};

/// Literal constant node.
struct ConstNode {
  double value;
};

/// Placeholder for the i-th number occurring in the problem text.
/// Inside a formula body it refers to the i-th formula argument instead.
struct SlotNode {
  int index;
};

/// Call of a registered formula; children supply the arguments.
struct FormulaNode {
  int formula_id;
};

using NodeKind = std::variant<OpNode, ConstNode, SlotNode, FormulaNode>;

/// Expression tree over operators, constants, number slots and formula calls.
/// Nodes live in an arena; children are ordered arena indices.
struct OpTree {
  struct Node {
    NodeKind kind;
    std::vector<int> children;
  };

  std::vector<Node> nodes;
  int root = -1;

  int add(NodeKind kind, std::vector<int> children = {}) {
    nodes.push_back(Node{std::move(kind), std::move(children)});
    return static_cast<int>(nodes.size()) - 1;
  }
  bool empty() const { return nodes.empty(); }
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Named formula with fixed arity and a closed-form body.
/// The body is itself an OpTree whose SlotNode i denotes argument i.
struct FormulaDef {
  std::string name;
  int arity = 0;
  std::vector<std::string> arg_labels;
  OpTree body;
};

/// Ordered registry of formulas; ids are assigned in registration order.
class FormulaRegistry {
 public:
  int register_formula(FormulaDef def);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  int id_of(const std::string& name) const;
  const FormulaDef& at(int id) const { return defs_.at(static_cast<std::size_t>(id)); }
  const FormulaDef& at(const std::string& name) const { return at(id_of(name)); }
  int size() const { return static_cast<int>(defs_.size()); }

  auto begin() const { return defs_.begin(); }
  auto end() const { return defs_.end(); }

 private:
  std::vector<FormulaDef> defs_;
  std::unordered_map<std::string, int> index_;
};

bool is_operator_symbol(char c);
int precedence(char op);  // ^ highest, then * /, then + -

/// Canonical token spelling of a number: integral values print without a
/// decimal point, everything else uses the shortest round-trip form.
std::string format_number(double v);

/// True if the whole string parses as a plain numeric literal.
bool parse_number(const std::string& token, double* out);

/// Parse an infix equation over numbers, <Ni> slot tokens, + - * / ^,
/// parentheses and registered formula calls. Precedence ^ > {* /} > {+ -};
/// ^ associates right, the rest left.
OpTree parse_infix(const std::string& text, const FormulaRegistry& reg,
                   int max_slots = kDefaultMaxSlots);

/// Variant used for formula bodies: bare identifiers resolve through
/// `arg_labels` into argument slots.
OpTree parse_formula_body(const std::string& text, const FormulaRegistry& reg,
                          const std::vector<std::string>& arg_labels);

/// Pre-order serialization; one token per node.
std::vector<std::string> to_prefix(const OpTree& tree, const FormulaRegistry& reg);

/// Rebuild the unique tree encoded by a prefix token sequence.
OpTree from_prefix(const std::vector<std::string>& tokens, const FormulaRegistry& reg,
                   int max_slots = kDefaultMaxSlots);

/// Render a tree back to infix with minimal parentheses.
std::string to_infix(const OpTree& tree, const FormulaRegistry& reg);

/// Execute the tree. Formula calls evaluate their body with arguments bound
/// to the body's slots. Throws DivisionByZero / MissingSlot / NonFiniteResult.
double evaluate(const OpTree& tree, const std::map<int, double>& numbers,
                const FormulaRegistry& reg);

/// Substitute every formula call by its body until only operators,
/// constants and number slots remain. Evaluation is preserved.
OpTree expand_formulas(const OpTree& tree, const FormulaRegistry& reg);

/// Check the structural invariants (single root, arity-correct children,
/// acyclic, slot indices within range). Throws Error on violation.
void validate_tree(const OpTree& tree, const FormulaRegistry& reg,
                   int max_slots = kDefaultMaxSlots);

/// Structural equality from the roots down.
bool tree_equal(const OpTree& a, const OpTree& b);

/// The 11 built-in geometry formulas in registration order.
FormulaRegistry default_registry();

/// Load a registry from a JSON array of {"name","arity","args","body"}.
FormulaRegistry load_registry_json(const std::string& path);

/// Serialize a registry back to the JSON schema used by load_registry_json.
std::string registry_to_json(const FormulaRegistry& reg);

}  // namespace s2g
