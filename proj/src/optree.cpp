#include "s2g/optree.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace s2g {

bool is_operator_symbol(char c) {
  return c == '+' || c == '-' || c == '*' || c == '/' || c == '^';
}

int precedence(char op) {
  switch (op) {
    case '^': return 3;
    case '*':
    case '/': return 2;
    default: return 1;  // + -
  }
}

static bool right_associative(char op) { return op == '^'; }

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_number(const std::string& token, double* out) {
  if (token.empty()) return false;
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + token.size()) return false;
  *out = v;
  return true;
}

// ---------------------------------------------------------------------------
// registry

int FormulaRegistry::register_formula(FormulaDef def) {
  if (index_.count(def.name)) throw DuplicateName(def.name);
  if (def.arity < 1) throw ArityLabelMismatch("formula " + def.name + ": arity must be positive");
  if (static_cast<int>(def.arg_labels.size()) != def.arity) {
    throw ArityLabelMismatch("formula " + def.name + ": " +
                             std::to_string(def.arg_labels.size()) + " labels for arity " +
                             std::to_string(def.arity));
  }
  std::set<std::string> labels(def.arg_labels.begin(), def.arg_labels.end());
  if (static_cast<int>(labels.size()) != def.arity) {
    throw ArityLabelMismatch("formula " + def.name + ": duplicate argument labels");
  }
  // the body must mention every argument and nothing beyond them
  std::set<int> used;
  for (const auto& node : def.body.nodes) {
    if (const auto* slot = std::get_if<SlotNode>(&node.kind)) used.insert(slot->index);
  }
  for (int i = 0; i < def.arity; ++i) {
    if (!used.count(i)) {
      throw ArityLabelMismatch("formula " + def.name + ": body never uses argument " +
                               def.arg_labels[static_cast<std::size_t>(i)]);
    }
  }
  if (!used.empty() && (*used.begin() < 0 || *used.rbegin() >= def.arity)) {
    throw ArityLabelMismatch("formula " + def.name + ": body references an argument out of range");
  }
  int id = static_cast<int>(defs_.size());
  index_.emplace(def.name, id);
  defs_.push_back(std::move(def));
  return id;
}

int FormulaRegistry::id_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UnknownFormula(name);
  return it->second;
}

// ---------------------------------------------------------------------------
// infix parsing (shunting-yard with formula-call support)

namespace {

enum class TokKind { Number, Slot, Ident, Op, LParen, RParen, Comma, End };

struct Tok {
  TokKind kind;
  double number = 0;
  int slot = -1;
  std::string ident;
  char op = 0;
  std::size_t pos = 0;
};

std::vector<Tok> lex_infix(const std::string& text, int max_slots) {
  std::vector<Tok> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i < n && text[i] == '.') {
        ++i;
        if (i >= n || !std::isdigit(static_cast<unsigned char>(text[i]))) {
          throw SyntaxError("digit expected after decimal point", i);
        }
        while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      }
      Tok t{TokKind::Number};
      t.pos = start;
      t.number = std::strtod(text.substr(start, i - start).c_str(), nullptr);
      out.push_back(t);
    } else if (c == '<') {
      ++i;
      if (i >= n || text[i] != 'N') throw SyntaxError("malformed slot token", start);
      ++i;
      std::size_t d = i;
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (d == i || i >= n || text[i] != '>') throw SyntaxError("malformed slot token", start);
      int idx = std::atoi(text.substr(d, i - d).c_str());
      ++i;
      if (idx >= max_slots) throw SyntaxError("slot index out of range", start);
      Tok t{TokKind::Slot};
      t.pos = start;
      t.slot = idx;
      out.push_back(t);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      Tok t{TokKind::Ident};
      t.pos = start;
      t.ident = text.substr(start, i - start);
      out.push_back(t);
    } else if (is_operator_symbol(c)) {
      Tok t{TokKind::Op};
      t.pos = start;
      t.op = c;
      out.push_back(t);
      ++i;
    } else if (c == '(') {
      out.push_back(Tok{TokKind::LParen, 0, -1, "", 0, start});
      ++i;
    } else if (c == ')') {
      out.push_back(Tok{TokKind::RParen, 0, -1, "", 0, start});
      ++i;
    } else if (c == ',') {
      out.push_back(Tok{TokKind::Comma, 0, -1, "", 0, start});
      ++i;
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", start);
    }
  }
  out.push_back(Tok{TokKind::End, 0, -1, "", 0, n});
  return out;
}

struct StackEntry {
  enum Kind { Operator, Paren, Call } kind;
  char op = 0;
  int formula_id = -1;
  std::string name;
  int commas = 0;        // Paren: argument separators seen so far
  bool for_call = false; // Paren: opened by a formula call
  std::size_t pos = 0;
};

OpTree parse_expression(const std::string& text, const FormulaRegistry& reg, int max_slots,
                        const std::vector<std::string>* arg_labels) {
  auto toks = lex_infix(text, max_slots);
  OpTree tree;
  std::vector<int> out;
  std::vector<StackEntry> ops;
  bool expect_operand = true;

  auto pop_operator = [&](const StackEntry& e) {
    int rhs = out.back();
    out.pop_back();
    int lhs = out.back();
    out.pop_back();
    out.push_back(tree.add(OpNode{e.op}, {lhs, rhs}));
  };

  for (std::size_t ti = 0; ti < toks.size(); ++ti) {
    const Tok& t = toks[ti];
    switch (t.kind) {
      case TokKind::Number:
        if (!expect_operand) throw SyntaxError("operator expected", t.pos);
        out.push_back(tree.add(ConstNode{t.number}));
        expect_operand = false;
        break;
      case TokKind::Slot:
        if (!expect_operand) throw SyntaxError("operator expected", t.pos);
        out.push_back(tree.add(SlotNode{t.slot}));
        expect_operand = false;
        break;
      case TokKind::Ident: {
        if (!expect_operand) throw SyntaxError("operator expected", t.pos);
        if (toks[ti + 1].kind == TokKind::LParen) {
          StackEntry call{StackEntry::Call};
          call.formula_id = reg.id_of(t.ident);  // throws UnknownFormula
          call.name = t.ident;
          call.pos = t.pos;
          ops.push_back(call);
          StackEntry paren{StackEntry::Paren};
          paren.for_call = true;
          paren.pos = toks[ti + 1].pos;
          ops.push_back(paren);
          ++ti;  // consume '('
          expect_operand = true;
        } else if (arg_labels) {
          auto it = std::find(arg_labels->begin(), arg_labels->end(), t.ident);
          if (it == arg_labels->end()) throw SyntaxError("unknown argument name " + t.ident, t.pos);
          out.push_back(tree.add(SlotNode{static_cast<int>(it - arg_labels->begin())}));
          expect_operand = false;
        } else {
          throw UnknownFormula(t.ident);
        }
        break;
      }
      case TokKind::Op: {
        if (expect_operand) throw SyntaxError("operand expected", t.pos);
        int p = precedence(t.op);
        while (!ops.empty() && ops.back().kind == StackEntry::Operator) {
          int tp = precedence(ops.back().op);
          if (tp > p || (tp == p && !right_associative(t.op))) {
            pop_operator(ops.back());
            ops.pop_back();
          } else {
            break;
          }
        }
        StackEntry e{StackEntry::Operator};
        e.op = t.op;
        e.pos = t.pos;
        ops.push_back(e);
        expect_operand = true;
        break;
      }
      case TokKind::LParen: {
        if (!expect_operand) throw SyntaxError("operator expected", t.pos);
        StackEntry e{StackEntry::Paren};
        e.pos = t.pos;
        ops.push_back(e);
        break;
      }
      case TokKind::Comma: {
        if (expect_operand) throw SyntaxError("operand expected", t.pos);
        while (!ops.empty() && ops.back().kind == StackEntry::Operator) {
          pop_operator(ops.back());
          ops.pop_back();
        }
        if (ops.empty() || !ops.back().for_call) {
          throw SyntaxError("comma outside a formula call", t.pos);
        }
        ops.back().commas++;
        expect_operand = true;
        break;
      }
      case TokKind::RParen: {
        if (expect_operand) {
          // name() is an arity error, anything else is plain bad syntax
          if (!ops.empty() && ops.back().kind == StackEntry::Paren && ops.back().for_call &&
              ops.back().commas == 0 && ti > 0 && toks[ti - 1].kind == TokKind::LParen) {
            const StackEntry& call = ops[ops.size() - 2];
            throw WrongArgCount(call.name, reg.at(call.formula_id).arity, 0);
          }
          throw SyntaxError("operand expected", t.pos);
        }
        while (!ops.empty() && ops.back().kind == StackEntry::Operator) {
          pop_operator(ops.back());
          ops.pop_back();
        }
        if (ops.empty()) throw SyntaxError("unbalanced ')'", t.pos);
        StackEntry paren = ops.back();
        ops.pop_back();
        if (paren.for_call) {
          StackEntry call = ops.back();
          ops.pop_back();
          int argc = paren.commas + 1;
          const FormulaDef& def = reg.at(call.formula_id);
          if (argc != def.arity) throw WrongArgCount(call.name, def.arity, argc);
          std::vector<int> children(static_cast<std::size_t>(argc));
          for (int k = argc - 1; k >= 0; --k) {
            children[static_cast<std::size_t>(k)] = out.back();
            out.pop_back();
          }
          out.push_back(tree.add(FormulaNode{call.formula_id}, std::move(children)));
        }
        expect_operand = false;
        break;
      }
      case TokKind::End: {
        if (expect_operand) throw SyntaxError("operand expected", t.pos);
        while (!ops.empty()) {
          if (ops.back().kind != StackEntry::Operator) {
            throw SyntaxError("unbalanced '('", ops.back().pos);
          }
          pop_operator(ops.back());
          ops.pop_back();
        }
        break;
      }
    }
  }
  if (out.size() != 1) throw SyntaxError("malformed expression", text.size());
  tree.root = out.back();
  return tree;
}

}  // namespace

OpTree parse_infix(const std::string& text, const FormulaRegistry& reg, int max_slots) {
  return parse_expression(text, reg, max_slots, nullptr);
}

OpTree parse_formula_body(const std::string& text, const FormulaRegistry& reg,
                          const std::vector<std::string>& arg_labels) {
  // slots inside a body are argument references, cap accordingly
  return parse_expression(text, reg, static_cast<int>(arg_labels.size()), &arg_labels);
}

// ---------------------------------------------------------------------------
// prefix conversion

static std::string node_token(const OpTree::Node& node, const FormulaRegistry& reg) {
  if (const auto* op = std::get_if<OpNode>(&node.kind)) return std::string(1, op->symbol);
  if (const auto* c = std::get_if<ConstNode>(&node.kind)) return format_number(c->value);
  if (const auto* s = std::get_if<SlotNode>(&node.kind))
    return "<N" + std::to_string(s->index) + ">";
  return reg.at(std::get<FormulaNode>(node.kind).formula_id).name;
}

static void prefix_walk(const OpTree& tree, int id, const FormulaRegistry& reg,
                        std::vector<std::string>& out) {
  const auto& node = tree.nodes[static_cast<std::size_t>(id)];
  out.push_back(node_token(node, reg));
  for (int child : node.children) prefix_walk(tree, child, reg, out);
}

std::vector<std::string> to_prefix(const OpTree& tree, const FormulaRegistry& reg) {
  std::vector<std::string> out;
  if (tree.root >= 0) prefix_walk(tree, tree.root, reg, out);
  return out;
}

static int parse_prefix_node(const std::vector<std::string>& tokens, std::size_t& pos,
                             OpTree& tree, const FormulaRegistry& reg, int max_slots) {
  if (pos >= tokens.size()) throw IncompleteTree("token stream ended with children pending");
  const std::string& tok = tokens[pos++];
  if (tok.size() == 1 && is_operator_symbol(tok[0])) {
    int id = tree.add(OpNode{tok[0]});
    int lhs = parse_prefix_node(tokens, pos, tree, reg, max_slots);
    int rhs = parse_prefix_node(tokens, pos, tree, reg, max_slots);
    tree.nodes[static_cast<std::size_t>(id)].children = {lhs, rhs};
    return id;
  }
  if (tok.size() >= 4 && tok.front() == '<' && tok.back() == '>' && tok[1] == 'N') {
    const std::string digits = tok.substr(2, tok.size() - 3);
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw UnknownToken(tok);
    }
    int idx = std::atoi(digits.c_str());
    if (idx >= max_slots) throw UnknownToken(tok);
    return tree.add(SlotNode{idx});
  }
  if (reg.contains(tok)) {
    int fid = reg.id_of(tok);
    int id = tree.add(FormulaNode{fid});
    std::vector<int> children;
    for (int k = 0; k < reg.at(fid).arity; ++k) {
      children.push_back(parse_prefix_node(tokens, pos, tree, reg, max_slots));
    }
    tree.nodes[static_cast<std::size_t>(id)].children = std::move(children);
    return id;
  }
  double v;
  if (parse_number(tok, &v)) return tree.add(ConstNode{v});
  throw UnknownToken(tok);
}

OpTree from_prefix(const std::vector<std::string>& tokens, const FormulaRegistry& reg,
                   int max_slots) {
  if (tokens.empty()) throw IncompleteTree("empty token sequence");
  OpTree tree;
  std::size_t pos = 0;
  tree.root = parse_prefix_node(tokens, pos, tree, reg, max_slots);
  if (pos != tokens.size()) {
    throw TrailingTokens("tree complete after " + std::to_string(pos) + " of " +
                         std::to_string(tokens.size()) + " tokens");
  }
  return tree;
}

// ---------------------------------------------------------------------------
// infix rendering

static std::string infix_walk(const OpTree& tree, int id, const FormulaRegistry& reg,
                              const std::vector<std::string>* labels) {
  const auto& node = tree.nodes[static_cast<std::size_t>(id)];
  if (const auto* op = std::get_if<OpNode>(&node.kind)) {
    int my_prec = precedence(op->symbol);
    auto render_side = [&](int child, bool right_side) {
      std::string s = infix_walk(tree, child, reg, labels);
      const auto& ck = tree.nodes[static_cast<std::size_t>(child)].kind;
      if (const auto* cop = std::get_if<OpNode>(&ck)) {
        int cp = precedence(cop->symbol);
        bool need = cp < my_prec;
        if (cp == my_prec) {
          need = right_associative(op->symbol) ? !right_side : right_side;
        }
        if (need) return "(" + s + ")";
      }
      return s;
    };
    return render_side(node.children[0], false) + " " + op->symbol + " " +
           render_side(node.children[1], true);
  }
  if (const auto* slot = std::get_if<SlotNode>(&node.kind)) {
    if (labels) return (*labels)[static_cast<std::size_t>(slot->index)];
  }
  if (const auto* f = std::get_if<FormulaNode>(&node.kind)) {
    std::string s = reg.at(f->formula_id).name + "(";
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      if (k) s += ", ";
      s += infix_walk(tree, node.children[k], reg, labels);
    }
    return s + ")";
  }
  return node_token(node, reg);
}

std::string to_infix(const OpTree& tree, const FormulaRegistry& reg) {
  if (tree.root < 0) return "";
  return infix_walk(tree, tree.root, reg, nullptr);
}

// ---------------------------------------------------------------------------
// evaluation

static double eval_node(const OpTree& tree, int id, const std::map<int, double>& numbers,
                        const FormulaRegistry& reg) {
  const auto& node = tree.nodes[static_cast<std::size_t>(id)];
  double result;
  if (const auto* op = std::get_if<OpNode>(&node.kind)) {
    double lhs = eval_node(tree, node.children[0], numbers, reg);
    double rhs = eval_node(tree, node.children[1], numbers, reg);
    switch (op->symbol) {
      case '+': result = lhs + rhs; break;
      case '-': result = lhs - rhs; break;
      case '*': result = lhs * rhs; break;
      case '/':
        if (rhs == 0.0) throw DivisionByZero();
        result = lhs / rhs;
        break;
      default: result = std::pow(lhs, rhs); break;
    }
  } else if (const auto* c = std::get_if<ConstNode>(&node.kind)) {
    result = c->value;
  } else if (const auto* s = std::get_if<SlotNode>(&node.kind)) {
    auto it = numbers.find(s->index);
    if (it == numbers.end()) throw MissingSlot(s->index);
    result = it->second;
  } else {
    const auto& f = std::get<FormulaNode>(node.kind);
    const FormulaDef& def = reg.at(f.formula_id);
    std::map<int, double> args;
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      args[static_cast<int>(k)] = eval_node(tree, node.children[k], numbers, reg);
    }
    result = eval_node(def.body, def.body.root, args, reg);
  }
  if (!std::isfinite(result)) throw NonFiniteResult();
  return result;
}

double evaluate(const OpTree& tree, const std::map<int, double>& numbers,
                const FormulaRegistry& reg) {
  if (tree.root < 0) throw Error("cannot evaluate an empty tree");
  return eval_node(tree, tree.root, numbers, reg);
}

// ---------------------------------------------------------------------------
// formula expansion

// note: src and dst may alias, so node data is copied by value before recursing
static int deep_copy(const OpTree& src, int id, OpTree& dst) {
  OpTree::Node node = src.nodes[static_cast<std::size_t>(id)];
  std::vector<int> children;
  for (int child : node.children) children.push_back(deep_copy(src, child, dst));
  return dst.add(node.kind, std::move(children));
}

// copy `body` into dst, replacing argument slots by (fresh copies of) the
// already-expanded argument subtrees rooted at arg_roots (which live in dst)
static int substitute_body(const OpTree& body, int id, OpTree& dst,
                           const std::vector<int>& arg_roots) {
  const auto& node = body.nodes[static_cast<std::size_t>(id)];
  if (const auto* slot = std::get_if<SlotNode>(&node.kind)) {
    return deep_copy(dst, arg_roots[static_cast<std::size_t>(slot->index)], dst);
  }
  std::vector<int> children;
  for (int child : node.children) children.push_back(substitute_body(body, child, dst, arg_roots));
  return dst.add(node.kind, std::move(children));
}

static int expand_node(const OpTree& src, int id, OpTree& dst, const FormulaRegistry& reg) {
  OpTree::Node node = src.nodes[static_cast<std::size_t>(id)];
  if (const auto* f = std::get_if<FormulaNode>(&node.kind)) {
    std::vector<int> arg_roots;
    for (int child : node.children) arg_roots.push_back(expand_node(src, child, dst, reg));
    // bodies may call earlier formulas themselves; expand before substituting
    OpTree body = expand_formulas(reg.at(f->formula_id).body, reg);
    return substitute_body(body, body.root, dst, arg_roots);
  }
  std::vector<int> children;
  for (int child : node.children) children.push_back(expand_node(src, child, dst, reg));
  return dst.add(node.kind, std::move(children));
}

OpTree expand_formulas(const OpTree& tree, const FormulaRegistry& reg) {
  OpTree out;
  if (tree.root >= 0) out.root = expand_node(tree, tree.root, out, reg);
  // argument subtrees copied for substitution leave orphans behind; compact
  OpTree compact;
  if (out.root >= 0) compact.root = deep_copy(out, out.root, compact);
  return compact;
}

// ---------------------------------------------------------------------------
// validation / equality

static void visit_all(const OpTree& tree, int id, std::vector<int>& parent_count,
                      const FormulaRegistry& reg, int max_slots) {
  const auto& node = tree.nodes[static_cast<std::size_t>(id)];
  int want_children;
  if (const auto* op = std::get_if<OpNode>(&node.kind)) {
    if (!is_operator_symbol(op->symbol)) throw Error("invalid operator symbol in tree");
    want_children = 2;
  } else if (std::holds_alternative<ConstNode>(node.kind)) {
    want_children = 0;
  } else if (const auto* slot = std::get_if<SlotNode>(&node.kind)) {
    if (slot->index < 0 || slot->index >= max_slots) throw Error("slot index out of range");
    want_children = 0;
  } else {
    want_children = reg.at(std::get<FormulaNode>(node.kind).formula_id).arity;
  }
  if (static_cast<int>(node.children.size()) != want_children) {
    throw Error("node has " + std::to_string(node.children.size()) + " children, expected " +
                std::to_string(want_children));
  }
  for (int child : node.children) {
    if (child < 0 || child >= tree.size()) throw Error("child index out of range");
    if (++parent_count[static_cast<std::size_t>(child)] > 1) {
      throw Error("node has more than one parent");
    }
    visit_all(tree, child, parent_count, reg, max_slots);
  }
}

void validate_tree(const OpTree& tree, const FormulaRegistry& reg, int max_slots) {
  if (tree.root < 0 || tree.root >= tree.size()) throw Error("tree has no valid root");
  std::vector<int> parent_count(tree.nodes.size(), 0);
  visit_all(tree, tree.root, parent_count, reg, max_slots);
  parent_count[static_cast<std::size_t>(tree.root)]++;
  for (std::size_t i = 0; i < parent_count.size(); ++i) {
    if (parent_count[i] == 0) throw Error("unreachable node in tree arena");
  }
}

static bool node_equal(const OpTree& a, int ia, const OpTree& b, int ib) {
  const auto& na = a.nodes[static_cast<std::size_t>(ia)];
  const auto& nb = b.nodes[static_cast<std::size_t>(ib)];
  if (na.kind.index() != nb.kind.index()) return false;
  if (const auto* op = std::get_if<OpNode>(&na.kind)) {
    if (op->symbol != std::get<OpNode>(nb.kind).symbol) return false;
  } else if (const auto* c = std::get_if<ConstNode>(&na.kind)) {
    if (c->value != std::get<ConstNode>(nb.kind).value) return false;
  } else if (const auto* s = std::get_if<SlotNode>(&na.kind)) {
    if (s->index != std::get<SlotNode>(nb.kind).index) return false;
  } else if (std::get<FormulaNode>(na.kind).formula_id !=
             std::get<FormulaNode>(nb.kind).formula_id) {
    return false;
  }
  if (na.children.size() != nb.children.size()) return false;
  for (std::size_t k = 0; k < na.children.size(); ++k) {
    if (!node_equal(a, na.children[k], b, nb.children[k])) return false;
  }
  return true;
}

bool tree_equal(const OpTree& a, const OpTree& b) {
  if (a.root < 0 || b.root < 0) return a.root == b.root;
  return node_equal(a, a.root, b, b.root);
}

// ---------------------------------------------------------------------------
// built-in registry and JSON I/O

FormulaRegistry default_registry() {
  FormulaRegistry reg;
  auto def = [&reg](const char* name, std::vector<std::string> args, const char* body) {
    FormulaDef d;
    d.name = name;
    d.arity = static_cast<int>(args.size());
    d.arg_labels = std::move(args);
    d.body = parse_formula_body(body, reg, d.arg_labels);
    reg.register_formula(std::move(d));
  };
  def("square_area", {"side"}, "side * side");
  def("square_perimeter", {"side"}, "4 * side");
  def("cubic_volume", {"side"}, "side * side * side");
  def("circle_area", {"radius"}, "3.14 * radius ^ 2");
  def("circumference_r", {"radius"}, "2 * 3.14 * radius");
  def("circumference_d", {"diameter"}, "3.14 * diameter");
  def("triangle_area", {"base", "height"}, "base * height / 2");
  def("rectangle_area", {"length", "width"}, "length * width");
  def("rectangle_perimeter", {"length", "width"}, "2 * (length + width)");
  def("cuboid_volume", {"length", "width", "height"}, "length * width * height");
  def("cuboid_surface", {"length", "width", "height"},
      "2 * (length * width + width * height + length * height)");
  return reg;
}

FormulaRegistry load_registry_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad registry file " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw Error("registry file must hold a JSON array");
  FormulaRegistry reg;
  for (const auto& item : doc) {
    FormulaDef d;
    d.name = item.at("name").get<std::string>();
    d.arity = item.at("arity").get<int>();
    d.arg_labels = item.at("args").get<std::vector<std::string>>();
    d.body = parse_formula_body(item.at("body").get<std::string>(), reg, d.arg_labels);
    reg.register_formula(std::move(d));
  }
  return reg;
}

std::string registry_to_json(const FormulaRegistry& reg) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& def : reg) {
    nlohmann::json item;
    item["name"] = def.name;
    item["arity"] = def.arity;
    item["args"] = def.arg_labels;
    item["body"] = infix_walk(def.body, def.body.root, reg, &def.arg_labels);
    arr.push_back(item);
  }
  return arr.dump(2);
}

}  // namespace s2g
