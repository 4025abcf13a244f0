#include "s2g/lexvocab.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>

#include <json.hpp>

namespace s2g {

namespace {

// decode one UTF-8 code point starting at i; advances i past it
uint32_t next_codepoint(const std::string& s, std::size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  uint32_t cp = c;
  int extra = 0;
  if (c >= 0xF0) {
    cp = c & 0x07u;
    extra = 3;
  } else if (c >= 0xE0) {
    cp = c & 0x0Fu;
    extra = 2;
  } else if (c >= 0xC0) {
    cp = c & 0x1Fu;
    extra = 1;
  }
  ++i;
  while (extra-- > 0 && i < s.size()) {
    cp = (cp << 6) | (static_cast<unsigned char>(s[i]) & 0x3Fu);
    ++i;
  }
  return cp;
}

bool is_cjk(uint32_t cp) {
  return (cp >= 0x2E80 && cp <= 0x303F) ||   // radicals, CJK punctuation
         (cp >= 0x3400 && cp <= 0x9FFF) ||   // unified ideographs
         (cp >= 0xF900 && cp <= 0xFAFF) ||   // compatibility ideographs
         (cp >= 0xFF00 && cp <= 0xFFEF);     // fullwidth forms
}

bool is_number_char(uint32_t cp) {
  return (cp >= '0' && cp <= '9') || cp == '.' || cp == '%';
}

// split a CJK-containing token: one piece per character, except that runs of
// ASCII digits/dots/percent stay together
void split_cjk_token(const std::string& tok, std::vector<std::string>& out) {
  std::size_t i = 0;
  std::string number;
  auto flush = [&]() {
    if (!number.empty()) {
      out.push_back(number);
      number.clear();
    }
  };
  while (i < tok.size()) {
    std::size_t start = i;
    uint32_t cp = next_codepoint(tok, i);
    if (is_number_char(cp)) {
      number += tok.substr(start, i - start);
    } else {
      flush();
      out.push_back(tok.substr(start, i - start));
    }
  }
  flush();
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string tok = text.substr(start, i - start);
    bool has_cjk = false;
    for (std::size_t j = 0; j < tok.size();) {
      if (is_cjk(next_codepoint(tok, j))) {
        has_cjk = true;
        break;
      }
    }
    if (has_cjk) {
      split_cjk_token(tok, out);
    } else {
      out.push_back(std::move(tok));
    }
  }
  return out;
}

bool numeric_token_value(const std::string& token, double* out) {
  if (token.empty()) return false;
  std::string body = token;
  if (body.size() >= 2 && body.front() == '(' && body.back() == ')') {
    body = body.substr(1, body.size() - 2);
  }
  if (body.empty() || !std::isdigit(static_cast<unsigned char>(body[0]))) return false;

  auto parse_plain = [](const std::string& s, double* v) {
    if (s.empty()) return false;
    bool dot = false;
    for (char c : s) {
      if (c == '.') {
        if (dot) return false;
        dot = true;
      } else if (!std::isdigit(static_cast<unsigned char>(c))) {
        return false;
      }
    }
    if (s.front() == '.' || s.back() == '.') return false;
    *v = std::strtod(s.c_str(), nullptr);
    return true;
  };

  if (body.back() == '%') {
    double v;
    if (!parse_plain(body.substr(0, body.size() - 1), &v)) return false;
    *out = v / 100.0;
    return true;
  }
  auto slash = body.find('/');
  if (slash != std::string::npos) {
    double num, den;
    if (!parse_plain(body.substr(0, slash), &num)) return false;
    if (!parse_plain(body.substr(slash + 1), &den)) return false;
    if (den == 0.0) return false;
    *out = num / den;
    return true;
  }
  return parse_plain(body, out);
}

std::pair<std::vector<std::string>, NumberSlots> extract_numbers(
    const std::vector<std::string>& tokens, int max_slots) {
  std::vector<std::string> masked;
  masked.reserve(tokens.size());
  NumberSlots slots;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double v;
    if (numeric_token_value(tokens[i], &v)) {
      int idx = slots.count();
      if (idx >= max_slots) throw TooManyNumbers(idx + 1, max_slots);
      slots.slots.push_back(SlotEntry{v, static_cast<int>(i)});
      masked.push_back("<N" + std::to_string(idx) + ">");
    } else {
      masked.push_back(tokens[i]);
    }
  }
  return {std::move(masked), std::move(slots)};
}

// ---------------------------------------------------------------------------
// source vocabulary

SourceVocab::SourceVocab() {
  tokens_ = {"<pad>", "<unk>", "<num>"};
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) index_[tokens_[i]] = i;
}

static bool is_slot_token(const std::string& tok) {
  if (tok.size() < 4 || tok.front() != '<' || tok.back() != '>' || tok[1] != 'N') return false;
  for (std::size_t i = 2; i + 1 < tok.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
  }
  return true;
}

int SourceVocab::lookup(const std::string& token) const {
  if (is_slot_token(token)) return kNum;
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::string SourceVocab::to_json() const {
  nlohmann::json obj = nlohmann::json::object();
  for (int i = 0; i < size(); ++i) obj[tokens_[static_cast<std::size_t>(i)]] = i;
  return obj.dump();
}

SourceVocab build_source_vocab(const std::vector<std::vector<std::string>>& corpus, int min_freq) {
  SourceVocab vocab;
  std::unordered_map<std::string, int> counts;
  std::vector<std::string> order;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      if (is_slot_token(tok)) continue;
      if (counts[tok]++ == 0) order.push_back(tok);
    }
  }
  for (const auto& tok : order) {
    if (counts[tok] >= min_freq && !vocab.index_.count(tok)) {
      vocab.index_[tok] = static_cast<int>(vocab.tokens_.size());
      vocab.tokens_.push_back(tok);
    }
  }
  return vocab;
}

// ---------------------------------------------------------------------------
// target vocabulary

TargetVocab::TargetVocab(const FormulaRegistry& reg, int max_slots) : max_slots_(max_slots) {
  for (char op : {'+', '-', '*', '/', '^'}) tokens_.push_back(std::string(1, op));
  const_begin_ = static_cast<int>(tokens_.size());
  constants_ = {1.0, 2.0, 3.14};
  for (double c : constants_) tokens_.push_back(format_number(c));
  formula_begin_ = static_cast<int>(tokens_.size());
  for (const auto& def : reg) {
    tokens_.push_back(def.name);
    formula_arity_.push_back(def.arity);
  }
  slot_begin_ = static_cast<int>(tokens_.size());
  for (int i = 0; i < max_slots; ++i) tokens_.push_back("<N" + std::to_string(i) + ">");
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    index_[tokens_[static_cast<std::size_t>(i)]] = i;
  }
}

std::optional<int> TargetVocab::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeKind TargetVocab::kind_at(int index) const {
  if (index < const_begin_) return OpNode{tokens_[static_cast<std::size_t>(index)][0]};
  if (index < formula_begin_) {
    return ConstNode{constants_[static_cast<std::size_t>(index - const_begin_)]};
  }
  if (index < slot_begin_) return FormulaNode{index - formula_begin_};
  return SlotNode{index - slot_begin_};
}

int TargetVocab::arity_at(int index) const {
  if (index < const_begin_) return 2;
  if (index < formula_begin_) return 0;
  if (index < slot_begin_) return formula_arity_[static_cast<std::size_t>(index - formula_begin_)];
  return 0;
}

std::string TargetVocab::to_json() const {
  nlohmann::json obj = nlohmann::json::object();
  for (int i = 0; i < size(); ++i) obj[tokens_[static_cast<std::size_t>(i)]] = i;
  return obj.dump();
}

// ---------------------------------------------------------------------------
// target encoding

std::vector<int> encode_target(const std::vector<std::string>& prefix_tokens,
                               const NumberSlots& slots, const TargetVocab& vocab) {
  std::vector<int> out;
  out.reserve(prefix_tokens.size());
  for (const auto& tok : prefix_tokens) {
    if (is_slot_token(tok)) {
      auto idx = vocab.index_of(tok);
      if (!idx) throw UnknownToken(tok);
      int slot = *idx - vocab.slot_begin();
      if (slot >= slots.count()) throw MissingSlot(slot);
      out.push_back(*idx);
      continue;
    }
    double v;
    if (parse_number(tok, &v)) {
      // copying beats memorizing: problem numbers win over constants
      int found = -1;
      for (int i = 0; i < slots.count(); ++i) {
        if (std::abs(slots.slots[static_cast<std::size_t>(i)].value - v) <= 1e-9) {
          found = i;
          break;
        }
      }
      if (found >= 0) {
        out.push_back(vocab.slot_index(found));
        continue;
      }
      const auto& consts = vocab.constants();
      for (std::size_t i = 0; i < consts.size(); ++i) {
        if (std::abs(consts[i] - v) <= 1e-9) {
          found = vocab.const_begin() + static_cast<int>(i);
          break;
        }
      }
      if (found < 0) throw UnmappableNumber(v);
      out.push_back(found);
      continue;
    }
    if (auto idx = vocab.index_of(tok)) {
      out.push_back(*idx);
      continue;
    }
    throw UnknownToken(tok);
  }
  return out;
}

std::vector<std::string> decode_target(const std::vector<int>& indices, const TargetVocab& vocab) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int idx : indices) out.push_back(vocab.token_at(idx));
  return out;
}

}  // namespace s2g
