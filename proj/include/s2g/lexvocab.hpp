#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "s2g/optree.hpp"

namespace s2g {

/// One extracted number: its value and the token position it came from.
struct SlotEntry {
  double value;
  int position;
};

/// Ordered list of the numbers found in a problem, one slot per occurrence.
struct NumberSlots {
  std::vector<SlotEntry> slots;

  int count() const { return static_cast<int>(slots.size()); }
  std::map<int, double> as_env() const {
    std::map<int, double> env;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      env[static_cast<int>(i)] = slots[i].value;
    }
    return env;
  }
};

/// Whitespace tokenization; tokens containing CJK characters are split into
/// single characters with contiguous number substrings kept whole.
std::vector<std::string> tokenize(const std::string& text);

/// True if the token reads as a number the extractor recognizes: integer,
/// decimal, percentage ("50%") or single-token fraction ("3/4", "(3/4)").
/// The numeric value lands in *out.
bool numeric_token_value(const std::string& token, double* out);

/// Replace each numeric token by <N0>, <N1>, ... in order of occurrence.
/// Throws TooManyNumbers past max_slots.
std::pair<std::vector<std::string>, NumberSlots> extract_numbers(
    const std::vector<std::string>& tokens, int max_slots = kDefaultMaxSlots);

/// Source-side token index map with reserved padding/unknown/number entries.
class SourceVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kNum = 2;

  SourceVocab();

  /// Index for a token; slot tokens map to the number placeholder,
  /// out-of-vocabulary tokens to unknown.
  int lookup(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token_at(int index) const {
    return tokens_.at(static_cast<std::size_t>(index));
  }
  std::string to_json() const;

  friend SourceVocab build_source_vocab(const std::vector<std::vector<std::string>>& corpus,
                                        int min_freq);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Index every token that appears at least min_freq times in the corpus,
/// in first-occurrence order. Slot tokens are covered by the reserved
/// number placeholder and never get their own entry.
SourceVocab build_source_vocab(const std::vector<std::vector<std::string>>& corpus,
                               int min_freq);

/// Target-side vocabulary: operators, constants, formulas, number slots,
/// in that segment order. The first three segments are static; slots are
/// instantiated per problem.
class TargetVocab {
 public:
  TargetVocab(const FormulaRegistry& reg, int max_slots = kDefaultMaxSlots);

  int size() const { return static_cast<int>(tokens_.size()); }
  int static_size() const { return slot_begin_; }
  int max_slots() const { return max_slots_; }

  // segment boundaries [begin, end)
  int op_begin() const { return 0; }
  int op_end() const { return const_begin_; }
  int const_begin() const { return const_begin_; }
  int const_end() const { return formula_begin_; }
  int formula_begin() const { return formula_begin_; }
  int formula_end() const { return slot_begin_; }
  int slot_begin() const { return slot_begin_; }
  int slot_end() const { return size(); }

  const std::string& token_at(int index) const {
    return tokens_.at(static_cast<std::size_t>(index));
  }
  std::optional<int> index_of(const std::string& token) const;

  /// The tree-node kind an output index realizes into.
  NodeKind kind_at(int index) const;
  /// Children required by an output index: 2 for operators, registry arity
  /// for formulas, 0 for constants and slots.
  int arity_at(int index) const;

  int slot_index(int slot) const { return slot_begin_ + slot; }
  const std::vector<double>& constants() const { return constants_; }
  std::string to_json() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> constants_;
  std::vector<int> formula_arity_;
  int const_begin_ = 0;
  int formula_begin_ = 0;
  int slot_begin_ = 0;
  int max_slots_ = 0;
};

/// Map prefix tokens onto target-vocabulary indices. Numeric literals
/// resolve to the first slot holding the same value (1e-9 tolerance) and
/// fall back to constants; throws UnmappableNumber when neither matches.
std::vector<int> encode_target(const std::vector<std::string>& prefix_tokens,
                               const NumberSlots& slots, const TargetVocab& vocab);

/// Inverse of encode_target up to numeral replacement: indices map back to
/// their vocabulary tokens (slot indices to <Ni>).
std::vector<std::string> decode_target(const std::vector<int>& indices, const TargetVocab& vocab);

}  // namespace s2g
