#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2g/lexvocab.hpp"
#include "s2g/optree.hpp"

namespace s2g {

enum class AnnotationClass { FormulaAnnotated, OtherShape, NoFormulaNeeded };

std::string class_name(AnnotationClass cls);
std::optional<AnnotationClass> class_from_name(const std::string& name);

/// One word problem with its gold equation in both infix and slot-encoded
/// prefix form.
struct ProblemInstance {
  std::string id;
  std::string text;
  std::string equation;             // infix, any leading "x =" stripped
  std::vector<std::string> tokens;  // text tokens with numbers masked to <Ni>
  NumberSlots slots;
  std::vector<std::string> prefix;  // gold prefix over vocab tokens
  double answer = 0;
  AnnotationClass cls = AnnotationClass::NoFormulaNeeded;
};

struct RejectEntry {
  std::string id;
  std::string reason;
};

struct Dataset {
  std::vector<ProblemInstance> instances;
  std::vector<RejectEntry> rejects;

  int size() const { return static_cast<int>(instances.size()); }
  std::map<AnnotationClass, int> class_counts() const;
};

/// |result - answer| <= 1e-4 * max(1, |answer|).
bool answers_match(double result, double answer);

/// Build one instance from raw fields; throws library errors on any
/// tokenization, parsing, encoding or answer-validation failure.
ProblemInstance build_instance(const std::string& id, const std::string& text,
                               const std::string& equation, double answer,
                               std::optional<AnnotationClass> cls, const FormulaRegistry& reg,
                               int max_slots = kDefaultMaxSlots);

/// Load a JSONL file with fields {"id","text","equation","answer","class"?}.
/// Lines that are not valid JSON objects raise MalformedLine; instances that
/// fail validation land in the rejects report instead.
Dataset load_jsonl(const std::string& path, const FormulaRegistry& reg,
                   int max_slots = kDefaultMaxSlots);

/// Write instances back out in the load_jsonl schema.
void dump_jsonl(const Dataset& ds, const std::string& path);

/// Rejects report: one {"id","reason"} object per line.
void write_rejects(const Dataset& ds, const std::string& path);

/// Re-execute the gold prefix; std::nullopt when the result matches the
/// answer, otherwise the failure reason ("AnswerMismatch", "ExecutionError").
std::optional<std::string> validate_instance(const ProblemInstance& inst,
                                             const FormulaRegistry& reg);

struct FoldSplit {
  int k = 0;
  uint64_t seed = 0;
  std::vector<std::vector<int>> folds;
};

/// Seeded shuffle followed by a contiguous partition; fold sizes differ by
/// at most one.
FoldSplit kfold(int dataset_size, int k, uint64_t seed);

/// Deterministic two-way split: first ceil(frac*n) shuffled ids on the left.
std::pair<std::vector<int>, std::vector<int>> split_ids(int dataset_size, double frac,
                                                        uint64_t seed);

/// Templated generator over the built-in formulas, two-formula compositions
/// and no-formula distractor problems with misleading geometry keywords.
/// Roughly 60% formula problems, 40% distractors; numbers drawn from [1,50].
Dataset synth_generate(int n, uint64_t seed, const FormulaRegistry& reg);

struct Metrics {
  int total = 0;
  int answer_correct = 0;
  int exact_correct = 0;
  int decode_failures = 0;
  std::map<std::string, std::pair<int, int>> per_class;  // name -> (answer_correct, total)

  double answer_accuracy() const { return total ? static_cast<double>(answer_correct) / total : 0; }
  double exact_match() const { return total ? static_cast<double>(exact_correct) / total : 0; }
};

std::string metrics_to_json(const Metrics& m);

struct Prediction {
  bool ok = false;
  std::vector<std::string> prefix_tokens;
  std::string error;
};

using PredictFn = std::function<Prediction(const ProblemInstance&)>;

/// Score predictions: answer accuracy compares the executed tree against the
/// gold answer; exact match compares prefix tokens after slot tokens are
/// normalized to their values. Failed predictions and unexecutable trees
/// count as wrong.
Metrics evaluate_predictions(const std::vector<ProblemInstance>& instances, const PredictFn& fn,
                             const FormulaRegistry& reg);

}  // namespace s2g
