#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace s2g {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- expression parsing / tree construction ---

struct SyntaxError : Error {
  SyntaxError(const std::string& what, std::size_t pos)
      : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

struct UnknownFormula : Error {
  explicit UnknownFormula(const std::string& formula)
      : Error("unknown formula: " + formula), name(formula) {}
  std::string name;
};

struct WrongArgCount : Error {
  WrongArgCount(const std::string& formula, int want, int have)
      : Error("formula " + formula + " expects " + std::to_string(want) + " arguments, got " +
              std::to_string(have)),
        name(formula), expected(want), got(have) {}
  std::string name;
  int expected;
  int got;
};

struct DuplicateName : Error {
  explicit DuplicateName(const std::string& formula)
      : Error("formula already registered: " + formula), name(formula) {}
  std::string name;
};

struct ArityLabelMismatch : Error {
  using Error::Error;
};

struct IncompleteTree : Error {
  using Error::Error;
};

struct TrailingTokens : Error {
  using Error::Error;
};

struct UnknownToken : Error {
  explicit UnknownToken(const std::string& tok) : Error("unknown token: " + tok), token(tok) {}
  std::string token;
};

// --- evaluation ---

struct DivisionByZero : Error {
  DivisionByZero() : Error("division by zero") {}
};

struct MissingSlot : Error {
  explicit MissingSlot(int slot)
      : Error("no value bound for number slot <N" + std::to_string(slot) + ">"), index(slot) {}
  int index;
};

struct NonFiniteResult : Error {
  NonFiniteResult() : Error("evaluation produced a non-finite value") {}
};

// --- tokenization / vocabulary ---

struct TooManyNumbers : Error {
  TooManyNumbers(int count, int max)
      : Error("problem contains " + std::to_string(count) + " numbers, limit is " +
              std::to_string(max)) {}
};

struct UnmappableNumber : Error {
  explicit UnmappableNumber(double v)
      : Error("numeric literal " + std::to_string(v) +
              " is neither a problem number nor a known constant"),
        value(v) {}
  double value;
};

// --- array compute / gradients ---

struct ShapeMismatch : Error {
  using Error::Error;
};

struct NonFinite : Error {
  using Error::Error;
};

struct NoPath : Error {
  NoPath() : Error("loss is not connected to any trainable parameter") {}
};

// --- model / decoding ---

struct EmptyInput : Error {
  EmptyInput() : Error("cannot encode an empty token sequence") {}
};

struct MaxNodesExceeded : Error {
  explicit MaxNodesExceeded(int limit)
      : Error("decode exceeded the " + std::to_string(limit) + "-node budget") {}
};

struct NoHypothesisCompleted : Error {
  NoHypothesisCompleted() : Error("beam search finished no hypothesis within the node budget") {}
};

// --- data files ---

struct FileNotFound : Error {
  explicit FileNotFound(const std::string& path) : Error("file not found: " + path) {}
};

struct MalformedLine : Error {
  MalformedLine(std::size_t line, const std::string& why)
      : Error("line " + std::to_string(line) + ": " + why), lineno(line) {}
  std::size_t lineno;
};

}  // namespace s2g
