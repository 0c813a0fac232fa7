#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace linpi {

// Every failure the library reports is an Error with one of these codes.
// Codes are stable so callers (the CLI in particular) can map them to
// exit statuses without string matching.
enum class ErrorCode {
  Parse,             // malformed process, type, or environment text
  NotAValue,         // substitution of a non-value expression
  StuckExpression,   // evaluation reached a non-value it cannot reduce
  IllFormedSystem,   // type equation system with bare or unbound unknowns
  UndefinedCombination,  // type or environment combination does not exist
  MissingChannel,    // environment reduction on a name not in the environment
  InsufficientUse,   // environment reduction on an exhausted channel
  DomainMismatch,    // environment merge over different name sets
  UnboundName,       // process uses a name the environment does not declare
  Unsatisfiable,     // constraint closure found a constructor clash
  NoSolution,        // use search exhausted every candidate assignment
  NotCovering,       // substitution misses a variable of the constraint set
  SearchSpace,       // residual use search too large; see --omega-fallback
  UnsupportedGround, // instantiation over a recursive ground spine
  NotSessionShaped,  // linear type outside the image of the session encoding
  Io,                // file could not be read
  Internal,          // invariant violation; always a bug
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures carry the source position and the token classes that
// would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(int line, int column, std::vector<std::string> expected,
             const std::string& found);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

}  // namespace linpi
