#ifndef SOLICIT_ERROR_H_
#define SOLICIT_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace solicit {

// Base of every recoverable error raised by the library. The CLI reports
// ConfigError as a usage error (exit 2) and every other kind as a data error
// (exit 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input; `line` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " +
              what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Duplicate ids, dangling references and similar cross-record violations.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (lexicon, coefficients, costs, simulator knobs).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller broke an API precondition (length mismatch, out-of-range k, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Input data unusable for the requested computation (non-finite values).
class DataError : public Error {
 public:
  using Error::Error;
};

// Training could not proceed (single class, non-finite inputs).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Metric or cross-validation cannot be computed for this data.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Interval constraints cannot be satisfied.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

}  // namespace solicit

#endif  // SOLICIT_ERROR_H_
