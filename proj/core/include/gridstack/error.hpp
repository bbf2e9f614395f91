#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridstack {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario file (bad JSON, wrong types, missing keys).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A model invariant does not hold. `field()` names the offending entry,
/// e.g. `lines[2].reactance`.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ModelBuildError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

/// The simplex engine could not make progress (cycling, singular bases,
/// iteration cap).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class SolveError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public SolveError {
 public:
  using SolveError::SolveError;
};

class UnboundedError : public SolveError {
 public:
  using SolveError::SolveError;
};

class NodeLimitExceeded : public SolveError {
 public:
  using SolveError::SolveError;
};

/// A stage of the pipeline failed to solve. `stage()` is the tag used in
/// logs and on stderr ("stage1", "stage2", ..., "ncuc+").
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Report received in a phase where it is not allowed.
class SequenceError : public Error {
 public:
  using Error::Error;
};

/// Report payload violates its schema. `offset()` is the byte offset into
/// the wire buffer when known.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message, std::size_t offset = 0)
      : Error(message + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class InfeasibleScheduleError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridstack
