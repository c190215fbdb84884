#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace respfit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failures: root finding, integration, normal equations.
class SolverError : public Error {
public:
  using Error::Error;
};

class NoRoot : public SolverError {
public:
  using SolverError::SolverError;
};

class InvalidGrid : public SolverError {
public:
  using SolverError::SolverError;
};

class NonFinite : public SolverError {
public:
  using SolverError::SolverError;
};

class OutOfDomain : public SolverError {
public:
  using SolverError::SolverError;
};

class SingularNormalEquations : public SolverError {
public:
  using SolverError::SolverError;
};

/// A solver failure inside one named stage of an experiment run.
class StageError : public SolverError {
public:
  StageError(std::string stage, const std::string &what)
      : SolverError("stage '" + stage + "': " + what),
        stage_(std::move(stage)) {}

  const std::string &stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

/// Invalid experiment configuration. `field()` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string &what)
      : Error("config field '" + field + "': " + what),
        field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace respfit
