/**
 * @file error.hpp
 * @brief Exception categories used throughout the solver.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace mlqd {

enum class ErrorKind { Config, Domain, Numerical, Convergence, IO };

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Config: return "configuration error";
  case ErrorKind::Domain: return "domain error";
  case ErrorKind::Numerical: return "numerical error";
  case ErrorKind::Convergence: return "convergence failure";
  case ErrorKind::IO: return "I/O error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &what) : Error(ErrorKind::Config, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string &what) : Error(ErrorKind::Domain, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string &what)
      : Error(ErrorKind::Numerical, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string &what)
      : Error(ErrorKind::Convergence, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string &what) : Error(ErrorKind::IO, what) {}
};

} // namespace mlqd
