#pragma once

#include <stdexcept>
#include <string>

namespace tnops {

// Error categories map one-to-one onto the C API status codes.
enum class ErrorKind {
  Dimension,
  Argument,
  Numeric,
  Convergence,
  Config,
  SizeGuard,
  Ambiguity,
  Unsupported,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& w) : Error(ErrorKind::Dimension, w) {}
};
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& w) : Error(ErrorKind::Argument, w) {}
};
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& w) : Error(ErrorKind::Convergence, w) {}
};
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
class SizeGuardError : public Error {
 public:
  explicit SizeGuardError(const std::string& w) : Error(ErrorKind::SizeGuard, w) {}
};
class AmbiguityError : public Error {
 public:
  explicit AmbiguityError(const std::string& w) : Error(ErrorKind::Ambiguity, w) {}
};
class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& w) : Error(ErrorKind::Unsupported, w) {}
};
class IoError : public Error {
 public:
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};

const char* error_kind_name(ErrorKind k) noexcept;

}  // namespace tnops
