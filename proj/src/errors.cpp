#include "tnops/errors.hpp"

namespace tnops {

Error::Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

const char* error_kind_name(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Config: return "config";
    case ErrorKind::SizeGuard: return "size-guard";
    case ErrorKind::Ambiguity: return "ambiguity";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace tnops
