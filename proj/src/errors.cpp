#include "cassini/errors.hpp"

namespace cassini {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::singular_derivative: return "singular_derivative";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::equilibrium_not_found: return "equilibrium_not_found";
    case ErrorKind::inconsistent_equilibrium: return "inconsistent_equilibrium";
    case ErrorKind::untangling_failed: return "untangling_failed";
    case ErrorKind::not_elliptic: return "not_elliptic";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::degenerate_estimate: return "degenerate_estimate";
    case ErrorKind::integration: return "integration";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace cassini
