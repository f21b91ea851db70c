#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cassini {

// Error classes surfaced by the pipeline. The CLI maps each to a distinct
// exit code and parameter scans record them as typed holes.
enum class ErrorKind {
  domain,
  singular_derivative,
  numeric,
  equilibrium_not_found,
  inconsistent_equilibrium,
  untangling_failed,
  not_elliptic,
  resonance,
  degenerate_estimate,
  integration,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace cassini
