#pragma once

// Batch commands of the cassini-stab tool.

#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cassini/config.hpp"
#include "cassini/errors.hpp"

namespace cassini {

enum class Command { model, equilibrium, normalform, stability, scan, check_integrate, all };

std::string_view to_string(Command c);
Command command_from_string(std::string_view s);

inline constexpr std::string_view kToolVersion = "0.1.0";

// Exit codes: 0 success, 2 usage, then one code per error class.
int exit_code(ErrorKind kind);

// Runs one command, writes its files under cfg.output.directory and returns a
// summary of the results. Progress lines go to `log`.
nlohmann::json run_command(Command cmd, const ParsedConfig& pc, std::ostream& log);

// "# cassini-stab <version> command=<cmd> config=<hash>"
std::string provenance_line(Command cmd, const ParsedConfig& pc);

}  // namespace cassini
