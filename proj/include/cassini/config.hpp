#pragma once

// Run configuration: line-oriented "key = value" text with [section] headers
// and '#' comments. Units follow the parameter table (kg, km, rad, rad/year).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cassini/model.hpp"
#include "cassini/pseries.hpp"
#include "cassini/stab.hpp"

namespace cassini {

struct StabilityConfig {
  double rho0 = 1.0;
  double c = 2.0;
  std::optional<WeightVector> R;  // unset: default_weights(lin, libration_rad)
  double libration_rad = 0.1;
  double resonance_threshold = 1e-10;
  ExponentVariant variant = ExponentVariant::printed;
  // rho0 grid of the stability curve.
  double rho0_min = 0.1;
  double rho0_max = 5.0;
  int rho0_points = 50;
  std::vector<int> curve_orders{10, 20, 30};
};

struct ScanConfig {
  AxisRange x{ScanAxis::i, 0.004, 0.016, 20};
  AxisRange y{ScanAxis::Omega_dot, -0.016, -0.006, 20};
  int sqrtU_degree = 16;
  int r = 12;
  int threads = 1;
};

struct IntegrateConfig {
  double t_span_years = 1e4;
  int samples = 16;
  int sqrtU_degree = 11;
  int r = 8;
  double rtol = 1e-13;
  std::uint64_t seed = 20240611;
};

struct OutputConfig {
  std::string format = "csv";  // csv | json | gnuplot
  std::string directory = ".";
};

struct RunConfig {
  BodyParams body;
  TruncationPolicy trunc;
  int r = 30;
  StabilityConfig stability;
  ScanConfig scan;
  IntegrateConfig integrate;
  OutputConfig output;

  void validate() const;
};

struct ParsedConfig {
  RunConfig cfg;
  std::vector<std::string> warnings;
  std::string canonical;  // normalized "section.key = value" lines, sorted
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// Unknown keys and duplicates (last one wins) produce warnings. Missing
// mandatory keys produce one ErrorKind::config error naming all of them;
// malformed values report the line number. Overrides ("section.key", value)
// replace file values silently.
ParsedConfig parse_config_text(std::string_view text, std::string_view origin = "<config>",
                               const ConfigOverrides& overrides = {});
ParsedConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// Keys that must be present, as "section.key".
const std::vector<std::string>& mandatory_config_keys();

// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ParsedConfig& pc);

}  // namespace cassini
