#include "cassini/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cassini/errors.hpp"

namespace cassini {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view origin, int line, const std::string& key,
                            std::string_view value, const char* what) {
  throw Error(ErrorKind::config, "config",
              std::string(origin) + ":" + std::to_string(line) + ": " + key + " = '" +
                  std::string(value) + "' is not " + what);
}

struct Ctx {
  std::string_view origin;
  int line;
  const std::string& key;
  std::string_view value;
};

double as_double(const Ctx& c) {
  double v = 0.0;
  const char* b = c.value.data();
  const char* e = b + c.value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) bad_value(c.origin, c.line, c.key, c.value, "a number");
  return v;
}

int as_int(const Ctx& c) {
  int v = 0;
  const char* b = c.value.data();
  const char* e = b + c.value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) bad_value(c.origin, c.line, c.key, c.value, "an integer");
  return v;
}

std::vector<int> as_int_list(const Ctx& c) {
  std::vector<int> out;
  std::string_view rest = c.value;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    int v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size()) {
      bad_value(c.origin, c.line, c.key, c.value, "a comma-separated integer list");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const Ctx&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["body.M_kg"] = [](RunConfig& r, const Ctx& c) { r.body.M_kg = as_double(c); };
    t["body.J2"] = [](RunConfig& r, const Ctx& c) { r.body.J2 = as_double(c); };
    t["body.C22"] = [](RunConfig& r, const Ctx& c) { r.body.C22 = as_double(c); };
    t["body.C_over_mRe2"] = [](RunConfig& r, const Ctx& c) { r.body.C_norm = as_double(c); };
    t["body.a_km"] = [](RunConfig& r, const Ctx& c) { r.body.a_km = as_double(c); };
    t["body.e"] = [](RunConfig& r, const Ctx& c) { r.body.e = as_double(c); };
    t["body.i_rad"] = [](RunConfig& r, const Ctx& c) { r.body.i = as_double(c); };
    t["body.Omega_dot_rad_per_year"] = [](RunConfig& r, const Ctx& c) { r.body.Omega_dot = as_double(c); };
    t["body.n_o_rad_per_year"] = [](RunConfig& r, const Ctx& c) { r.body.n_o = as_double(c); };
    t["body.G"] = [](RunConfig& r, const Ctx& c) { r.body.G_const = as_double(c); };

    t["truncation.ecc_degree"] = [](RunConfig& r, const Ctx& c) { r.trunc.max_ecc_degree = as_int(c); };
    t["truncation.sqrtU_degree"] = [](RunConfig& r, const Ctx& c) { r.trunc.max_sqrtU_degree = as_int(c); };
    t["truncation.poly_degree"] = [](RunConfig& r, const Ctx& c) { r.trunc.max_poly_degree = as_int(c); };
    t["truncation.r"] = [](RunConfig& r, const Ctx& c) { r.r = as_int(c); };

    t["stability.rho0"] = [](RunConfig& r, const Ctx& c) { r.stability.rho0 = as_double(c); };
    t["stability.c"] = [](RunConfig& r, const Ctx& c) { r.stability.c = as_double(c); };
    t["stability.R1"] = [](RunConfig& r, const Ctx& c) {
      if (!r.stability.R) r.stability.R = WeightVector{};
      r.stability.R->R1 = as_double(c);
    };
    t["stability.R3"] = [](RunConfig& r, const Ctx& c) {
      if (!r.stability.R) r.stability.R = WeightVector{};
      r.stability.R->R3 = as_double(c);
    };
    t["stability.libration_rad"] = [](RunConfig& r, const Ctx& c) { r.stability.libration_rad = as_double(c); };
    t["stability.resonance_threshold"] = [](RunConfig& r, const Ctx& c) {
      r.stability.resonance_threshold = as_double(c);
    };
    t["stability.exponent_variant"] = [](RunConfig& r, const Ctx& c) {
      try {
        r.stability.variant = exponent_variant_from_string(c.value);
      } catch (const Error&) {
        bad_value(c.origin, c.line, c.key, c.value, "printed or homogeneous");
      }
    };
    t["stability.rho0_min"] = [](RunConfig& r, const Ctx& c) { r.stability.rho0_min = as_double(c); };
    t["stability.rho0_max"] = [](RunConfig& r, const Ctx& c) { r.stability.rho0_max = as_double(c); };
    t["stability.rho0_points"] = [](RunConfig& r, const Ctx& c) { r.stability.rho0_points = as_int(c); };
    t["stability.curve_orders"] = [](RunConfig& r, const Ctx& c) { r.stability.curve_orders = as_int_list(c); };

    auto axis = [](AxisRange ScanConfig::*which) {
      return [which](RunConfig& r, const Ctx& c) {
        try {
          (r.scan.*which).axis = scan_axis_from_string(c.value);
        } catch (const Error&) {
          bad_value(c.origin, c.line, c.key, c.value, "one of i, Omega_dot, C_norm");
        }
      };
    };
    t["scan.x_axis"] = axis(&ScanConfig::x);
    t["scan.y_axis"] = axis(&ScanConfig::y);
    t["scan.x_min"] = [](RunConfig& r, const Ctx& c) { r.scan.x.lo = as_double(c); };
    t["scan.x_max"] = [](RunConfig& r, const Ctx& c) { r.scan.x.hi = as_double(c); };
    t["scan.y_min"] = [](RunConfig& r, const Ctx& c) { r.scan.y.lo = as_double(c); };
    t["scan.y_max"] = [](RunConfig& r, const Ctx& c) { r.scan.y.hi = as_double(c); };
    t["scan.nx"] = [](RunConfig& r, const Ctx& c) { r.scan.x.n = as_int(c); };
    t["scan.ny"] = [](RunConfig& r, const Ctx& c) { r.scan.y.n = as_int(c); };
    t["scan.sqrtU_degree"] = [](RunConfig& r, const Ctx& c) { r.scan.sqrtU_degree = as_int(c); };
    t["scan.r"] = [](RunConfig& r, const Ctx& c) { r.scan.r = as_int(c); };
    t["scan.threads"] = [](RunConfig& r, const Ctx& c) { r.scan.threads = as_int(c); };

    t["integrate.t_span_years"] = [](RunConfig& r, const Ctx& c) { r.integrate.t_span_years = as_double(c); };
    t["integrate.samples"] = [](RunConfig& r, const Ctx& c) { r.integrate.samples = as_int(c); };
    t["integrate.sqrtU_degree"] = [](RunConfig& r, const Ctx& c) { r.integrate.sqrtU_degree = as_int(c); };
    t["integrate.r"] = [](RunConfig& r, const Ctx& c) { r.integrate.r = as_int(c); };
    t["integrate.rtol"] = [](RunConfig& r, const Ctx& c) { r.integrate.rtol = as_double(c); };
    t["integrate.seed"] = [](RunConfig& r, const Ctx& c) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(c.value.data(), c.value.data() + c.value.size(), v);
      if (ec != std::errc() || p != c.value.data() + c.value.size()) {
        bad_value(c.origin, c.line, c.key, c.value, "an unsigned integer");
      }
      r.integrate.seed = v;
    };

    t["output.format"] = [](RunConfig& r, const Ctx& c) {
      if (c.value != "csv" && c.value != "json" && c.value != "gnuplot") {
        bad_value(c.origin, c.line, c.key, c.value, "csv, json or gnuplot");
      }
      r.output.format = std::string(c.value);
    };
    t["output.directory"] = [](RunConfig& r, const Ctx& c) { r.output.directory = std::string(c.value); };
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& mandatory_config_keys() {
  static const std::vector<std::string> keys = {
      "body.M_kg",          "body.J2",
      "body.C22",           "body.C_over_mRe2",
      "body.a_km",          "body.e",
      "body.i_rad",         "body.Omega_dot_rad_per_year",
      "body.n_o_rad_per_year", "truncation.ecc_degree",
      "truncation.sqrtU_degree", "truncation.poly_degree",
      "truncation.r",       "stability.rho0",
  };
  return keys;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::config, "config", what); };
  try {
    body.validate();
    trunc.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (r < 0) fail("truncation.r must be >= 0");
  if (trunc.max_sqrtU_degree < r + 3) {
    fail("truncation.sqrtU_degree must be >= r + 3 (r = " + std::to_string(r) + ")");
  }
  if (!(stability.rho0 > 0.0)) fail("stability.rho0 must be positive");
  if (!(stability.c >= 1.0)) fail("stability.c must be >= 1");
  if (stability.R && !(stability.R->R1 > 0.0 && stability.R->R3 > 0.0)) {
    fail("stability.R1 and stability.R3 must both be set and positive");
  }
  if (!(stability.libration_rad > 0.0)) fail("stability.libration_rad must be positive");
  if (!(stability.rho0_min > 0.0 && stability.rho0_max > stability.rho0_min)) {
    fail("need 0 < stability.rho0_min < stability.rho0_max");
  }
  if (stability.rho0_points < 2) fail("stability.rho0_points must be >= 2");
  for (int o : stability.curve_orders) {
    if (o < 2 || o % 2 != 0) fail("stability.curve_orders must be even and >= 2");
  }
  if (scan.x.n < 1 || scan.y.n < 1) fail("scan.nx and scan.ny must be >= 1");
  if (scan.x.axis == scan.y.axis) fail("scan axes must differ");
  if (scan.r < 2 || scan.sqrtU_degree < scan.r + 3) fail("scan needs r >= 2 and sqrtU_degree >= r + 3");
  if (scan.threads < 1) fail("scan.threads must be >= 1");
  if (!(integrate.t_span_years > 0.0) || integrate.samples < 1) {
    fail("integrate.t_span_years must be positive and integrate.samples >= 1");
  }
  if (integrate.r < 2 || integrate.sqrtU_degree < integrate.r + 3) {
    fail("integrate needs r >= 2 and sqrtU_degree >= r + 3");
  }
  if (!(integrate.rtol > 0.0)) fail("integrate.rtol must be positive");
}

ParsedConfig parse_config_text(std::string_view text, std::string_view origin,
                               const ConfigOverrides& overrides) {
  ParsedConfig pc;
  std::map<std::string, std::pair<std::string, int>> values;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::config, "config", where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::config, "config", where + "expected 'key = value'");
    const std::string_view k = trim(line.substr(0, eq));
    const std::string_view v = trim(line.substr(eq + 1));
    if (k.empty()) throw Error(ErrorKind::config, "config", where + "empty key");
    const std::string key = section.empty() ? std::string(k) : section + "." + std::string(k);
    if (!setters().count(key)) {
      pc.warnings.push_back(where + "unknown key '" + key + "' ignored");
      continue;
    }
    if (auto it = values.find(key); it != values.end()) {
      pc.warnings.push_back(where + "duplicate key '" + key + "' (line " +
                            std::to_string(it->second.second) + " overridden)");
    }
    values[key] = {std::string(v), line_no};
  }

  for (const auto& [key, v] : overrides) {
    if (!setters().count(key)) throw Error(ErrorKind::config, "config", "unknown override key '" + key + "'");
    values[key] = {v, 0};
  }

  std::vector<std::string> missing;
  for (const auto& k : mandatory_config_keys()) {
    if (!values.count(k)) missing.push_back(k);
  }
  if (!missing.empty()) {
    std::string msg = std::string(origin) + ": missing mandatory keys:";
    for (const auto& k : missing) msg += " " + k;
    throw Error(ErrorKind::config, "config", msg);
  }
  for (const auto& [key, vl] : values) {
    setters().at(key)(pc.cfg, Ctx{vl.second > 0 ? origin : "override", vl.second, key, vl.first});
    pc.canonical += key + " = " + vl.first + "\n";
  }
  pc.cfg.validate();
  return pc;
}

ParsedConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cli", "cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string(), overrides);
}

std::string config_hash(const ParsedConfig& pc) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : pc.canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cassini
