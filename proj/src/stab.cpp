#include "cassini/stab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

namespace cassini {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

}  // namespace

std::string_view to_string(ExponentVariant v) {
  return v == ExponentVariant::printed ? "printed" : "homogeneous";
}

ExponentVariant exponent_variant_from_string(std::string_view s) {
  if (s == "printed") return ExponentVariant::printed;
  if (s == "homogeneous") return ExponentVariant::homogeneous;
  throw Error(ErrorKind::config, "stab", "unknown exponent variant '" + std::string(s) + "'");
}

double tau_exponent(int r, ExponentVariant v) {
  return v == ExponentVariant::printed ? 0.5 * r + 1.0 : 0.5 * (r + 3);
}

double optimal_rho(double rho0, int r, ExponentVariant v) {
  const double a = tau_exponent(r, v);
  if (a <= 1.0) throw Error(ErrorKind::domain, "stab", "no interior maximum for r = " + std::to_string(r));
  return a / (a - 1.0) * rho0;
}

double remainder_velocity_norm(const NormalForm& nf, int r, const WeightVector& R) {
  R.validate();
  if (r < 0 || r > nf.order) {
    throw Error(ErrorKind::domain, "stab",
                "order " + std::to_string(r) + " outside the normal form (0.." +
                    std::to_string(nf.order) + ")");
  }
  const PoissonSeries& rem = nf.first_remainder[r];
  if (rem.empty()) return 0.0;
  const double n1 = weighted_norm(derivative_angle(rem, 1), R) / R.R1;
  const double n3 = weighted_norm(derivative_angle(rem, 3), R) / R.R3;
  return std::max(n1, n3);
}

double escape_time_tau(double rho0, double rho, int r, double rem_norm, double c,
                       ExponentVariant v) {
  if (!(rho0 > 0.0) || !(rho > rho0)) {
    throw Error(ErrorKind::domain, "stab", "need rho > rho0 > 0");
  }
  if (!(c >= 1.0)) throw Error(ErrorKind::domain, "stab", "c must be >= 1");
  if (!(rem_norm > 0.0)) throw Error(ErrorKind::domain, "stab", "remainder norm must be positive");
  return (rho - rho0) / (c * rem_norm * std::pow(rho, tau_exponent(r, v)));
}

WeightVector default_weights(const Linearization& lin, double libration) {
  if (!(libration > 0.0)) throw Error(ErrorKind::domain, "stab", "libration amplitude must be positive");
  const double l2 = libration * libration;
  return {l2 / (2.0 * lin.U1_star), l2 / (2.0 * lin.U3_star)};
}

StabilityEstimate effective_stability_time(const NormalForm& nf, double rho0,
                                           const WeightVector& R, double c, int r_max,
                                           ExponentVariant v) {
  if (r_max > nf.order) {
    throw Error(ErrorKind::domain, "stab", "normal form order below r_max");
  }
  if (!(rho0 > 0.0)) throw Error(ErrorKind::domain, "stab", "rho0 must be positive");
  StabilityEstimate est;
  est.rho0 = rho0;
  est.c = c;
  est.R = R;
  est.variant = v;
  bool any = false;
  for (int r = 2; r <= r_max; r += 2) {
    StabilityRow row;
    row.r = r;
    row.rho_opt = optimal_rho(rho0, r, v);
    row.rem_norm = remainder_velocity_norm(nf, r, R);
    row.tau_tilde = row.rem_norm > 0.0
                        ? escape_time_tau(rho0, row.rho_opt, r, row.rem_norm, c, v)
                        : std::numeric_limits<double>::infinity();
    if (std::isfinite(row.tau_tilde) && (!any || row.tau_tilde > est.T)) {
      est.T = row.tau_tilde;
      est.r_opt = r;
      any = true;
    }
    est.per_order.push_back(row);
  }
  if (!any) {
    throw Error(ErrorKind::degenerate_estimate, "stab",
                "no order up to " + std::to_string(r_max) + " gives a finite escape time");
  }
  return est;
}

PipelineResult run_pipeline(const BodyParams& p, const PipelineSettings& s) {
  PipelineResult out;
  out.model = assemble_hamiltonian(p, s.trunc);
  out.expansion = expand_at_cassini(out.model, s.trunc);
  out.nf = normalize(out.expansion.aa.H0, s.r, s.resonance_threshold);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::i: return "i";
    case ScanAxis::Omega_dot: return "Omega_dot";
    case ScanAxis::C_norm: return "C_norm";
  }
  return "?";
}

ScanAxis scan_axis_from_string(std::string_view s) {
  if (s == "i" || s == "i_rad") return ScanAxis::i;
  if (s == "Omega_dot" || s == "Omega_dot_rad_per_year") return ScanAxis::Omega_dot;
  if (s == "C_norm" || s == "C_over_mRe2") return ScanAxis::C_norm;
  throw Error(ErrorKind::config, "stab", "unknown scan axis '" + std::string(s) + "'");
}

double AxisRange::value(int idx) const {
  if (n == 1) return lo;
  return lo + (hi - lo) * idx / (n - 1);
}

void ScanSpec::validate() const {
  if (x.n < 1 || y.n < 1) throw Error(ErrorKind::config, "stab", "grid sizes must be >= 1");
  if (x.axis == y.axis) throw Error(ErrorKind::config, "stab", "scan axes must differ");
  for (const AxisRange* a : {&x, &y}) {
    if (a->axis == ScanAxis::i && !(std::min(a->lo, a->hi) > 0.0)) {
      throw Error(ErrorKind::config, "stab", "inclination range must be positive");
    }
    if (a->axis == ScanAxis::C_norm && !(a->lo > 0.0 && a->hi > 0.0)) {
      throw Error(ErrorKind::config, "stab", "C_norm range must be positive");
    }
  }
  if (!(rho0 > 0.0)) throw Error(ErrorKind::config, "stab", "rho0 must be positive");
  if (!(c >= 1.0)) throw Error(ErrorKind::config, "stab", "c must be >= 1");
  if (R) R->validate();
}

BodyParams apply_axis(BodyParams p, ScanAxis a, double value) {
  switch (a) {
    case ScanAxis::i: p.i = value; break;
    case ScanAxis::Omega_dot: p.Omega_dot = value; break;
    case ScanAxis::C_norm: p.C_norm = value; break;
  }
  return p;
}

namespace {

ScanCell scan_point(const ScanSpec& spec, const WeightVector& R, int ix, int iy) {
  ScanCell cell;
  try {
    BodyParams p = apply_axis(spec.base, spec.x.axis, spec.x.value(ix));
    p = apply_axis(p, spec.y.axis, spec.y.value(iy));
    const auto res = run_pipeline(p, spec.pipeline);
    const auto est = effective_stability_time(res.nf, spec.rho0, R, spec.c, spec.pipeline.r, spec.variant);
    cell.log10_T = std::log10(est.T);
  } catch (const Error& e) {
    cell.hole = e.kind();
  }
  return cell;
}

}  // namespace

ScanResult parameter_scan(const ScanSpec& spec) {
  spec.validate();
  ScanResult res;
  res.spec = spec;
  if (!res.spec.R) {
    const auto nominal = run_pipeline(spec.base, spec.pipeline);
    res.spec.R = default_weights(nominal.expansion.aa.lin, spec.libration);
  }
  const WeightVector R = *res.spec.R;
  const int total = spec.x.n * spec.y.n;
  res.cells.resize(total);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int idx = next++; idx < total; idx = next++) {
      res.cells[idx] = scan_point(spec, R, idx % spec.x.n, idx / spec.x.n);
    }
  };
  const int nthreads = std::clamp(spec.threads, 1, total);
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return res;
}

void write_csv(std::ostream& os, const ScanResult& res) {
  const auto& s = res.spec;
  os << to_string(s.x.axis) << ',' << to_string(s.y.axis) << ",log10T\n";
  for (int iy = 0; iy < s.y.n; ++iy) {
    for (int ix = 0; ix < s.x.n; ++ix) {
      const auto& c = res.at(ix, iy);
      os << fmt(s.x.value(ix)) << ',' << fmt(s.y.value(iy)) << ',';
      if (c.hole) {
        os << "hole:" << to_string(*c.hole);
      } else {
        os << fmt(c.log10_T);
      }
      os << '\n';
    }
  }
}

void write_json(std::ostream& os, const ScanResult& res) {
  const auto& s = res.spec;
  nlohmann::json j;
  j["x_axis"] = to_string(s.x.axis);
  j["y_axis"] = to_string(s.y.axis);
  for (int ix = 0; ix < s.x.n; ++ix) j["x"].push_back(s.x.value(ix));
  for (int iy = 0; iy < s.y.n; ++iy) j["y"].push_back(s.y.value(iy));
  j["log10T"] = nlohmann::json::array();
  for (int iy = 0; iy < s.y.n; ++iy) {
    nlohmann::json row = nlohmann::json::array();
    for (int ix = 0; ix < s.x.n; ++ix) {
      const auto& c = res.at(ix, iy);
      if (c.hole) {
        row.push_back("hole:" + std::string(to_string(*c.hole)));
      } else {
        row.push_back(c.log10_T);
      }
    }
    j["log10T"].push_back(std::move(row));
  }
  os << j.dump(1) << '\n';
}

// gnuplot "nonuniform matrix": first row is nx then x values; each following
// row is y then the values. Holes are written as NaN.
void write_gnuplot(std::ostream& os, const ScanResult& res) {
  const auto& s = res.spec;
  os << "# x: " << to_string(s.x.axis) << "  y: " << to_string(s.y.axis) << "  z: log10T\n";
  os << s.x.n;
  for (int ix = 0; ix < s.x.n; ++ix) os << ' ' << fmt(s.x.value(ix));
  os << '\n';
  for (int iy = 0; iy < s.y.n; ++iy) {
    os << fmt(s.y.value(iy));
    for (int ix = 0; ix < s.x.n; ++ix) {
      const auto& c = res.at(ix, iy);
      os << ' ' << (c.hole ? std::string("NaN") : fmt(c.log10_T));
    }
    os << '\n';
  }
}

void write_csv(std::ostream& os, const StabilityEstimate& est) {
  os << "r,rho_opt,tau_tilde\n";
  for (const auto& row : est.per_order) {
    os << row.r << ',' << fmt(row.rho_opt) << ',' << fmt(row.tau_tilde) << '\n';
  }
}

}  // namespace cassini
