#include "cassini/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "cassini/birkhoff.hpp"
#include "cassini/integrate.hpp"
#include "cassini/stab.hpp"

namespace cassini {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

class Writer {
 public:
  Writer(const ParsedConfig& pc, Command cmd, std::ostream& log)
      : dir_(pc.cfg.output.directory), header_(provenance_line(cmd, pc)), log_(log) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io, "cli", "cannot create '" + dir_.string() + "': " + ec.message());
  }

  // '#'-commented provenance first, then the body.
  void text(const std::string& name, const std::string& body) { write(name, header_ + "\n" + body); }

  void json(const std::string& name, nlohmann::json j) {
    j["provenance"] = header_.substr(2);
    write(name, j.dump(1) + "\n");
  }

 private:
  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorKind::io, "cli", "cannot write '" + p.string() + "'");
    log_ << "  wrote " << p.string() << '\n';
  }

  fs::path dir_;
  std::string header_;
  std::ostream& log_;
};

// Pipeline results shared by the commands of one `all` run.
struct Session {
  const ParsedConfig& pc;
  std::ostream& log;
  std::optional<HamiltonianModel> model;
  std::optional<EquilibriumExpansion> expansion;
  std::optional<NormalForm> nf;

  const RunConfig& cfg() const { return pc.cfg; }

  const HamiltonianModel& get_model() {
    if (!model) model = assemble_hamiltonian(cfg().body, cfg().trunc);
    return *model;
  }
  const EquilibriumExpansion& get_expansion() {
    if (!expansion) expansion = expand_at_cassini(get_model(), cfg().trunc);
    return *expansion;
  }
  const NormalForm& get_nf() {
    if (!nf) {
      log << "normalizing to order " << cfg().r << " (sqrtU degree " << cfg().trunc.max_sqrtU_degree
          << ")\n";
      nf = normalize(get_expansion().aa.H0, cfg().r, cfg().stability.resonance_threshold);
    }
    return *nf;
  }
  WeightVector weights() {
    const auto& s = cfg().stability;
    return s.R ? *s.R : default_weights(get_expansion().aa.lin, s.libration_rad);
  }
};

nlohmann::json cmd_model(Session& s, Writer& w) {
  const auto& H = s.get_model();
  w.text("model.txt", H.to_text());
  const auto& d = H.derived();
  return {{"n_o_star", d.n_o_star}, {"delta1", d.delta1}, {"delta2", d.delta2},
          {"harmonics", H.potential().harmonics.size()}};
}

nlohmann::json cmd_equilibrium(Session& s, Writer& w) {
  const auto& E = s.get_expansion();
  const auto& st = E.state;
  const auto& lin = E.aa.lin;
  std::string body = "key,value\n";
  auto row = [&body](const char* k, double v) { body += std::string(k) + "," + fmt(v) + "\n"; };
  row("Sigma1_star", st.Sigma1_star);
  row("Sigma1_star_minus_1", st.Sigma1_star - 1.0);
  row("Sigma3_star", st.Sigma3_star);
  row("K_star", st.K_star);
  row("gradient_residual", st.gradient_residual);
  row("mu_s11", lin.mu.mu_s11);
  row("mu_s13", lin.mu.mu_s13);
  row("mu_s33", lin.mu.mu_s33);
  row("mu_S11", lin.mu.mu_S11);
  row("mu_S13", lin.mu.mu_S13);
  row("mu_S33", lin.mu.mu_S33);
  row("alpha", lin.alpha);
  row("beta", lin.beta);
  row("U1_star", lin.U1_star);
  row("U3_star", lin.U3_star);
  row("omega1", lin.omega1);
  row("omega3", lin.omega3);
  w.text("equilibrium.csv", body);
  w.text("H0.txt", to_text(E.aa.H0));
  std::string counts = "degree,terms\n";
  const auto c = term_counts(E.aa.H0);
  for (std::size_t d = 2; d < c.size(); ++d) counts += std::to_string(d) + "," + std::to_string(c[d]) + "\n";
  w.text("H0_counts.csv", counts);
  return {{"Sigma1_star_minus_1", st.Sigma1_star - 1.0}, {"Sigma3_star", st.Sigma3_star},
          {"gradient_residual", st.gradient_residual}, {"alpha", lin.alpha}, {"beta", lin.beta},
          {"U_star", {lin.U1_star, lin.U3_star}}, {"omega", {lin.omega1, lin.omega3}},
          {"H0_counts", c}};
}

nlohmann::json cmd_normalform(Session& s, Writer& w) {
  const auto& nf = s.get_nf();
  const auto h0 = term_counts(s.get_expansion().aa.H0);
  const auto hr = term_counts(nf.H);
  std::string counts = "degree,H0_terms,Hr_terms\n";
  for (std::size_t d = 2; d < h0.size(); ++d) {
    counts += std::to_string(d) + "," + std::to_string(h0[d]) + "," +
              std::to_string(d < hr.size() ? hr[d] : 0) + "\n";
  }
  w.text("normalform_counts.csv", counts);
  std::string steps = "order,Z_terms,chi_terms,first_remainder_terms,homological_residual\n";
  for (int r = 0; r <= nf.order; ++r) {
    steps += std::to_string(r) + "," + std::to_string(nf.Z[r].size()) + "," +
             std::to_string(nf.chi[r].size()) + "," + std::to_string(nf.first_remainder[r].size()) +
             "," + fmt(nf.homological_residual[r]) + "\n";
  }
  w.text("normalform_steps.csv", steps);
  char name[32];
  for (int r = 0; r <= nf.order; ++r) {
    if (!nf.Z[r].empty()) {
      std::snprintf(name, sizeof name, "normalform/Z_%02d.txt", r);
      w.text(name, to_text(nf.Z[r]));
    }
    if (!nf.chi[r].empty()) {
      std::snprintf(name, sizeof name, "normalform/chi_%02d.txt", r);
      w.text(name, to_text(nf.chi[r]));
    }
  }
  w.text("normalform/remainder.txt", to_text(nf.remainder()));
  std::string div = "k1,k3,divisor,degree\n";
  for (const auto& e : nf.divisor_log.entries) {
    div += std::to_string(e.k1) + "," + std::to_string(e.k3) + "," + fmt(e.divisor) + "," +
           std::to_string(e.degree) + "\n";
  }
  w.text("divisors.csv", div);
  double max_res = 0.0;
  for (double v : nf.homological_residual) max_res = std::max(max_res, v);
  return {{"order", nf.order}, {"min_abs_divisor", nf.divisor_log.min_abs_divisor},
          {"max_homological_residual", max_res}, {"Hr_counts", hr}};
}

nlohmann::json cmd_stability(Session& s, Writer& w) {
  const auto& cfg = s.cfg();
  const auto& nf = s.get_nf();
  const auto R = s.weights();
  const auto& sc = cfg.stability;
  const auto est = effective_stability_time(nf, sc.rho0, R, sc.c, nf.order, sc.variant);
  std::ostringstream table;
  write_csv(table, est);
  w.text("stability_table.csv", table.str());

  std::vector<int> orders;
  for (int o : sc.curve_orders) {
    if (o <= nf.order) {
      orders.push_back(o);
    } else {
      s.log << "  curve order " << o << " skipped (normal form order " << nf.order << ")\n";
    }
  }
  std::string curve = "rho0,log10T,r_opt";
  for (int o : orders) curve += ",log10T_r" + std::to_string(o);
  curve += "\n";
  for (int k = 0; k < sc.rho0_points; ++k) {
    const double rho0 = sc.rho0_min + (sc.rho0_max - sc.rho0_min) * k / (sc.rho0_points - 1);
    const auto e = effective_stability_time(nf, rho0, R, sc.c, nf.order, sc.variant);
    curve += fmt(rho0) + "," + fmt(std::log10(e.T)) + "," + std::to_string(e.r_opt);
    for (int o : orders) {
      curve += "," + fmt(std::log10(effective_stability_time(nf, rho0, R, sc.c, o, sc.variant).T));
    }
    curve += "\n";
  }
  w.text("stability_curve.csv", curve);
  return {{"rho0", est.rho0}, {"R", {R.R1, R.R3}}, {"c", est.c}, {"variant", to_string(est.variant)},
          {"T_years", est.T}, {"log10T", std::log10(est.T)}, {"r_opt", est.r_opt}};
}

ScanSpec make_scan_spec(const RunConfig& cfg) {
  ScanSpec sp;
  sp.x = cfg.scan.x;
  sp.y = cfg.scan.y;
  sp.base = cfg.body;
  sp.pipeline.trunc = {cfg.scan.sqrtU_degree, cfg.scan.sqrtU_degree, cfg.trunc.max_ecc_degree};
  sp.pipeline.r = cfg.scan.r;
  sp.pipeline.resonance_threshold = cfg.stability.resonance_threshold;
  sp.rho0 = cfg.stability.rho0;
  sp.c = cfg.stability.c;
  sp.R = cfg.stability.R;
  sp.libration = cfg.stability.libration_rad;
  sp.variant = cfg.stability.variant;
  sp.threads = cfg.scan.threads;
  return sp;
}

nlohmann::json cmd_scan(Session& s, Writer& w) {
  const auto& cfg = s.cfg();
  const auto spec = make_scan_spec(cfg);
  s.log << "scanning " << spec.x.n << "x" << spec.y.n << " grid (" << to_string(spec.x.axis) << " vs "
        << to_string(spec.y.axis) << ", r = " << spec.pipeline.r << ")\n";
  const auto res = parameter_scan(spec);
  std::ostringstream os;
  int holes = 0;
  for (const auto& c : res.cells) holes += c.hole ? 1 : 0;
  if (cfg.output.format == "json") {
    write_json(os, res);
    w.json("scan.json", nlohmann::json::parse(os.str()));
  } else if (cfg.output.format == "gnuplot") {
    write_gnuplot(os, res);
    w.text("scan.dat", os.str());
  } else {
    write_csv(os, res);
    w.text("scan.csv", os.str());
  }
  return {{"nx", spec.x.n}, {"ny", spec.y.n}, {"holes", holes}};
}

nlohmann::json cmd_check_integrate(Session& s, Writer& w) {
  const auto& cfg = s.cfg();
  const auto& ic = cfg.integrate;
  PipelineSettings ps;
  ps.trunc = {ic.sqrtU_degree, ic.sqrtU_degree, cfg.trunc.max_ecc_degree};
  ps.r = ic.r;
  ps.resonance_threshold = cfg.stability.resonance_threshold;
  const auto res = run_pipeline(cfg.body, ps);
  const auto& lin = res.expansion.aa.lin;
  IntegrationSettings is;
  is.t_span = ic.t_span_years;
  is.n_samples = ic.samples;
  is.rho0 = cfg.stability.rho0;
  is.rho_opt = optimal_rho(is.rho0, ic.r, cfg.stability.variant);
  is.R = cfg.stability.R ? *cfg.stability.R : default_weights(lin, cfg.stability.libration_rad);
  is.rtol = ic.rtol;
  is.seed = ic.seed;
  s.log << "integrating " << ic.samples << " samples over " << ic.t_span_years << " years\n";
  const auto rep = check_integrate(res.expansion.untangled.q, lin, is, &res.nf, ic.r);
  std::string body = "sample,U1,U3,u1,u3,max_ratio,max_ratio_original,energy_drift,steps\n";
  for (std::size_t k = 0; k < rep.samples.size(); ++k) {
    const auto& o = rep.samples[k];
    body += std::to_string(k) + "," + fmt(o.start.U1) + "," + fmt(o.start.U3) + "," + fmt(o.start.u1) +
            "," + fmt(o.start.u3) + "," + fmt(o.max_ratio) + "," + fmt(o.max_ratio_original) + "," +
            fmt(o.energy_drift) + "," + std::to_string(o.steps) + "\n";
  }
  w.text("integrate.csv", body);
  return {{"order", ic.r}, {"rho0", is.rho0}, {"rho_opt", is.rho_opt}, {"max_ratio", rep.max_ratio},
          {"max_energy_drift", rep.max_energy_drift}, {"inside", rep.max_ratio < 1.0}};
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::model: return "model";
    case Command::equilibrium: return "equilibrium";
    case Command::normalform: return "normalform";
    case Command::stability: return "stability";
    case Command::scan: return "scan";
    case Command::check_integrate: return "check-integrate";
    case Command::all: return "all";
  }
  return "?";
}

Command command_from_string(std::string_view s) {
  for (Command c : {Command::model, Command::equilibrium, Command::normalform, Command::stability,
                    Command::scan, Command::check_integrate, Command::all}) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorKind::config, "cli", "unknown command '" + std::string(s) + "'");
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 3;
    case ErrorKind::io: return 4;
    case ErrorKind::domain: return 10;
    case ErrorKind::singular_derivative: return 11;
    case ErrorKind::numeric: return 12;
    case ErrorKind::equilibrium_not_found: return 13;
    case ErrorKind::inconsistent_equilibrium: return 14;
    case ErrorKind::untangling_failed: return 15;
    case ErrorKind::not_elliptic: return 16;
    case ErrorKind::resonance: return 17;
    case ErrorKind::degenerate_estimate: return 18;
    case ErrorKind::integration: return 19;
  }
  return 1;
}

std::string provenance_line(Command cmd, const ParsedConfig& pc) {
  return "# cassini-stab " + std::string(kToolVersion) + " command=" + std::string(to_string(cmd)) +
         " config=" + config_hash(pc);
}

nlohmann::json run_command(Command cmd, const ParsedConfig& pc, std::ostream& log) {
  Session s{pc, log, {}, {}, {}};
  Writer w(pc, cmd, log);
  nlohmann::json out;
  auto step = [&](Command c, auto fn) {
    if (cmd == c || cmd == Command::all) {
      log << to_string(c) << '\n';
      out[std::string(to_string(c))] = fn(s, w);
    }
  };
  step(Command::model, cmd_model);
  step(Command::equilibrium, cmd_equilibrium);
  step(Command::normalform, cmd_normalform);
  step(Command::stability, cmd_stability);
  step(Command::scan, cmd_scan);
  step(Command::check_integrate, cmd_check_integrate);
  return out;
}

}  // namespace cassini
