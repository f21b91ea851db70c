// Acceptance run for the Titan application: one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cassini/birkhoff.hpp"
#include "cassini/equil.hpp"
#include "cassini/errors.hpp"
#include "cassini/integrate.hpp"
#include "cassini/model.hpp"
#include "cassini/orbexp.hpp"
#include "cassini/pseries.hpp"
#include "cassini/stab.hpp"
#include "random_series.hpp"

using namespace cassini;
using Clock = std::chrono::steady_clock;

namespace {

int g_failed = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Collects the worst relative error over a list of fixtures.
struct Fixtures {
  double worst = 0.0;
  std::string worst_name;
  int n = 0;

  void add(const std::string& name, double got, double want) {
    double e = rel_err(got, want);
    if (std::isnan(e)) e = INFINITY;
    if (n++ == 0 || e > worst) {
      worst = e;
      worst_name = name + " got " + fmt(got);
    }
  }
  static std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4e", x);
    return buf;
  }
};

std::string sci(double x, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

const TruncationPolicy kTrunc16{16, 16, 8};

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  const auto v = averaged_potential(titan_params(), kTrunc16);
  const double secs = seconds_since(t0);
  Fixtures fx;
  auto slot = [&](int k1, int k3, int s) {
    const Harmonic* h = v.find(k1, k3);
    return h ? to_cos_basis(h->coeff)[s] : 0.0;
  };
  // Basis slots: 0 -> 1, 1 -> cK, 2 -> cK^2, 3 -> sK, 4 -> sK cK.
  // a cK^2 + b sK^2 = b + (a - b) cK^2. The constant slot also carries an
  // additive constant that is not printed, so only a - b is comparable.
  fx.add("cos^2 K - sin^2 K", slot(0, 0, 2), -1.01e-2 - -3.13e-7);
  fx.add("cos s3 cK sK", slot(0, 1, 4), -1.12e-4);
  fx.add("cos 2s1", slot(2, 0, 0), -3.14e-3);
  fx.add("cos 2s1 cK", slot(2, 0, 1), -6.29e-3);
  fx.add("cos 2s1 cK^2", slot(2, 0, 2), -3.14e-3);
  fx.add("cos 2s3 cK^2", slot(0, 2, 2), 1.56e-7);
  fx.add("cos 2s3", slot(0, 2, 0), -1.56e-7);
  fx.add("cos(2s1+s3) cK sK", slot(2, 1, 4), -3.51e-5);
  fx.add("cos(2s1+s3) sK", slot(2, 1, 3), -3.51e-5);
  // 4.90e-8 cK^2 - 9.79e-8 sK^2 - 4.90e-8 = -1.469e-7 + 1.469e-7 cK^2
  fx.add("cos(2s1+2s3)", slot(2, 2, 0), -4.90e-8 - 9.79e-8);
  fx.add("cos(2s1+2s3) cK^2", slot(2, 2, 2), 4.90e-8 + 9.79e-8);
  fx.add("cos(2s1+3s3) cK sK", slot(2, 3, 4), 2.73e-10);
  fx.add("cos(2s1+3s3) sK", slot(2, 3, 3), -2.73e-10);
  fx.add("cos(2s1+4s3)", slot(2, 4, 0), -1.91e-13);
  fx.add("cos(2s1+4s3) cK", slot(2, 4, 1), 2 * 1.91e-13);
  fx.add("cos(2s1+4s3) cK^2", slot(2, 4, 2), -1.91e-13);
  report(1, fx.worst <= 0.01 && secs < 30.0,
         std::to_string(fx.n) + " coefficients, worst rel err " + sci(fx.worst, 2) + " (" +
             fx.worst_name + "), " + sci(secs, 2) + " s");
}

struct TitanExpansion {
  HamiltonianModel model;
  EquilibriumExpansion ex;
};

TitanExpansion titan_expansion() {
  auto model = assemble_hamiltonian(titan_params(), kTrunc16);
  auto ex = expand_at_cassini(model, kTrunc16);
  return {std::move(model), std::move(ex)};
}

void criterion2(const TitanExpansion& t) {
  const auto& lin = t.ex.aa.lin;
  Fixtures loose, tight;
  loose.add("sigma1^2", lin.mu.mu_s11, 2.52e-2);
  loose.add("sigma1 sigma3", lin.mu.mu_s13, 1.08e-6);
  loose.add("sigma3^2", lin.mu.mu_s33, 7.00e-7);
  loose.add("Sigma1^2", lin.mu.mu_S11, 7.20e1);
  loose.add("Sigma1 Sigma3", lin.mu.mu_S13, -2.08e-2);
  loose.add("Sigma3^2", lin.mu.mu_S33, 2.01e2);
  loose.add("alpha", lin.alpha, -8.46e-5);
  loose.add("beta", lin.beta, 2.14e-5);
  tight.add("U1*", lin.U1_star, 5.348e1);
  tight.add("U3*", lin.U3_star, 1.696e4);
  tight.add("omega1", lin.omega1, 2.690);
  tight.add("omega3", lin.omega3, 2.375e-2);
  report(2, loose.worst <= 0.01 && tight.worst <= 0.005,
         "quadratic/alpha/beta worst " + sci(loose.worst, 2) + " (" + loose.worst_name +
             "), U*/omega worst " + sci(tight.worst, 2) + " (" + tight.worst_name + ")");
}

void criterion3(const TitanExpansion& t) {
  const auto& st = t.ex.state;
  Fixtures fx;
  fx.add("Sigma1*-1", st.Sigma1_star - 1.0, 1.829e-9);
  fx.add("Sigma3*", st.Sigma3_star, 2.947e-5);
  report(3, fx.worst <= 0.01 && st.gradient_residual <= 1e-12,
         "Sigma1*-1 = " + sci(st.Sigma1_star - 1.0) + ", Sigma3* = " + sci(st.Sigma3_star) +
             ", worst rel err " + sci(fx.worst, 2) + ", gradient residual " +
             sci(st.gradient_residual, 2));
}

void criterion4(const TitanExpansion& t) {
  const auto& H0 = t.ex.aa.H0;
  struct Ref {
    int m1, m3, k1, k3;
    double c;
    const char* name;
  };
  const Ref refs[] = {
      {3, 0, 1, 0, 2.86e-7, "cos u1 U1^3/2"},
      {3, 0, 3, 0, -2.87e-7, "cos 3u1 U1^3/2"},
      {2, 1, 2, -1, 1.98e-3, "cos(2u1-u3) U1 U3^1/2"},
      {2, 1, 0, 1, -3.99e-3, "cos u3 U1 U3^1/2"},
      {2, 1, 2, 1, 2.01e-3, "cos(2u1+u3) U1 U3^1/2"},
      {1, 2, 1, 0, -3.97e-3, "cos u1 U1^1/2 U3"},
      {1, 2, 1, -2, 9.29e-2, "cos(u1-2u3) U1^1/2 U3"},
      {1, 2, 1, 2, -9.62e-2, "cos(u1+2u3) U1^1/2 U3"},
      {0, 3, 0, 1, -2.19, "cos u3 U3^3/2"},
      {0, 3, 0, 3, -2.19, "cos 3u3 U3^3/2"},
  };
  Fixtures fx;
  for (const auto& r : refs) {
    PoissonKey k{r.m1, r.m3, TrigKind::cos, r.k1, r.k3};
    const int sign = canonicalize(k);
    fx.add(r.name, sign * H0.coeff(k), r.c);
  }
  const auto block = H0.degree_block(3);
  report(4, fx.worst <= 0.01 && block.size() == 10,
         "10 cubic coefficients, worst rel err " + sci(fx.worst, 2) + " (" + fx.worst_name +
             "), degree-3 block has " + std::to_string(block.size()) + " terms");
}

void criterion5(const TitanExpansion& t) {
  const std::vector<std::size_t> want{2, 10, 19, 28, 44, 54, 70, 84, 93, 105, 112, 125, 130, 143, 145};
  auto counts = term_counts(t.ex.aa.H0);
  counts.resize(17, 0);
  std::vector<std::size_t> got(counts.begin() + 2, counts.begin() + 17);
  std::string s = "orders 2-16 counts:";
  int mismatches = 0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    s += " " + std::to_string(got[k]);
    if (got[k] != want[k]) ++mismatches;
  }
  s += " (" + std::to_string(mismatches) + " of 15 orders differ from the reference)";
  report(5, mismatches == 0, s);
}

void criterion6(const TitanExpansion& t) {
  const auto t0 = Clock::now();
  const auto nf = normalize(t.ex.aa.H0, 12);
  const double secs = seconds_since(t0);
  bool ok = true;
  std::string bad;
  for (std::size_t s = 0; s < nf.Z.size(); ++s) {
    const int deg = static_cast<int>(s) + 2;
    const auto& Z = nf.Z[s];
    for (const auto& term : Z.terms()) {
      if (!term.key.angle_free() || term.key.degree() != deg) {
        ok = false;
        bad += " Z" + std::to_string(deg) + " has an angle or off-degree term;";
      }
    }
    const std::size_t want = deg % 2 == 0 ? deg / 2 + 1 : 0;
    if (Z.size() != want) {
      ok = false;
      bad += " degree " + std::to_string(deg) + " has " + std::to_string(Z.size()) + " terms;";
    }
  }
  double worst_res = 0.0;
  for (double r : nf.homological_residual) worst_res = std::max(worst_res, r);
  ok = ok && worst_res <= 1e-13 && nf.Z.size() >= 13;
  report(6, ok,
         "Z blocks of degree 2..14 " + std::string(bad.empty() ? "have r'+1 terms in even degrees, none in odd" : bad) +
             ", max homological residual " + sci(worst_res, 2) + ", normalize " + sci(secs, 2) + " s");
}

// Independent Kepler solver for the oracle.
void kepler_sample(double e, double l, double& a_r3, double& cv, double& sv) {
  double E = l + e * std::sin(l);
  for (int it = 0; it < 60; ++it) {
    const double d = (E - e * std::sin(E) - l) / (1.0 - e * std::cos(E));
    E -= d;
    if (std::abs(d) < 1e-16) break;
  }
  const double den = 1.0 - e * std::cos(E);
  a_r3 = 1.0 / (den * den * den);
  cv = (std::cos(E) - e) / den;
  sv = std::sqrt(1.0 - e * e) * std::sin(E) / den;
}

void criterion7() {
  const double e = 0.0289;
  const auto x = kepler_expansions(8);
  const int n = 1024;
  std::vector<double> f[3];
  for (auto& v : f) v.resize(n);
  for (int j = 0; j < n; ++j) {
    kepler_sample(e, 2.0 * std::numbers::pi * j / n, f[0][j], f[1][j], f[2][j]);
  }
  const EccExpansion* ser[3] = {&x.a_over_r_cubed, &x.cos_v, &x.sin_v};
  double worst = 0.0;
  int compared = 0;
  for (int q = 0; q < 3; ++q) {
    const int kmax = ser[q]->max_harmonic() + 3;
    for (int k = 0; k <= kmax; ++k) {
      for (TrigKind kind : {TrigKind::cos, TrigKind::sin}) {
        if (k == 0 && kind == TrigKind::sin) continue;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
          const double arg = 2.0 * std::numbers::pi * k * j / n;
          acc += f[q][j] * (kind == TrigKind::cos ? std::cos(arg) : std::sin(arg));
        }
        const double dft = acc * (k == 0 ? 1.0 : 2.0) / n;
        worst = std::max(worst, std::abs(ser[q]->fourier(e, k, kind) - dft));
        ++compared;
      }
    }
  }
  const double mean = x.a_over_r_cubed.fourier(e, 0, TrigKind::cos);
  const double mean_err = std::abs(mean - std::pow(1.0 - e * e, -1.5));
  report(7, worst <= 1e-10 && mean_err <= 1e-12,
         std::to_string(compared) + " Fourier coefficients, max abs err " + sci(worst, 2) +
             ", mean (a/r)^3 err " + sci(mean_err, 2));
}

double golden_max(double lo, double hi, const std::function<double(double)>& f) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 300 && b - a > 1e-15 * b; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

void criterion8() {
  // Timing of the short suite: r = 12 at degree 16, through the estimate.
  auto t0 = Clock::now();
  {
    PipelineSettings ps;
    ps.trunc = kTrunc16;
    ps.r = 12;
    const auto res = run_pipeline(titan_params(), ps);
    effective_stability_time(res.nf, 1.0, default_weights(res.expansion.aa.lin), 2.0, 12);
  }
  const double secs12 = seconds_since(t0);

  t0 = Clock::now();
  PipelineSettings ps;
  ps.trunc = {33, 33, 8};
  ps.r = 30;
  const auto res = run_pipeline(titan_params(), ps);
  const WeightVector R = default_weights(res.expansion.aa.lin, 0.1);
  const double c = 2.0;
  const auto at1 = effective_stability_time(res.nf, 1.0, R, c, 30);
  const double secs30 = seconds_since(t0);

  const int orders[] = {10, 20, 30};
  const int np = 50;
  std::vector<double> rho0(np);
  for (int k = 0; k < np; ++k) rho0[k] = 0.1 + (5.0 - 0.1) * k / (np - 1);
  std::vector<std::vector<double>> logT(3, std::vector<double>(np));
  for (int q = 0; q < 3; ++q) {
    for (int k = 0; k < np; ++k) {
      logT[q][k] = std::log10(effective_stability_time(res.nf, rho0[k], R, c, orders[q]).T);
    }
  }
  bool mono = true;
  for (int q = 0; q < 3; ++q) {
    for (int k = 1; k < np; ++k) mono = mono && logT[q][k] <= logT[q][k - 1] + 1e-12;
  }
  // r = 30 above r = 20 above r = 10 for rho0 <= 1
  bool ordered = true;
  for (int k = 0; k < np && rho0[k] <= 1.0 + 1e-12; ++k) {
    ordered = ordered && logT[2][k] > logT[1][k] && logT[1][k] > logT[0][k];
  }
  const bool age = at1.T > 1.38e10;

  double worst_tau = 0.0;
  for (const auto& row : at1.per_order) {
    if (!std::isfinite(row.tau_tilde)) continue;
    auto tau = [&](double rho) { return escape_time_tau(1.0, rho, row.r, row.rem_norm, c); };
    const double rho_num = golden_max(1.0 + 1e-9, 10.0, tau);
    worst_tau = std::max(worst_tau, rel_err(tau(optimal_rho(1.0, row.r)), tau(rho_num)));
  }
  const bool closed_form = worst_tau <= 1e-10;

  report(8, mono && ordered && age && closed_form && secs30 < 600.0 && secs12 < 60.0,
         std::string("(a) nonincreasing ") + (mono ? "yes" : "no") + "; (b) r=30>r=20>r=10 for rho0<=1 " +
             (ordered ? "yes" : "no") + "; (c) T(rho0=1) = " + sci(at1.T, 2) + " yr, r_opt " +
             std::to_string(at1.r_opt) + "; (d) closed-form tau rel err " + sci(worst_tau, 2) +
             "; r=30/degree-33 pipeline " + sci(secs30, 2) + " s, r=12/degree-16 " + sci(secs12, 2) +
             " s");
}

// Fraction of grid lines along which the least-squares slope of log10 T has
// the expected sign. along_x: lines of constant y, varying x.
double trend_fraction(const ScanResult& s, bool along_x, double sign) {
  const int n_lines = along_x ? s.spec.y.n : s.spec.x.n;
  const int n_pts = along_x ? s.spec.x.n : s.spec.y.n;
  int good = 0;
  for (int l = 0; l < n_lines; ++l) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool hole = false;
    for (int p = 0; p < n_pts; ++p) {
      const auto& cell = along_x ? s.at(p, l) : s.at(l, p);
      if (cell.hole) hole = true;
      const double x = along_x ? s.spec.x.value(p) : s.spec.y.value(p);
      sx += x;
      sy += cell.log10_T;
      sxx += x * x;
      sxy += x * cell.log10_T;
    }
    const double slope = (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx);
    if (!hole && slope * sign > 0.0) ++good;
  }
  return static_cast<double>(good) / n_lines;
}

void criterion9() {
  const auto t0 = Clock::now();
  struct Map {
    AxisRange x, y;
    double sx, sy;  // expected slope signs along x and y
  };
  const AxisRange ai{ScanAxis::i, 0.004, 0.016, 20};
  const AxisRange ao{ScanAxis::Omega_dot, -0.016, -0.006, 20};
  const AxisRange ac{ScanAxis::C_norm, 0.3, 0.4, 20};
  // T grows with i, falls with C_norm and with |Omega_dot| (Omega_dot < 0).
  const Map maps[] = {{ai, ao, +1, +1}, {ai, ac, +1, -1}, {ac, ao, -1, +1}};
  std::string detail;
  bool ok = true;
  for (const auto& m : maps) {
    ScanSpec spec;
    spec.x = m.x;
    spec.y = m.y;
    spec.base = titan_params();
    spec.pipeline.trunc = {11, 11, 8};
    spec.pipeline.r = 8;
    const auto res = parameter_scan(spec);
    const double fx = trend_fraction(res, true, m.sx);
    const double fy = trend_fraction(res, false, m.sy);
    ok = ok && fx >= 0.9 && fy >= 0.9;
    detail += std::string(to_string(m.x.axis)) + "-" + std::string(to_string(m.y.axis)) + " map: along " +
              std::string(to_string(m.x.axis)) + " " + sci(fx, 2) + ", along " +
              std::string(to_string(m.y.axis)) + " " + sci(fy, 2) + "; ";
  }
  report(9, ok, detail + "scans " + sci(seconds_since(t0), 2) + " s");
}

void criterion10() {
  const auto t0 = Clock::now();
  PipelineSettings ps;
  ps.trunc = {11, 11, 8};
  ps.r = 8;
  const auto res = run_pipeline(titan_params(), ps);
  const auto& lin = res.expansion.aa.lin;
  IntegrationSettings is;
  is.t_span = 1e4;
  is.n_samples = 16;
  is.rho0 = 1.0;
  is.rho_opt = optimal_rho(is.rho0, ps.r);
  is.R = default_weights(lin, 0.1);
  const auto rep = check_integrate(res.expansion.untangled.q, lin, is, &res.nf, ps.r);
  double worst_orig = 0.0;
  for (const auto& o : rep.samples) worst_orig = std::max(worst_orig, o.max_ratio_original);
  report(10, rep.max_ratio < 1.0 && rep.max_energy_drift <= 1e-10,
         "16 samples over 1e4 yr, rho0 1, rho_opt " + sci(is.rho_opt, 3) + ": max normalized action ratio " +
             sci(rep.max_ratio, 4) + " (original actions " + sci(worst_orig, 3) + "), energy drift " +
             sci(rep.max_energy_drift, 2) + ", " + sci(seconds_since(t0), 2) + " s");
}

// Relative closeness of two series in the unit-weight majorant norm.
double series_diff(const PoissonSeries& a, const PoissonSeries& b, double scale) {
  const WeightVector one{1.0, 1.0};
  return weighted_norm(a - b, one) / std::max(scale, 1e-300);
}

void criterion11() {
  std::mt19937_64 rng(1729);
  const TruncationPolicy big{64, 64, 8};
  const WeightVector one{1.0, 1.0};
  std::uniform_real_distribution<double> wdist(0.1, 3.0);
  const int cases = 1000;
  int passed = 0;
  std::string first_failure;
  for (int c = 0; c < cases; ++c) {
    using cassini::testing::random_series;
    const auto f = random_series(rng, 6, 6, big);
    const auto g = random_series(rng, 6, 6, big);
    const auto h = random_series(rng, 6, 6, big);
    const WeightVector R{wdist(rng), wdist(rng)};
    const double nf = weighted_norm(f, one), ng = weighted_norm(g, one), nh = weighted_norm(h, one);
    const double tol = 1e-12;
    std::string fail;
    auto need = [&](bool cond, const char* what) {
      if (!cond && fail.empty()) fail = what;
    };
    try {
      const auto fg = multiply(f, g, big);
      need(series_diff(fg, multiply(g, f, big), nf * ng) <= tol, "commutativity");
      need(series_diff(multiply(fg, h, big), multiply(f, multiply(g, h, big), big), nf * ng * nh) <= tol,
           "associativity");
      need(series_diff(multiply(f, g + h, big), fg + multiply(f, h, big), nf * (ng + nh)) <= tol,
           "distributivity");
      need((f + (-f)).empty() || weighted_norm(f + (-f), one) == 0.0, "additive inverse");
      need(multiply(f, PoissonSeries::constant(1.0, big), big) == f, "multiplicative identity");

      const auto bfg = poisson_bracket(f, g, big);
      need(series_diff(bfg, -poisson_bracket(g, f, big), nf * ng) <= tol, "bracket antisymmetry");
      const auto lhs = poisson_bracket(fg, h, big);
      const auto rhs = multiply(f, poisson_bracket(g, h, big), big) + multiply(poisson_bracket(f, h, big), g, big);
      need(series_diff(lhs, rhs, nf * ng * nh) <= 1e2 * tol, "Leibniz rule");
      const auto jac = poisson_bracket(f, poisson_bracket(g, h, big), big) +
                       poisson_bracket(g, poisson_bracket(h, f, big), big) +
                       poisson_bracket(h, bfg, big);
      need(weighted_norm(jac, one) <= 1e3 * tol * nf * ng * nh, "Jacobi identity");

      need(weighted_norm(fg, R) <= weighted_norm(f, R) * weighted_norm(g, R) * (1 + 1e-14),
           "majorant submultiplicativity");

      need(series_from_text(to_text(f), big) == f, "text round trip");
      need(series_from_json(nlohmann::json::parse(to_json(f).dump()), big) == f, "json round trip");
    } catch (const Error& e) {
      fail = std::string("exception ") + e.what();
    }
    if (fail.empty()) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = "; case " + std::to_string(c) + ": " + fail;
    }
  }
  report(11, passed == cases, std::to_string(passed) + "/" + std::to_string(cases) + " randomized cases" + first_failure);
}

template <class F>
void guarded(int id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  guarded(1, criterion1);
  std::optional<TitanExpansion> t;
  try {
    t = titan_expansion();
  } catch (const std::exception& e) {
    for (int id = 2; id <= 6; ++id) report(id, false, std::string("error: ") + e.what());
  }
  if (t) {
    guarded(2, [&] { criterion2(*t); });
    guarded(3, [&] { criterion3(*t); });
    guarded(4, [&] { criterion4(*t); });
    guarded(5, [&] { criterion5(*t); });
    guarded(6, [&] { criterion6(*t); });
  }
  guarded(7, criterion7);
  guarded(8, criterion8);
  guarded(9, criterion9);
  guarded(10, criterion10);
  guarded(11, criterion11);
  std::printf("%d of 11 criteria failed, %.0f s total\n", g_failed, seconds_since(t0));
  return g_failed == 0 ? 0 : 1;
}
