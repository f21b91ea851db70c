#include "cassini/equil.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "cassini/errors.hpp"

namespace cassini {

CassiniState solve_cassini(const HamiltonianModel& H, int max_iter, double tol) {
  const auto& p = H.params();
  const double n = p.n_o;
  double S1 = 1.0, S3 = 1.0 - std::cos(p.i);
  // At i = 0 the zero-obliquity state is an equilibrium by symmetry. It sits at
  // the polar origin of the (Sigma3, sigma3) pair, where dH/dSigma3 need not
  // vanish, so only Sigma1 is solved for.
  const bool origin = S3 == 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    auto g = H.gradient(S1, S3, 0.0, 0.0);
    if (origin) g[1] = 0.0;
    const double res = std::max(std::abs(g[0]), std::abs(g[1])) / n;
    if (res <= tol) {
      CassiniState st;
      st.Sigma1_star = S1;
      st.Sigma3_star = S3;
      st.K_star = std::acos(1.0 - S3 / S1);
      st.gradient_residual = res;
      st.iterations = it;
      return st;
    }
    const Poly4 q = H.expand_about(S1, S3, 2);
    const double h11 = 2.0 * q.coeff({2, 0, 0, 0}), h12 = q.coeff({1, 1, 0, 0}),
                 h22 = 2.0 * q.coeff({0, 2, 0, 0});
    double d1 = 0.0, d3 = 0.0;
    const double det = h11 * h22 - h12 * h12;
    if (origin) {
      if (h11 == 0.0) break;
      d1 = -g[0] / h11;
    } else if (det != 0.0 && std::isfinite(det)) {
      d1 = -(h22 * g[0] - h12 * g[1]) / det;
      d3 = -(h11 * g[1] - h12 * g[0]) / det;
    } else {
      // Degenerate direction: only move along coordinates with curvature.
      if (h11 != 0.0) d1 = -g[0] / h11;
      if (h22 != 0.0) d3 = -g[1] / h22;
      if ((h11 == 0.0 && g[0] != 0.0) || (h22 == 0.0 && g[1] != 0.0)) break;
    }
    // Keep the obliquity in its chart.
    double lam = 1.0;
    while (S3 + lam * d3 < 0.0 && lam > 1e-6) lam *= 0.5;
    S1 += lam * d1;
    S3 = std::max(0.0, S3 + lam * d3);
    if (!std::isfinite(S1) || !std::isfinite(S3) || S1 <= 0.0) break;
  }
  throw Error(ErrorKind::equilibrium_not_found, "equil",
              "Newton iteration for the Cassini state did not converge");
}

Poly4 taylor_expand(const HamiltonianModel& H, const CassiniState& eq, TruncationPolicy trunc) {
  trunc.validate();
  const Poly4 full = H.expand_about(eq.Sigma1_star, eq.Sigma3_star, trunc.max_poly_degree);
  const double tol = 1e-12 * std::max(1.0, H.params().n_o);
  std::vector<Poly4Term> kept;
  kept.reserve(full.size());
  for (const auto& t : full.terms()) {
    const int d = t.degree();
    if (d == 0) continue;
    if (d == 1) {
      if (std::abs(t.coeff) > tol) {
        throw Error(ErrorKind::inconsistent_equilibrium, "equil",
                    "linear term " + std::to_string(t.coeff) + " does not vanish at the equilibrium");
      }
      continue;
    }
    kept.push_back(t);
  }
  return Poly4::from_terms(kept, trunc);
}

QuadraticPart quadratic_part(const Poly4& q) {
  QuadraticPart m;
  m.mu_S11 = q.coeff({2, 0, 0, 0});
  m.mu_S13 = q.coeff({1, 1, 0, 0});
  m.mu_S33 = q.coeff({0, 2, 0, 0});
  m.mu_s11 = q.coeff({0, 0, 2, 0});
  m.mu_s13 = q.coeff({0, 0, 1, 1});
  m.mu_s33 = q.coeff({0, 0, 0, 2});
  return m;
}

std::array<std::array<double, 4>, 4> untangling_jacobian(double a, double b) {
  return {{{1.0 - a * b, -a, 0.0, 0.0},
           {b, 1.0, 0.0, 0.0},
           {0.0, 0.0, 1.0, -b},
           {0.0, 0.0, a, 1.0 - a * b}}};
}

Untangled untangle(const Poly4& q) {
  const QuadraticPart m = quadratic_part(q);
  // Conditions use the symmetric-matrix off-diagonal, half the monomial coefficient.
  const double s11 = m.mu_s11, s13 = 0.5 * m.mu_s13, s33 = m.mu_s33;
  const double S11 = m.mu_S11, S13 = 0.5 * m.mu_S13, S33 = m.mu_S33;
  const double scale_s = std::max({std::abs(s11), std::abs(s33)});
  const double scale_S = std::max({std::abs(S11), std::abs(S33)});
  if (scale_s == 0.0 || scale_S == 0.0) {
    throw Error(ErrorKind::untangling_failed, "equil", "degenerate quadratic part");
  }
  double a = 0.0, b = 0.0;
  bool ok = false;
  for (int it = 0; it < 100; ++it) {
    const double F1 = b * s11 - (1 - 2 * a * b) * s13 - a * (1 - a * b) * s33;
    const double F2 = a * (1 - a * b) * S11 - (1 - 2 * a * b) * S13 - b * S33;
    if (std::abs(F1) <= 1e-15 * scale_s && std::abs(F2) <= 1e-15 * scale_S) {
      ok = true;
      break;
    }
    const double J11 = 2 * b * s13 - (1 - 2 * a * b) * s33;
    const double J12 = s11 + 2 * a * s13 + a * a * s33;
    const double J21 = (1 - 2 * a * b) * S11 + 2 * b * S13;
    const double J22 = -a * a * S11 + 2 * a * S13 - S33;
    const double det = J11 * J22 - J12 * J21;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double da = -(J22 * F1 - J12 * F2) / det;
    const double db = -(J11 * F2 - J21 * F1) / det;
    a += da;
    b += db;
    if (!std::isfinite(a) || !std::isfinite(b)) break;
    if (da == 0.0 && db == 0.0) {
      ok = true;
      break;
    }
  }
  if (!ok) throw Error(ErrorKind::untangling_failed, "equil", "Newton on (alpha, beta) failed");

  const Mat2 A{{{1 - a * b, -a}, {b, 1.0}}};
  const Mat2 B{{{1.0, -b}, {a, 1 - a * b}}};
  const Poly4 sub = linear_substitute(q, A, B);
  const QuadraticPart mp = quadratic_part(sub);
  const double rs = std::abs(mp.mu_s13) / std::max(std::abs(mp.mu_s11), std::abs(mp.mu_s33));
  const double rS = std::abs(mp.mu_S13) / std::max(std::abs(mp.mu_S11), std::abs(mp.mu_S33));
  Untangled out;
  out.alpha = a;
  out.beta = b;
  out.mixed_residual = std::max(rs, rS);
  if (!(out.mixed_residual <= 1e-14)) {
    throw Error(ErrorKind::untangling_failed, "equil",
                "mixed quadratic terms remain after untangling");
  }
  std::vector<Poly4Term> kept;
  kept.reserve(sub.size());
  for (const auto& t : sub.terms()) {
    const bool mixed = (t.exp == Exp4{1, 1, 0, 0}) || (t.exp == Exp4{0, 0, 1, 1});
    if (!mixed) kept.push_back(t);
  }
  out.q = Poly4::from_terms(kept, q.truncation());
  return out;
}

namespace {

struct TrigPiece {
  int k;
  TrigKind kind;
  double c;
};

// cos^a(u) sin^c(u) as a sum of cos/sin(k u), k >= 0.
std::vector<TrigPiece> trig_power(int a, int c) {
  // Coefficients of z^k, z = e^{iu}, k in [-(a+c), a+c].
  const int n = a + c;
  std::vector<std::complex<double>> p(2 * n + 1, 0.0), tmp;
  p[n] = 1.0;
  auto mul = [&](std::complex<double> cp, std::complex<double> cm) {
    // multiply by (cp z + cm / z)
    tmp.assign(p.size(), 0.0);
    for (int k = 0; k < 2 * n + 1; ++k) {
      if (p[k] == 0.0) continue;
      if (k + 1 <= 2 * n) tmp[k + 1] += p[k] * cp;
      if (k - 1 >= 0) tmp[k - 1] += p[k] * cm;
    }
    p.swap(tmp);
  };
  for (int j = 0; j < a; ++j) mul(0.5, 0.5);
  for (int j = 0; j < c; ++j) mul({0.0, -0.5}, {0.0, 0.5});
  std::vector<TrigPiece> out;
  if (p[n].real() != 0.0) out.push_back({0, TrigKind::cos, p[n].real()});
  for (int k = 1; k <= n; ++k) {
    const std::complex<double> ck = p[n + k];
    if (ck.real() != 0.0) out.push_back({k, TrigKind::cos, 2.0 * ck.real()});
    if (ck.imag() != 0.0) out.push_back({k, TrigKind::sin, -2.0 * ck.imag()});
  }
  return out;
}

}  // namespace

ActionAngleForm to_action_angle(const Poly4& q, TruncationPolicy trunc) {
  trunc.validate();
  const QuadraticPart m = quadratic_part(q);
  if (m.mu_S13 != 0.0 || m.mu_s13 != 0.0) {
    throw Error(ErrorKind::domain, "equil", "quadratic part is not diagonal");
  }
  auto star = [](double mS, double ms, const char* which, double& Ustar, double& omega) {
    if (!(mS * ms > 0.0)) {
      throw Error(ErrorKind::not_elliptic, "equil",
                  std::string("equilibrium is not elliptic in the ") + which + " pair");
    }
    Ustar = std::sqrt(mS / ms);
    omega = (mS > 0 ? 2.0 : -2.0) * std::sqrt(mS * ms);
  };
  ActionAngleForm out;
  out.lin.mu_prime = m;
  star(m.mu_S11, m.mu_s11, "first", out.lin.U1_star, out.lin.omega1);
  star(m.mu_S33, m.mu_s33, "second", out.lin.U3_star, out.lin.omega3);

  const int N = std::min(trunc.max_sqrtU_degree, std::max(q.max_degree(), 0));
  std::map<std::pair<int, int>, std::vector<TrigPiece>> table;
  auto pieces = [&](int a, int c) -> const std::vector<TrigPiece>& {
    auto it = table.find({a, c});
    if (it == table.end()) it = table.emplace(std::make_pair(a, c), trig_power(a, c)).first;
    return it->second;
  };
  const double f1S = std::sqrt(2.0 / out.lin.U1_star), f1s = std::sqrt(2.0 * out.lin.U1_star);
  const double f3S = std::sqrt(2.0 / out.lin.U3_star), f3s = std::sqrt(2.0 * out.lin.U3_star);

  SeriesAccumulator acc(trunc);
  acc.reserve(q.size() * 8);
  for (const auto& t : q.terms()) {
    if (t.degree() > N) break;
    const auto [a, b, c, d] = t.exp;
    const double f = t.coeff * std::pow(f1S, a) * std::pow(f1s, c) * std::pow(f3S, b) *
                     std::pow(f3s, d);
    const int m1 = a + c, m3 = b + d;
    for (const auto& p1 : pieces(a, c)) {
      for (const auto& p3 : pieces(b, d)) {
        const double h = 0.5 * f * p1.c * p3.c;
        const bool s1 = p1.kind == TrigKind::sin, s3 = p3.kind == TrigKind::sin;
        PoissonKey kp{m1, m3, TrigKind::cos, p1.k, p3.k};
        PoissonKey km{m1, m3, TrigKind::cos, p1.k, -p3.k};
        if (!s1 && !s3) {
          acc.add(kp, h);
          acc.add(km, h);
        } else if (s1 && s3) {
          acc.add(km, h);
          acc.add(kp, -h);
        } else if (s1) {
          kp.kind = km.kind = TrigKind::sin;
          acc.add(kp, h);
          acc.add(km, h);
        } else {
          kp.kind = km.kind = TrigKind::sin;
          acc.add(kp, h);
          acc.add(km, -h);
        }
      }
    }
  }
  PoissonSeries H0 = std::move(acc).finish();
  // The quadratic block is omega . U exactly; rebuild it without rounding.
  std::vector<PoissonTerm> terms;
  terms.reserve(H0.size());
  for (const auto& t : H0.terms()) {
    if (t.key.degree() != 2) terms.push_back(t);
  }
  terms.push_back({{2, 0, TrigKind::cos, 0, 0}, out.lin.omega1});
  terms.push_back({{0, 2, TrigKind::cos, 0, 0}, out.lin.omega3});
  out.H0 = PoissonSeries::from_terms(terms, trunc);
  return out;
}

EquilibriumExpansion expand_at_cassini(const HamiltonianModel& H, TruncationPolicy trunc) {
  EquilibriumExpansion out;
  out.state = solve_cassini(H);
  out.q = taylor_expand(H, out.state, trunc);
  out.untangled = untangle(out.q);
  out.aa = to_action_angle(out.untangled.q, trunc);
  out.aa.lin.mu = quadratic_part(out.q);
  out.aa.lin.alpha = out.untangled.alpha;
  out.aa.lin.beta = out.untangled.beta;
  return out;
}

}  // namespace cassini
