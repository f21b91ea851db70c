#include "cassini/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cassini/errors.hpp"

namespace cassini {

void SmallDivisorLog::record(int k1, int k3, double divisor, int degree) {
  entries.push_back({k1, k3, divisor, degree});
  const double a = std::abs(divisor);
  if (min_abs_divisor == 0.0 || a < min_abs_divisor) min_abs_divisor = a;
}

HomologicalSolution solve_homological(const PoissonSeries& R, std::array<double, 2> omega,
                                      double threshold, SmallDivisorLog* log) {
  const TruncationPolicy trunc = R.truncation();
  std::vector<PoissonTerm> chi, Z;
  std::set<std::array<int, 3>> seen;
  for (const auto& t : R.terms()) {
    if (t.key.angle_free()) {
      Z.push_back(t);
      continue;
    }
    const double div = t.key.k1 * omega[0] + t.key.k3 * omega[1];
    if (!(std::abs(div) > threshold)) {
      throw Error(ErrorKind::resonance, "birkhoff",
                  "small divisor k=(" + std::to_string(t.key.k1) + "," +
                      std::to_string(t.key.k3) + ") at degree " +
                      std::to_string(t.key.degree()));
    }
    if (log && seen.insert({t.key.k1, t.key.k3, t.key.degree()}).second) {
      log->record(t.key.k1, t.key.k3, div, t.key.degree());
    }
    PoissonTerm c = t;
    if (t.key.kind == TrigKind::cos) {
      c.key.kind = TrigKind::sin;
      c.coeff = -t.coeff / div;
    } else {
      c.key.kind = TrigKind::cos;
      c.coeff = t.coeff / div;
    }
    chi.push_back(c);
  }
  return {PoissonSeries::from_terms(chi, trunc), PoissonSeries::from_terms(Z, trunc)};
}

PoissonSeries lie_transform(const PoissonSeries& H, const PoissonSeries& chi,
                            TruncationPolicy trunc) {
  if (chi.empty()) return H.with_truncation(trunc);
  int min_deg = chi.max_degree();
  for (const auto& t : chi.terms()) min_deg = std::min(min_deg, t.key.degree());
  if (min_deg < 3) {
    throw Error(ErrorKind::domain, "birkhoff", "generating function must have degree >= 3");
  }
  PoissonSeries out = H.with_truncation(trunc);
  PoissonSeries term = out;
  for (int n = 1;; ++n) {
    term = poisson_bracket(chi, term, trunc);
    if (term.empty()) break;
    term *= 1.0 / n;
    out += term;
  }
  return out;
}

PoissonSeries NormalForm::remainder() const {
  std::vector<PoissonTerm> kept;
  for (const auto& t : H.terms()) {
    if (t.key.degree() > order + 2) kept.push_back(t);
  }
  return PoissonSeries::from_terms(kept, H.truncation());
}

NormalForm normalize(const PoissonSeries& H0, int r, double threshold) {
  const TruncationPolicy trunc = H0.truncation();
  if (r < 0) throw Error(ErrorKind::domain, "birkhoff", "negative normalization order");
  if (trunc.max_sqrtU_degree < r + 3) {
    throw Error(ErrorKind::domain, "birkhoff",
                "truncation degree " + std::to_string(trunc.max_sqrtU_degree) +
                    " too low for order " + std::to_string(r));
  }
  NormalForm nf;
  nf.order = r;
  nf.omega = {H0.coeff({2, 0, TrigKind::cos, 0, 0}), H0.coeff({0, 2, TrigKind::cos, 0, 0})};
  const auto quad = homogeneous_part(H0, 2);
  if (quad.size() != 2 && !quad.empty()) {
    throw Error(ErrorKind::domain, "birkhoff", "quadratic block must be omega . U");
  }
  nf.Z.assign(r + 1, PoissonSeries(trunc));
  nf.chi.assign(r + 1, PoissonSeries(trunc));
  nf.first_remainder.assign(r + 1, PoissonSeries(trunc));
  nf.homological_residual.assign(r + 1, 0.0);
  nf.Z[0] = quad;

  PoissonSeries H = H0;
  for (int s = 1; s <= r; ++s) {
    const PoissonSeries R = homogeneous_part(H, s + 2);
    nf.first_remainder[s - 1] = R;
    auto sol = solve_homological(R, nf.omega, threshold, &nf.divisor_log);
    H = lie_transform(H, sol.chi, trunc);

    // The degree s+2 block is now Z up to rounding; store it exactly.
    std::vector<PoissonTerm> terms;
    terms.reserve(H.size());
    double scale = 0.0, residue = 0.0;
    for (const auto& t : R.terms()) scale = std::max(scale, std::abs(t.coeff));
    for (const auto& t : H.terms()) {
      if (t.key.degree() != s + 2) {
        terms.push_back(t);
      } else {
        const double z = sol.Z.coeff(t.key);
        residue = std::max(residue, std::abs(t.coeff - z));
      }
    }
    terms.insert(terms.end(), sol.Z.terms().begin(), sol.Z.terms().end());
    H = PoissonSeries::from_terms(terms, trunc);
    nf.homological_residual[s] = scale > 0.0 ? residue / scale : 0.0;
    nf.Z[s] = std::move(sol.Z);
    nf.chi[s] = std::move(sol.chi);
  }
  if (trunc.max_sqrtU_degree >= r + 3) nf.first_remainder[r] = homogeneous_part(H, r + 3);
  nf.H = std::move(H);
  return nf;
}

PoissonSeries in_original_variables(const NormalForm& nf, const PoissonSeries& g, int r) {
  if (r < 0 || r > nf.order) throw Error(ErrorKind::domain, "birkhoff", "order outside the normal form");
  const TruncationPolicy trunc = nf.H.truncation();
  PoissonSeries out = g.with_truncation(trunc);
  for (int s = r; s >= 1; --s) out = lie_transform(out, -nf.chi[s], trunc);
  return out;
}

PoissonSeries in_normalized_variables(const NormalForm& nf, const PoissonSeries& g, int r) {
  if (r < 0 || r > nf.order) throw Error(ErrorKind::domain, "birkhoff", "order outside the normal form");
  const TruncationPolicy trunc = nf.H.truncation();
  PoissonSeries out = g.with_truncation(trunc);
  for (int s = 1; s <= r; ++s) out = lie_transform(out, nf.chi[s], trunc);
  return out;
}

PoissonSeries cartesian_coordinate(int j, bool sin_part, TruncationPolicy trunc) {
  PoissonKey key;
  key.kind = sin_part ? TrigKind::sin : TrigKind::cos;
  if (j == 1) {
    key.m1 = 1;
    key.k1 = 1;
  } else if (j == 3) {
    key.m3 = 1;
    key.k3 = 1;
  } else {
    throw Error(ErrorKind::domain, "birkhoff", "action index must be 1 or 3");
  }
  return PoissonSeries::term(std::sqrt(2.0), key, trunc);
}

}  // namespace cassini
