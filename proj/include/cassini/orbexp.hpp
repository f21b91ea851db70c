#pragma once

// Eccentricity / mean-anomaly expansions of the Keplerian functions entering
// the tidal potential: (a/r)^3, cos v and sin v as sums of
// c * e^p * {cos|sin}(k l).

#include <map>
#include <string>
#include <tuple>

#include "cassini/pseries.hpp"

namespace cassini {

struct EccKey {
  int p = 0;  // power of e
  int k = 0;  // harmonic of the mean anomaly, k >= 0
  TrigKind kind = TrigKind::cos;

  auto operator<=>(const EccKey&) const = default;
};

struct EccExpansion {
  std::map<EccKey, double> terms;
  int max_ecc_degree = 8;
  // Base harmonic of the function: 0 for (a/r)^3, 1 for cos v and sin v.
  int offset = 0;

  double coeff(int p, int k, TrigKind kind) const;
  // sum_p coeff(p,k,kind) e^p, the k-th Fourier coefficient at eccentricity e.
  double fourier(double e, int k, TrigKind kind) const;
  double evaluate(double e, double l) const;
  int max_harmonic() const;
  // Throws ErrorKind::numeric if a term breaks the d'Alembert rule.
  void check_dalembert() const;
};

struct KeplerExpansions {
  EccExpansion a_over_r_cubed;
  EccExpansion cos_v;
  EccExpansion sin_v;
};

// Series inversion of Kepler's equation truncated at e^max_ecc_degree.
// Requires 1 <= max_ecc_degree <= 12.
KeplerExpansions kepler_expansions(int max_ecc_degree = 8);

struct KeplerSolution {
  double r_over_a = 1.0;
  double v = 0.0;
};

// Newton solve of E - e sin E = l. Throws ErrorKind::numeric after 50
// iterations without reaching |residual| <= 1e-14.
KeplerSolution numeric_kepler(double e, double l);

// Same format as the series text dump, with (p, k, kind) keys.
std::string to_text(const EccExpansion& x);

}  // namespace cassini
