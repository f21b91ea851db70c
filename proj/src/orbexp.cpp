#include "cassini/orbexp.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "cassini/errors.hpp"

namespace cassini {

namespace {

// Truncated series in e with trigonometric coefficients in l.
class ESeries {
 public:
  explicit ESeries(int N) : N_(N) {}

  static ESeries constant(int N, double c) {
    ESeries s(N);
    s.add({0, 0, TrigKind::cos}, c);
    return s;
  }

  void add(EccKey key, double c) {
    if (key.p > N_ || c == 0.0) return;
    if (key.k < 0) {
      key.k = -key.k;
      if (key.kind == TrigKind::sin) c = -c;
    }
    if (key.k == 0 && key.kind == TrigKind::sin) return;
    terms_[key] += c;
  }

  ESeries& operator+=(const ESeries& o) {
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
  }

  ESeries scaled(double f, int shift_p = 0) const {
    ESeries out(N_);
    for (const auto& [k, c] : terms_) out.add({k.p + shift_p, k.k, k.kind}, c * f);
    return out;
  }

  ESeries operator*(const ESeries& o) const {
    ESeries out(N_);
    for (const auto& [a, ca] : terms_) {
      for (const auto& [b, cb] : o.terms_) {
        const int p = a.p + b.p;
        if (p > N_) continue;
        const double h = 0.5 * ca * cb;
        const bool sa = a.kind == TrigKind::sin, sb = b.kind == TrigKind::sin;
        if (!sa && !sb) {
          out.add({p, a.k - b.k, TrigKind::cos}, h);
          out.add({p, a.k + b.k, TrigKind::cos}, h);
        } else if (sa && sb) {
          out.add({p, a.k - b.k, TrigKind::cos}, h);
          out.add({p, a.k + b.k, TrigKind::cos}, -h);
        } else if (sa) {
          out.add({p, a.k + b.k, TrigKind::sin}, h);
          out.add({p, a.k - b.k, TrigKind::sin}, h);
        } else {
          out.add({p, a.k + b.k, TrigKind::sin}, h);
          out.add({p, a.k - b.k, TrigKind::sin}, -h);
        }
      }
    }
    return out;
  }

  // Drops coefficients that are pure rounding noise of cancelling sums.
  void clean() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) < 1e-15) {
        it = terms_.erase(it);
      } else {
        ++it;
      }
    }
  }

  const std::map<EccKey, double>& terms() const { return terms_; }

 private:
  int N_;
  std::map<EccKey, double> terms_;
};

// cos(D) and sin(D) for a series D = O(e), by Taylor expansion.
std::pair<ESeries, ESeries> cos_sin_of_small(const ESeries& D, int N) {
  ESeries c = ESeries::constant(N, 1.0), s(N);
  ESeries pw = ESeries::constant(N, 1.0);
  double fact = 1.0;
  for (int n = 1; n <= N; ++n) {
    pw = pw * D;
    fact *= n;
    const double f = 1.0 / fact;
    switch (n % 4) {
      case 0: c += pw.scaled(f); break;
      case 1: s += pw.scaled(f); break;
      case 2: c += pw.scaled(-f); break;
      case 3: s += pw.scaled(-f); break;
    }
  }
  return {c, s};
}

EccExpansion to_expansion(const ESeries& s, int N, int offset) {
  EccExpansion x;
  x.max_ecc_degree = N;
  x.offset = offset;
  for (const auto& [k, c] : s.terms()) x.terms[k] = c;
  return x;
}

}  // namespace

double EccExpansion::coeff(int p, int k, TrigKind kind) const {
  auto it = terms.find({p, k, kind});
  return it == terms.end() ? 0.0 : it->second;
}

double EccExpansion::fourier(double e, int k, TrigKind kind) const {
  double sum = 0.0;
  for (const auto& [key, c] : terms) {
    if (key.k == k && key.kind == kind) sum += c * std::pow(e, key.p);
  }
  return sum;
}

double EccExpansion::evaluate(double e, double l) const {
  double sum = 0.0;
  for (const auto& [key, c] : terms) {
    const double t = key.kind == TrigKind::cos ? std::cos(key.k * l) : std::sin(key.k * l);
    sum += c * std::pow(e, key.p) * t;
  }
  return sum;
}

int EccExpansion::max_harmonic() const {
  int m = 0;
  for (const auto& [key, c] : terms) m = std::max(m, key.k);
  return m;
}

void EccExpansion::check_dalembert() const {
  for (const auto& [key, c] : terms) {
    const int excess = std::abs(key.k) - offset - key.p;
    if (key.p > max_ecc_degree || excess > 0 || (excess % 2) != 0) {
      throw Error(ErrorKind::numeric, "orbexp",
                  "term e^" + std::to_string(key.p) + " harmonic " + std::to_string(key.k) +
                      " breaks the d'Alembert rule");
    }
  }
}

KeplerExpansions kepler_expansions(int N) {
  if (N < 1 || N > 12) {
    throw Error(ErrorKind::domain, "orbexp", "max_ecc_degree must be in [1, 12]");
  }
  ESeries cos_l(N), sin_l(N);
  cos_l.add({0, 1, TrigKind::cos}, 1.0);
  sin_l.add({0, 1, TrigKind::sin}, 1.0);

  // D = E - l solves D = e sin(l + D); each pass fixes one more order in e.
  ESeries D(N);
  ESeries cosD = ESeries::constant(N, 1.0), sinD(N);
  for (int it = 0; it < N; ++it) {
    ESeries sinE = sin_l * cosD;
    sinE += cos_l * sinD;
    D = sinE.scaled(1.0, 1);
    std::tie(cosD, sinD) = cos_sin_of_small(D, N);
  }
  ESeries cosE = cos_l * cosD;
  cosE += (sin_l * sinD).scaled(-1.0);
  ESeries sinE = sin_l * cosD;
  sinE += cos_l * sinD;

  // a/r = 1/(1 - e cos E) = sum_n (e cos E)^n
  const ESeries ecosE = cosE.scaled(1.0, 1);
  ESeries a_r = ESeries::constant(N, 1.0), pw = ESeries::constant(N, 1.0);
  for (int n = 1; n <= N; ++n) {
    pw = pw * ecosE;
    a_r += pw;
  }
  ESeries a_r3 = a_r * a_r * a_r;

  // sqrt(1 - e^2) by the binomial series.
  ESeries root = ESeries::constant(N, 1.0);
  double binom = 1.0;
  for (int j = 1; 2 * j <= N; ++j) {
    binom *= (0.5 - (j - 1)) / j;
    root.add({2 * j, 0, TrigKind::cos}, binom * ((j % 2) ? -1.0 : 1.0));
  }

  ESeries cos_v = cosE;
  cos_v += ESeries::constant(N, -1.0).scaled(1.0, 1);
  cos_v = cos_v * a_r;
  ESeries sin_v = root * sinE * a_r;

  a_r3.clean();
  cos_v.clean();
  sin_v.clean();
  KeplerExpansions out{to_expansion(a_r3, N, 0), to_expansion(cos_v, N, 1),
                       to_expansion(sin_v, N, 1)};
  out.a_over_r_cubed.check_dalembert();
  out.cos_v.check_dalembert();
  out.sin_v.check_dalembert();
  return out;
}

KeplerSolution numeric_kepler(double e, double l) {
  if (!(e >= 0.0 && e < 1.0)) throw Error(ErrorKind::domain, "orbexp", "eccentricity out of [0,1)");
  double E = e < 0.8 ? l : l + (std::sin(l) >= 0 ? e : -e);
  for (int it = 0; it < 50; ++it) {
    const double f = E - e * std::sin(E) - l;
    if (std::abs(f) <= 1e-14) {
      const double v = 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * E),
                                        std::sqrt(1.0 - e) * std::cos(0.5 * E));
      return {1.0 - e * std::cos(E), v};
    }
    E -= f / (1.0 - e * std::cos(E));
  }
  throw Error(ErrorKind::numeric, "orbexp", "Kepler iteration did not converge");
}

std::string to_text(const EccExpansion& x) {
  std::string out;
  char buf[64];
  for (const auto& [k, c] : x.terms) {
    std::snprintf(buf, sizeof buf, "%.17g %d %d %s\n", c, k.p, k.k,
                  k.kind == TrigKind::cos ? "cos" : "sin");
    out += buf;
  }
  return out;
}

}  // namespace cassini
