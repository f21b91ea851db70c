#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cassini/errors.hpp"
#include "cassini/orbexp.hpp"

using namespace cassini;

namespace {

// Fourier coefficients of a sampled periodic function, cos and sin parts.
struct Dft {
  std::vector<double> a, b;
};

Dft dft(const std::vector<double>& f, int kmax) {
  const std::size_t n = f.size();
  Dft out{std::vector<double>(kmax + 1), std::vector<double>(kmax + 1)};
  for (int k = 0; k <= kmax; ++k) {
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = 2.0 * std::numbers::pi * k * static_cast<double>(j) / n;
      a += f[j] * std::cos(x);
      b += f[j] * std::sin(x);
    }
    const double w = (k == 0 ? 1.0 : 2.0) / n;
    out.a[k] = a * w;
    out.b[k] = b * w;
  }
  return out;
}

}  // namespace

TEST_CASE("circular orbit limit") {
  auto x = kepler_expansions(8);
  CHECK(x.a_over_r_cubed.coeff(0, 0, TrigKind::cos) == doctest::Approx(1.0));
  CHECK(x.cos_v.coeff(0, 1, TrigKind::cos) == doctest::Approx(1.0));
  CHECK(x.sin_v.coeff(0, 1, TrigKind::sin) == doctest::Approx(1.0));
  for (const auto& [k, c] : x.a_over_r_cubed.terms) {
    if (k.p == 0) CHECK(k.k == 0);
  }
}

TEST_CASE("classical low-order coefficients") {
  auto x = kepler_expansions(4);
  // cos v = -e + (1 - 9/8 e^2) cos l + e cos 2l + ...
  CHECK(x.cos_v.coeff(1, 0, TrigKind::cos) == doctest::Approx(-1.0));
  CHECK(x.cos_v.coeff(2, 1, TrigKind::cos) == doctest::Approx(-9.0 / 8.0));
  CHECK(x.cos_v.coeff(1, 2, TrigKind::cos) == doctest::Approx(1.0));
  // sin v = (1 - 7/8 e^2) sin l + e sin 2l + ...
  CHECK(x.sin_v.coeff(2, 1, TrigKind::sin) == doctest::Approx(-7.0 / 8.0));
  // (a/r)^3 = 1 + 3/2 e^2 + 3 e cos l + ...
  CHECK(x.a_over_r_cubed.coeff(2, 0, TrigKind::cos) == doctest::Approx(1.5));
  CHECK(x.a_over_r_cubed.coeff(1, 1, TrigKind::cos) == doctest::Approx(3.0));
}

TEST_CASE("parity of the expansions") {
  auto x = kepler_expansions(8);
  for (const auto& [k, c] : x.a_over_r_cubed.terms) CHECK(k.kind == TrigKind::cos);
  for (const auto& [k, c] : x.cos_v.terms) CHECK(k.kind == TrigKind::cos);
  for (const auto& [k, c] : x.sin_v.terms) CHECK(k.kind == TrigKind::sin);
}

TEST_CASE("cos^2 v + sin^2 v = 1 to truncation order") {
  const int N = 8;
  auto x = kepler_expansions(N);
  // Sample at a small e so the e^(N+1) tail is far below the check.
  const double e = 1e-3;
  for (int j = 0; j < 64; ++j) {
    const double l = 2.0 * std::numbers::pi * j / 64;
    const double c = x.cos_v.evaluate(e, l), s = x.sin_v.evaluate(e, l);
    CHECK(std::abs(c * c + s * s - 1.0) < 1e-12);
  }
}

TEST_CASE("expansions match Newton plus DFT at Titan eccentricity") {
  const double e = 0.0289;
  auto x = kepler_expansions(8);
  const int n = 4096;
  std::vector<double> ar3(n), cv(n), sv(n);
  for (int j = 0; j < n; ++j) {
    const double l = 2.0 * std::numbers::pi * j / n;
    auto s = numeric_kepler(e, l);
    ar3[j] = std::pow(1.0 / s.r_over_a, 3);
    cv[j] = std::cos(s.v);
    sv[j] = std::sin(s.v);
  }
  const int K = 12;
  auto A = dft(ar3, K), C = dft(cv, K), S = dft(sv, K);
  for (int k = 0; k <= K; ++k) {
    CHECK(std::abs(x.a_over_r_cubed.fourier(e, k, TrigKind::cos) - A.a[k]) < 1e-10);
    CHECK(std::abs(x.cos_v.fourier(e, k, TrigKind::cos) - C.a[k]) < 1e-10);
    CHECK(std::abs(x.sin_v.fourier(e, k, TrigKind::sin) - S.b[k]) < 1e-10);
  }
  CHECK(std::abs(x.a_over_r_cubed.fourier(e, 0, TrigKind::cos) - std::pow(1 - e * e, -1.5)) <
        1e-12);
}

TEST_CASE("numeric Kepler special points") {
  auto a = numeric_kepler(0.0, 1.0);
  CHECK(a.r_over_a == doctest::Approx(1.0));
  CHECK(a.v == doctest::Approx(1.0));
  auto b = numeric_kepler(0.0289, 0.0);
  CHECK(b.r_over_a == doctest::Approx(0.9711));
  CHECK(b.v == doctest::Approx(0.0));
  auto c = numeric_kepler(0.5, std::numbers::pi);
  CHECK(c.r_over_a == doctest::Approx(1.5));
  CHECK(c.v == doctest::Approx(std::numbers::pi));
  CHECK_THROWS_AS(numeric_kepler(1.0, 0.3), Error);
  CHECK_THROWS_AS(kepler_expansions(13), Error);
}
