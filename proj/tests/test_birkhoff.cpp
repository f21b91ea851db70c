#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "cassini/birkhoff.hpp"
#include "cassini/equil.hpp"
#include "cassini/errors.hpp"
#include "random_series.hpp"

using namespace cassini;

namespace {

const TruncationPolicy kTrunc{16, 16, 8};

PoissonSeries series(std::initializer_list<PoissonTerm> terms, TruncationPolicy trunc = kTrunc) {
  std::vector<PoissonTerm> v(terms);
  return PoissonSeries::from_terms(v, trunc);
}

PoissonSeries omega_U(std::array<double, 2> w, TruncationPolicy trunc = kTrunc) {
  return series({{{2, 0, TrigKind::cos, 0, 0}, w[0]}, {{0, 2, TrigKind::cos, 0, 0}, w[1]}}, trunc);
}

double max_abs(const PoissonSeries& f) {
  double m = 0;
  for (const auto& t : f.terms()) m = std::max(m, std::abs(t.coeff));
  return m;
}

const NormalForm& titan_nf12() {
  static const NormalForm nf = [] {
    auto E = expand_at_cassini(assemble_hamiltonian(titan_params(), kTrunc), kTrunc);
    return normalize(E.aa.H0, 12);
  }();
  return nf;
}

}  // namespace

TEST_CASE("homological equation: angle-free input") {
  auto R = series({{{4, 0, TrigKind::cos, 0, 0}, 1.5}, {{2, 2, TrigKind::cos, 0, 0}, -0.5}});
  auto sol = solve_homological(R, {2.0, 1.0}, 1e-10);
  CHECK(sol.chi.empty());
  CHECK(sol.Z == R);
}

TEST_CASE("homological equation: single cosine") {
  auto R = series({{{1, 0, TrigKind::cos, 1, 0}, 1.0}});
  auto sol = solve_homological(R, {2.0, 1.0}, 1e-10);
  REQUIRE(sol.chi.size() == 1);
  CHECK(sol.chi.coeff({1, 0, TrigKind::sin, 1, 0}) == -0.5);
  auto res = poisson_bracket(sol.chi, omega_U({2.0, 1.0}), kTrunc) + R - sol.Z;
  CHECK(max_abs(res) == 0.0);
}

TEST_CASE("homological equation: random block residual") {
  std::mt19937_64 rng(17);
  const std::array<double, 2> w{2.69, 2.375e-2};
  for (int rep = 0; rep < 20; ++rep) {
    auto R = homogeneous_part(testing::random_series(rng, 10, 5, kTrunc, 5), 5);
    auto sol = solve_homological(R, w, 1e-10);
    auto res = poisson_bracket(sol.chi, omega_U(w), kTrunc) + R - sol.Z;
    CHECK(max_abs(res) <= 1e-13 * max_abs(R));
    CHECK(angle_dependent_part(sol.Z).empty());
  }
}

TEST_CASE("homological equation reports resonant waves") {
  auto R = series({{{1, 1, TrigKind::cos, 1, -1}, 1.0}});
  try {
    solve_homological(R, {1.0, 1.0}, 1e-10);
    FAIL("expected resonance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resonance);
    CHECK(std::string(e.what()).find("k=(1,-1)") != std::string::npos);
  }
}

TEST_CASE("lie transform with zero generator is the identity") {
  std::mt19937_64 rng(2);
  auto H = testing::random_series(rng, 30, 8, kTrunc);
  CHECK(lie_transform(H, PoissonSeries(kTrunc), kTrunc) == H);
}

TEST_CASE("lie transform inverse composition") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    auto H = testing::random_series(rng, 40, 10, kTrunc, 2);
    auto chi = homogeneous_part(testing::random_series(rng, 8, 3 + rep, kTrunc, 3 + rep), 3 + rep) * 0.1;
    auto back = lie_transform(lie_transform(H, chi, kTrunc), -chi, kTrunc);
    auto diff = back - H;
    CHECK(max_abs(diff) <= 1e-12);
  }
}

TEST_CASE("lie transform equals composition with the generator flow") {
  // exp(L_chi) H = H o phi_{-1}, phi_t the flow of chi under df/dt = {f, chi}.
  const TruncationPolicy tr{24, 24, 8};
  auto chi = series({{{4, 0, TrigKind::sin, 2, 0}, 0.3},
                     {{2, 2, TrigKind::sin, 2, -2}, 0.2},
                     {{0, 4, TrigKind::cos, 0, 4}, 0.1},
                     {{2, 2, TrigKind::cos, 0, 2}, -0.15}},
                    tr);
  std::mt19937_64 rng(21);
  auto H = testing::random_series(rng, 25, 4, tr, 2);
  auto G = lie_transform(H, chi, tr);
  const auto c1 = derivative_angle(chi, 1), c3 = derivative_angle(chi, 3);
  const auto C1 = derivative_action(chi, 1), C3 = derivative_action(chi, 3);
  using State = std::array<double, 4>;  // U1, U3, u1, u3
  auto rhs = [&](const State& x, State& dx, double) {
    const ActionAnglePoint p{x[0], x[1], x[2], x[3]};
    // Backward flow of chi: reversed signs.
    dx = {evaluate(c1, p), evaluate(c3, p), -evaluate(C1, p), -evaluate(C3, p)};
  };
  std::uniform_real_distribution<double> U(0.01, 0.03), u(-M_PI, M_PI);
  namespace odeint = boost::numeric::odeint;
  for (int n = 0; n < 20; ++n) {
    State x{U(rng), U(rng), u(rng), u(rng)};
    const ActionAnglePoint p0{x[0], x[1], x[2], x[3]};
    odeint::integrate_adaptive(odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_fehlberg78<State>()),
                               rhs, x, 0.0, 1.0, 0.01);
    const double want = evaluate(H, {x[0], x[1], x[2], x[3]});
    CHECK(evaluate(G, p0) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("normalize at order 0 returns H0") {
  std::mt19937_64 rng(4);
  auto H0 = omega_U({2.0, 0.3}) + homogeneous_part(testing::random_series(rng, 20, 6, kTrunc, 3), 3);
  auto nf = normalize(H0, 0);
  CHECK(nf.H == H0);
  CHECK(nf.Z[0] == omega_U({2.0, 0.3}));
  CHECK(nf.first_remainder[0] == homogeneous_part(H0, 3));
}

TEST_CASE("normal form of the Titan Hamiltonian to order 12") {
  const auto& nf = titan_nf12();
  CHECK(nf.order == 12);
  CHECK(nf.Z[2].size() == 3);
  for (int s = 0; s <= 12; ++s) {
    CHECK(angle_dependent_part(nf.Z[s]).empty());
    if (s % 2 == 1) {
      CHECK(nf.Z[s].empty());
    } else {
      CHECK(nf.Z[s].size() == static_cast<std::size_t>(s / 2 + 2));
    }
    CHECK(nf.homological_residual[s] <= 1e-13);
  }
  for (int d = 2; d <= 14; ++d) {
    auto block = homogeneous_part(nf.H, d);
    CHECK(angle_dependent_part(block).empty());
    if (d % 2 == 1) CHECK(block.empty());
  }
  for (const auto& t : nf.remainder().terms()) CHECK(t.key.degree() > 14);
  CHECK(nf.first_remainder[12] == homogeneous_part(nf.H, 15));
  CHECK(nf.divisor_log.min_abs_divisor > 1e-10);
  CHECK(nf.divisor_log.min_abs_divisor == doctest::Approx(std::abs(nf.omega[1])).epsilon(1e-12));
}

TEST_CASE("normalize is deterministic") {
  auto E = expand_at_cassini(assemble_hamiltonian(titan_params(), {10, 10, 8}), {10, 10, 8});
  auto a = normalize(E.aa.H0, 7);
  auto b = normalize(E.aa.H0, 7);
  CHECK(to_text(a.H) == to_text(b.H));
  CHECK(to_text(a.chi[5]) == to_text(b.chi[5]));
}

TEST_CASE("normalize rejects a short truncation") {
  auto E = expand_at_cassini(assemble_hamiltonian(titan_params(), {10, 10, 8}), {10, 10, 8});
  CHECK_THROWS_AS(normalize(E.aa.H0, 8), Error);
}

TEST_CASE("coordinate changes are inverse to each other and map H0 to the normal form") {
  const auto& nf = titan_nf12();
  auto E = expand_at_cassini(assemble_hamiltonian(titan_params(), kTrunc), kTrunc);
  auto Hr = in_normalized_variables(nf, E.aa.H0, 12);
  CHECK(max_abs(Hr - nf.H) <= 1e-12 * max_abs(nf.H));

  // High-degree coefficients are large; compare on a Titan-sized polydisk.
  const WeightVector R{1e-4, 3e-7};
  for (int j : {1, 3}) {
    const auto U = PoissonSeries::action(j, kTrunc);
    auto round = in_original_variables(nf, in_normalized_variables(nf, U, 12), 12);
    CHECK(weighted_norm(round - U, R) <= 1e-13 * weighted_norm(U, R));
  }
}
