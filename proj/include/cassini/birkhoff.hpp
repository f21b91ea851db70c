#pragma once

// Birkhoff normal form of H0(U, u) = omega.U + sum_{s>=1} H_s by Lie series.
// "Order s" is the block of sqrt(U)-degree s+2.

#include <array>
#include <vector>

#include "cassini/pseries.hpp"

namespace cassini {

struct SmallDivisor {
  int k1 = 0;
  int k3 = 0;
  double divisor = 0.0;  // k . omega, rad/year
  int degree = 0;        // sqrt(U)-degree of the block where it appeared
};

struct SmallDivisorLog {
  std::vector<SmallDivisor> entries;  // one per distinct (k, degree), in step order
  double min_abs_divisor = 0.0;       // 0 when no divisor was needed

  void record(int k1, int k3, double divisor, int degree);
};

struct HomologicalSolution {
  PoissonSeries chi;
  PoissonSeries Z;
};

// Solves {chi, omega.U} + R = Z with Z the angle-free part of R.
// Throws ErrorKind::resonance when |k.omega| <= threshold.
HomologicalSolution solve_homological(const PoissonSeries& R, std::array<double, 2> omega,
                                      double threshold, SmallDivisorLog* log = nullptr);

// exp(L_chi) H = sum_n L_chi^n H / n!, with L_chi f = {chi, f}.
PoissonSeries lie_transform(const PoissonSeries& H, const PoissonSeries& chi,
                            TruncationPolicy trunc);

struct NormalForm {
  int order = 0;
  std::array<double, 2> omega{};
  // Z[s] is the action-only block of sqrt(U)-degree s+2, s = 0..order.
  std::vector<PoissonSeries> Z;
  // chi[s] for s = 1..order (chi[0] unused, empty).
  std::vector<PoissonSeries> chi;
  // first_remainder[r] is the block of sqrt(U)-degree r+3 of H^(r), r = 0..order;
  // empty when the truncation does not reach that degree.
  std::vector<PoissonSeries> first_remainder;
  // Normalized Hamiltonian H^(order).
  PoissonSeries H;
  SmallDivisorLog divisor_log;
  // Largest relative angle-dependent residue removed after each step.
  std::vector<double> homological_residual;

  // Terms of sqrt(U)-degree > order + 2.
  PoissonSeries remainder() const;
};

// Requires trunc.max_sqrtU_degree >= r + 3.
NormalForm normalize(const PoissonSeries& H0, int r, double threshold = 1e-10);

// Coordinate changes of the normal form at order r <= nf.order.
// in_original_variables: g(y(x)) = exp(-L_chi1) ... exp(-L_chir) g, a function
// of the normalized variables y rewritten in the original ones x.
// in_normalized_variables: g(x(y)) = exp(L_chir) ... exp(L_chi1) g.
PoissonSeries in_original_variables(const NormalForm& nf, const PoissonSeries& g, int r);
PoissonSeries in_normalized_variables(const NormalForm& nf, const PoissonSeries& g, int r);

// sqrt(2 U_j) cos u_j (sin_part = false) or sqrt(2 U_j) sin u_j as a series.
PoissonSeries cartesian_coordinate(int j, bool sin_part, TruncationPolicy trunc);

}  // namespace cassini
