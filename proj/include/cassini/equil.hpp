#pragma once

// Cassini equilibrium, Taylor expansion about it, untangling of the quadratic
// part, and the action-angle Taylor-Fourier form H0(U, u).

#include "cassini/model.hpp"
#include "cassini/pseries.hpp"

namespace cassini {

struct CassiniState {
  double Sigma1_star = 1.0;
  double Sigma3_star = 0.0;
  double K_star = 0.0;  // rad
  // max |dH/dSigma_j| / n_o at the returned point.
  double gradient_residual = 0.0;
  int iterations = 0;
};

// Newton on (dH/dS1, dH/dS3) at s1 = s3 = 0, seeded at (1, 1 - cos i).
// For i = 0 Sigma3 stays at 0 (the symmetric state) and only dH/dS1 is solved.
// Throws ErrorKind::equilibrium_not_found after max_iter iterations.
CassiniState solve_cassini(const HamiltonianModel& H, int max_iter = 100, double tol = 1e-12);

// Polynomial in (dS1, dS3, s1, s3) to trunc.max_poly_degree with the constant
// dropped. Linear terms must vanish (|c| <= 1e-12 n_o) and are removed;
// otherwise ErrorKind::inconsistent_equilibrium.
Poly4 taylor_expand(const HamiltonianModel& H, const CassiniState& eq, TruncationPolicy trunc);

// Quadratic coefficients as monomial coefficients:
// H2 = mu_s11 s1^2 + mu_s13 s1 s3 + mu_s33 s3^2 + mu_S11 S1^2 + mu_S13 S1 S3 + mu_S33 S3^2.
struct QuadraticPart {
  double mu_S11 = 0.0, mu_S13 = 0.0, mu_S33 = 0.0;
  double mu_s11 = 0.0, mu_s13 = 0.0, mu_s33 = 0.0;
};

QuadraticPart quadratic_part(const Poly4& q);

struct Untangled {
  double alpha = 0.0;
  double beta = 0.0;
  Poly4 q;  // in the untangled variables, mixed quadratic terms removed
  double mixed_residual = 0.0;  // largest removed mixed term, relative
};

// Linear canonical change
//   S1 = (1-ab) S1' - a S3',  S3 = b S1' + S3',
//   s1 = s1' - b s3',         s3 = a s1' + (1-ab) s3'
// with (a, b) chosen so that both mixed quadratic terms vanish.
// Throws ErrorKind::untangling_failed if Newton fails or the mixed terms do
// not vanish to 1e-14 relative.
Untangled untangle(const Poly4& q);

// 4x4 Jacobian d(S1,S3,s1,s3)/d(S1',S3',s1',s3') of the untangling map.
std::array<std::array<double, 4>, 4> untangling_jacobian(double alpha, double beta);

struct Linearization {
  QuadraticPart mu;        // before untangling
  QuadraticPart mu_prime;  // after untangling (mixed terms zero)
  double alpha = 0.0;
  double beta = 0.0;
  double U1_star = 0.0;
  double U3_star = 0.0;
  double omega1 = 0.0;  // rad/year
  double omega3 = 0.0;
};

struct ActionAngleForm {
  PoissonSeries H0;
  Linearization lin;
};

// Polar rescaling S'_j = sqrt(2 U_j / U_j*) cos u_j, s'_j = sqrt(2 U_j U_j*) sin u_j
// applied to a diagonal polynomial. Throws ErrorKind::not_elliptic if a
// pair of diagonal coefficients does not have a positive product.
ActionAngleForm to_action_angle(const Poly4& q_untangled, TruncationPolicy trunc);

// Full chain from the model: equilibrium, expansion, untangling, polar form.
struct EquilibriumExpansion {
  CassiniState state;
  Poly4 q;
  Untangled untangled;
  ActionAngleForm aa;
};

EquilibriumExpansion expand_at_cassini(const HamiltonianModel& H, TruncationPolicy trunc);

}  // namespace cassini
