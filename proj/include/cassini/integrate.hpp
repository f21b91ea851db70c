#pragma once

// Direct numerical integration of the truncated H0 in the untangled
// Cartesian variables, used to cross-check the escape-time bound.

#include <array>
#include <cstdint>
#include <vector>

#include "cassini/birkhoff.hpp"
#include "cassini/equil.hpp"
#include "cassini/pseries.hpp"

namespace cassini {

// (U, u) -> (S1', S3', s1', s3') with S'_j = sqrt(2 U_j / U_j*) cos u_j,
// s'_j = sqrt(2 U_j U_j*) sin u_j.
std::array<double, 4> to_cartesian(const Linearization& lin, const ActionAnglePoint& p);
// Inverse of to_cartesian (angles in (-pi, pi]).
ActionAnglePoint to_action_angle_point(const Linearization& lin, const std::array<double, 4>& x);

struct IntegrationSettings {
  double t_span = 1e4;  // years
  int n_samples = 16;
  double rho0 = 1.0;
  double rho_opt = 1.0;  // exit radius, in units of R
  WeightVector R;
  double rtol = 1e-13;
  double atol = 1e-18;
  std::uint64_t seed = 20240611;
};

struct SampleOutcome {
  ActionAnglePoint start;     // in the variables the polydisk is defined in
  double max_ratio = 0.0;     // max_t max_j U_j(t) / (rho_opt R_j), same variables
  double max_ratio_original = 0.0;  // same with the actions of H0
  double energy_drift = 0.0;  // max_t |H(t) - H(0)| / |H(0)|
  std::size_t steps = 0;
};

struct IntegrationReport {
  IntegrationSettings settings;
  std::vector<SampleOutcome> samples;
  double max_ratio = 0.0;
  double max_energy_drift = 0.0;
};

// Initial conditions lie on the boundary of the polydisk rho0 R: one action at
// rho0 R_j, the other uniform in [0, rho0 R_k], angles uniform. Integrates the
// polynomial h (as produced by untangle) with an adaptive Runge-Kutta-Fehlberg
// 7(8) stepper. Throws ErrorKind::integration on step failure.
//
// With a normal form, the polydisk is taken in the normalized actions of order
// r: samples are mapped to the original variables through the Lie series and
// the normalized actions are monitored along the orbit.
IntegrationReport check_integrate(const Poly4& h, const Linearization& lin,
                                  const IntegrationSettings& s,
                                  const NormalForm* nf = nullptr, int r = 0);

}  // namespace cassini
