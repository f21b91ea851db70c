#include "cassini/integrate.hpp"

#include <cmath>
#include <optional>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "cassini/errors.hpp"
#include "cassini/evaluator.hpp"

namespace cassini {

namespace odeint = boost::numeric::odeint;

std::array<double, 4> to_cartesian(const Linearization& lin, const ActionAnglePoint& p) {
  if (p.U1 < 0.0 || p.U3 < 0.0) throw Error(ErrorKind::domain, "integrate", "negative action");
  const double r1 = std::sqrt(2.0 * p.U1), r3 = std::sqrt(2.0 * p.U3);
  const double q1 = std::sqrt(lin.U1_star), q3 = std::sqrt(lin.U3_star);
  return {r1 / q1 * std::cos(p.u1), r3 / q3 * std::cos(p.u3), r1 * q1 * std::sin(p.u1),
          r3 * q3 * std::sin(p.u3)};
}

ActionAnglePoint to_action_angle_point(const Linearization& lin, const std::array<double, 4>& x) {
  const double q1 = std::sqrt(lin.U1_star), q3 = std::sqrt(lin.U3_star);
  const double c1 = x[0] * q1, s1 = x[2] / q1;
  const double c3 = x[1] * q3, s3 = x[3] / q3;
  return {0.5 * (c1 * c1 + s1 * s1), 0.5 * (c3 * c3 + s3 * s3), std::atan2(s1, c1),
          std::atan2(s3, c3)};
}

namespace {

struct NormalizedFrame {
  std::array<SeriesEvaluator, 4> x;  // cos1, sin1, cos3, sin3 of the original variables
  std::array<SeriesEvaluator, 2> U;  // normalized actions in the original variables

  NormalizedFrame(const NormalForm& nf, int r) {
    const TruncationPolicy tr = nf.H.truncation();
    int i = 0;
    for (int j : {1, 3}) {
      for (bool sp : {false, true}) {
        x[i++] = SeriesEvaluator(in_normalized_variables(nf, cartesian_coordinate(j, sp, tr), r));
      }
    }
    U[0] = SeriesEvaluator(in_original_variables(nf, PoissonSeries::action(1, tr), r));
    U[1] = SeriesEvaluator(in_original_variables(nf, PoissonSeries::action(3, tr), r));
  }

  ActionAnglePoint original(const ActionAnglePoint& y) const {
    const double c1 = x[0](y), s1 = x[1](y), c3 = x[2](y), s3 = x[3](y);
    return {0.5 * (c1 * c1 + s1 * s1), 0.5 * (c3 * c3 + s3 * s3), std::atan2(s1, c1),
            std::atan2(s3, c3)};
  }
};

}  // namespace

IntegrationReport check_integrate(const Poly4& h, const Linearization& lin,
                                  const IntegrationSettings& s, const NormalForm* nf, int r) {
  s.R.validate();
  if (!(s.t_span > 0.0) || s.n_samples < 1) {
    throw Error(ErrorKind::domain, "integrate", "need t_span > 0 and n_samples >= 1");
  }
  using State = std::array<double, 4>;
  const PolyVectorField field(h);
  std::optional<NormalizedFrame> frame;
  if (nf) frame.emplace(*nf, r);
  auto rhs = [&](const State& x, State& dx, double) { dx = field(x); };

  IntegrationReport rep;
  rep.settings = s;
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double two_pi = 6.283185307179586;

  for (int n = 0; n < s.n_samples; ++n) {
    ActionAnglePoint p;
    const bool first_on_edge = unit(rng) < 0.5;
    const double other = unit(rng);
    p.U1 = s.rho0 * s.R.R1 * (first_on_edge ? 1.0 : other);
    p.U3 = s.rho0 * s.R.R3 * (first_on_edge ? other : 1.0);
    p.u1 = two_pi * unit(rng);
    p.u3 = two_pi * unit(rng);

    SampleOutcome out;
    out.start = p;
    State x = to_cartesian(lin, frame ? frame->original(p) : p);
    const double e0 = field.energy(x);
    const double escale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
    auto observe = [&](const State& y, double) {
      const auto q = to_action_angle_point(lin, y);
      const double orig = std::max(q.U1 / (s.rho_opt * s.R.R1), q.U3 / (s.rho_opt * s.R.R3));
      out.max_ratio_original = std::max(out.max_ratio_original, orig);
      if (frame) {
        const double U1 = frame->U[0](q), U3 = frame->U[1](q);
        out.max_ratio = std::max({out.max_ratio, U1 / (s.rho_opt * s.R.R1), U3 / (s.rho_opt * s.R.R3)});
      } else {
        out.max_ratio = std::max(out.max_ratio, orig);
      }
      out.energy_drift = std::max(out.energy_drift, std::abs(field.energy(y) - e0) / escale);
      ++out.steps;
    };
    // Error measured against |x| only (odeint's default also adds dt |dx/dt|).
    using Stepper = odeint::runge_kutta_fehlberg78<State>;
    using Controlled = odeint::controlled_runge_kutta<Stepper>;
    Controlled stepper(Controlled::error_checker_type(s.atol, s.rtol, 1.0, 0.0));
    // Initial step from the fastest linear frequency.
    const double dt0 = 0.05 / std::max(std::abs(lin.omega1), std::abs(lin.omega3));
    try {
      odeint::integrate_adaptive(stepper, rhs, x, 0.0, s.t_span, dt0, observe);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::integration, "integrate",
                  "sample " + std::to_string(n) + ": " + e.what());
    }
    for (double v : x) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::integration, "integrate",
                    "sample " + std::to_string(n) + " diverged");
      }
    }
    rep.max_ratio = std::max(rep.max_ratio, out.max_ratio);
    rep.max_energy_drift = std::max(rep.max_energy_drift, out.energy_drift);
    rep.samples.push_back(out);
  }
  return rep;
}

}  // namespace cassini
