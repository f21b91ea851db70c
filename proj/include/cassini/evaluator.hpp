#pragma once

// Compiled evaluators: a series or polynomial is flattened once into a
// kernels::GatherPlan and then evaluated many times (integrator right-hand
// sides, sampling oracles).

#include <array>

#include "cassini/kernels.hpp"
#include "cassini/pseries.hpp"

namespace cassini {

class SeriesEvaluator {
 public:
  SeriesEvaluator() = default;
  explicit SeriesEvaluator(const PoissonSeries& f);

  // Throws ErrorKind::domain for negative actions.
  double operator()(const ActionAnglePoint& p) const;
  double operator()(kernels::Isa isa, const ActionAnglePoint& p) const;

  std::size_t plan_size() const { return plan_.size(); }

 private:
  kernels::GatherPlan plan_;
  int max_m_ = 0;
  int max_k1_ = 0;
  int max_k3_ = 0;
};

class PolyEvaluator {
 public:
  PolyEvaluator() = default;
  explicit PolyEvaluator(const Poly4& q);

  double operator()(const std::array<double, 4>& x) const;
  double operator()(kernels::Isa isa, const std::array<double, 4>& x) const;

 private:
  kernels::GatherPlan plan_;
  int n_ = 1;
};

// Hamilton's equations for a Poly4 Hamiltonian in (Sigma1, Sigma3, sigma1,
// sigma3), sigma_j being the coordinate conjugate to Sigma_j:
// dSigma_j/dt = -dH/dsigma_j, dsigma_j/dt = dH/dSigma_j.
class PolyVectorField {
 public:
  explicit PolyVectorField(const Poly4& h);

  std::array<double, 4> operator()(const std::array<double, 4>& x) const;
  double energy(const std::array<double, 4>& x) const { return h_(x); }

 private:
  PolyEvaluator h_;
  std::array<PolyEvaluator, 4> d_;
};

}  // namespace cassini
