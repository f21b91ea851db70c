#include "cassini/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "cassini/errors.hpp"

namespace cassini {

SeriesEvaluator::SeriesEvaluator(const PoissonSeries& f) {
  for (const auto& t : f.terms()) {
    max_m_ = std::max({max_m_, t.key.m1, t.key.m3});
    max_k1_ = std::max(max_k1_, std::abs(t.key.k1));
    max_k3_ = std::max(max_k3_, std::abs(t.key.k3));
  }
  // Table layout: t0/t1 hold sqrt(U)^m, t2/t3 hold [cos(k u) | sin(k u)] for
  // k in [-K, K], cos block first.
  const int w1 = 2 * max_k1_ + 1, w3 = 2 * max_k3_ + 1;
  plan_.reserve(2 * f.size());
  for (const auto& t : f.terms()) {
    const int c1 = t.key.k1 + max_k1_, s1 = c1 + w1;
    const int c3 = t.key.k3 + max_k3_, s3 = c3 + w3;
    if (t.key.kind == TrigKind::cos) {
      // cos(a+b) = cos a cos b - sin a sin b
      plan_.push(t.coeff, t.key.m1, t.key.m3, c1, c3);
      plan_.push(-t.coeff, t.key.m1, t.key.m3, s1, s3);
    } else {
      // sin(a+b) = sin a cos b + cos a sin b
      plan_.push(t.coeff, t.key.m1, t.key.m3, s1, c3);
      plan_.push(t.coeff, t.key.m1, t.key.m3, c1, s3);
    }
  }
}

double SeriesEvaluator::operator()(const ActionAnglePoint& p) const {
  return (*this)(kernels::active_isa(), p);
}

double SeriesEvaluator::operator()(kernels::Isa isa, const ActionAnglePoint& p) const {
  if (p.U1 < 0.0 || p.U3 < 0.0) {
    throw Error(ErrorKind::domain, "pseries", "evaluate: actions must be nonnegative");
  }
  const int n = max_m_ + 1;
  std::vector<double> a1(n), a3(n);
  const double s1 = std::sqrt(p.U1), s3 = std::sqrt(p.U3);
  a1[0] = a3[0] = 1.0;
  for (int m = 1; m < n; ++m) {
    a1[m] = a1[m - 1] * s1;
    a3[m] = a3[m - 1] * s3;
  }
  auto trig_table = [](int K, double u) {
    const int w = 2 * K + 1;
    std::vector<double> tab(2 * static_cast<std::size_t>(w));
    for (int k = -K; k <= K; ++k) {
      tab[k + K] = std::cos(k * u);
      tab[w + k + K] = std::sin(k * u);
    }
    return tab;
  };
  const auto g1 = trig_table(max_k1_, p.u1);
  const auto g3 = trig_table(max_k3_, p.u3);
  const kernels::Tables tabs{{a1.data(), a3.data(), g1.data(), g3.data()}};
  return kernels::gather_sum(isa, plan_, tabs);
}

PolyEvaluator::PolyEvaluator(const Poly4& q) {
  n_ = std::max(q.max_degree(), 0) + 1;
  plan_.reserve(q.size());
  for (const auto& t : q.terms()) plan_.push(t.coeff, t.exp[0], t.exp[1], t.exp[2], t.exp[3]);
}

double PolyEvaluator::operator()(const std::array<double, 4>& x) const {
  return (*this)(kernels::active_isa(), x);
}

double PolyEvaluator::operator()(kernels::Isa isa, const std::array<double, 4>& x) const {
  // Small fixed-size stack tables cover every degree used in practice.
  constexpr int kStack = 64;
  double stack[4][kStack];
  std::vector<double> heap;
  double* tab[4];
  if (n_ <= kStack) {
    for (int v = 0; v < 4; ++v) tab[v] = stack[v];
  } else {
    heap.resize(4 * static_cast<std::size_t>(n_));
    for (int v = 0; v < 4; ++v) tab[v] = heap.data() + v * n_;
  }
  for (int v = 0; v < 4; ++v) {
    tab[v][0] = 1.0;
    for (int k = 1; k < n_; ++k) tab[v][k] = tab[v][k - 1] * x[v];
  }
  const kernels::Tables tabs{{tab[0], tab[1], tab[2], tab[3]}};
  return kernels::gather_sum(isa, plan_, tabs);
}

PolyVectorField::PolyVectorField(const Poly4& h)
    : h_(h),
      d_{PolyEvaluator(derivative(h, 0)), PolyEvaluator(derivative(h, 1)),
         PolyEvaluator(derivative(h, 2)), PolyEvaluator(derivative(h, 3))} {}

std::array<double, 4> PolyVectorField::operator()(const std::array<double, 4>& x) const {
  return {-d_[2](x), -d_[3](x), d_[0](x), d_[1](x)};
}

}  // namespace cassini
