#pragma once

// Truncated bivariate power series sum c[i][j] X^i Y^j, i + j <= N.
// Internal helper for Taylor expansions of the model about a point.

#include <cmath>
#include <vector>

namespace cassini::detail {

class Taylor2 {
 public:
  Taylor2() = default;
  explicit Taylor2(int N) : N_(N), c_((N + 1) * (N + 1), 0.0) {}

  static Taylor2 constant(int N, double v) {
    Taylor2 t(N);
    t.c_[0] = v;
    return t;
  }
  // X (var = 0) or Y (var = 1).
  static Taylor2 variable(int N, int var) {
    Taylor2 t(N);
    if (N >= 1) t.ref(var == 0 ? 1 : 0, var == 0 ? 0 : 1) = 1.0;
    return t;
  }

  int degree() const { return N_; }
  double at(int i, int j) const { return c_[i * (N_ + 1) + j]; }
  double& ref(int i, int j) { return c_[i * (N_ + 1) + j]; }
  double value() const { return c_[0]; }

  Taylor2& operator+=(const Taylor2& o) {
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Taylor2 operator+(const Taylor2& o) const { return Taylor2(*this) += o; }
  Taylor2 operator-(const Taylor2& o) const {
    Taylor2 r(*this);
    for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] -= o.c_[k];
    return r;
  }
  Taylor2 operator+(double v) const {
    Taylor2 r(*this);
    r.c_[0] += v;
    return r;
  }
  Taylor2 operator*(double f) const {
    Taylor2 r(*this);
    for (auto& v : r.c_) v *= f;
    return r;
  }
  Taylor2 operator*(const Taylor2& o) const {
    Taylor2 r(N_);
    for (int a = 0; a <= N_; ++a) {
      for (int b = 0; a + b <= N_; ++b) {
        const double x = at(a, b);
        if (x == 0.0) continue;
        for (int c = 0; a + b + c <= N_; ++c) {
          for (int d = 0; a + b + c + d <= N_; ++d) r.ref(a + c, b + d) += x * o.at(c, d);
        }
      }
    }
    return r;
  }

 private:
  int N_ = 0;
  std::vector<double> c_;
};

// g(f) for a univariate g given by its Taylor coefficients g_n about f(0).
inline Taylor2 compose(const Taylor2& f, const std::vector<double>& g) {
  Taylor2 t = f + (-f.value());  // zero constant term
  Taylor2 r = Taylor2::constant(f.degree(), g.back());
  for (int n = static_cast<int>(g.size()) - 2; n >= 0; --n) r = r * t + g[n];
  return r;
}

inline Taylor2 reciprocal(const Taylor2& f) {
  const double f0 = f.value();
  std::vector<double> g(f.degree() + 1);
  double p = 1.0 / f0;
  for (int n = 0; n <= f.degree(); ++n) {
    g[n] = p;
    p *= -1.0 / f0;
  }
  return compose(f, g);
}

inline Taylor2 sqrt(const Taylor2& f) {
  const double f0 = f.value();
  std::vector<double> g(f.degree() + 1);
  // binom(1/2, n) f0^(1/2 - n)
  double b = std::sqrt(f0);
  for (int n = 0; n <= f.degree(); ++n) {
    g[n] = b;
    b *= (0.5 - n) / (n + 1) / f0;
  }
  return compose(f, g);
}

}  // namespace cassini::detail
