#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cassini {

struct TruncationPolicy {
  int max_sqrtU_degree = 16;
  int max_poly_degree = 16;
  int max_ecc_degree = 8;

  void validate() const;
  bool operator==(const TruncationPolicy&) const = default;
};

// Polydisk weights for the majorant norm; dimensionless actions.
struct WeightVector {
  double R1 = 1.0;
  double R3 = 1.0;

  void validate() const;
};

enum class TrigKind : std::uint8_t { cos = 0, sin = 1 };

std::string_view to_string(TrigKind kind);
TrigKind trig_kind_from_string(std::string_view s);

// Key of a term c * sqrt(U1)^m1 * sqrt(U3)^m3 * {cos|sin}(k1 u1 + k3 u3).
struct PoissonKey {
  int m1 = 0;
  int m3 = 0;
  TrigKind kind = TrigKind::cos;
  int k1 = 0;
  int k3 = 0;

  int degree() const { return m1 + m3; }
  bool angle_free() const { return k1 == 0 && k3 == 0; }
  bool operator==(const PoissonKey&) const = default;
};

// Serialization order: (total degree, m1, k1, k3, kind).
std::strong_ordering operator<=>(const PoissonKey& a, const PoissonKey& b);

struct PoissonTerm {
  PoissonKey key;
  double coeff = 0.0;
};

struct ActionAnglePoint {
  double U1 = 0.0;
  double U3 = 0.0;
  double u1 = 0.0;
  double u3 = 0.0;
};

class PoissonSeries;

// Hash-map accumulator used to build series. Keys are canonicalized on
// insertion; terms above the truncation degree are counted, not stored.
class SeriesAccumulator {
 public:
  explicit SeriesAccumulator(TruncationPolicy trunc);

  void add(PoissonKey key, double coeff);
  void add(const PoissonSeries& s, double factor = 1.0);
  void reserve(std::size_t n) { map_.reserve(n); }
  void add_dropped(double mass) { dropped_mass_ += mass; }
  double dropped_mass() const { return dropped_mass_; }

  PoissonSeries finish() &&;

 private:
  TruncationPolicy trunc_;
  std::unordered_map<std::uint64_t, double> map_;
  double dropped_mass_ = 0.0;
};

class PoissonSeries {
 public:
  PoissonSeries() = default;
  explicit PoissonSeries(TruncationPolicy trunc);

  static PoissonSeries from_terms(std::span<const PoissonTerm> terms,
                                  TruncationPolicy trunc);
  static PoissonSeries constant(double c, TruncationPolicy trunc);
  static PoissonSeries term(double c, PoissonKey key, TruncationPolicy trunc);
  // U_j as a series (j = 1 or 3).
  static PoissonSeries action(int j, TruncationPolicy trunc);

  const std::vector<PoissonTerm>& terms() const& { return terms_; }
  // By value on temporaries, so range-for over f(...).terms() cannot dangle.
  std::vector<PoissonTerm> terms() && { return std::move(terms_); }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const TruncationPolicy& truncation() const { return trunc_; }
  double dropped_mass() const { return dropped_mass_; }
  int max_degree() const;

  // Coefficient of a canonical key, 0 when absent.
  double coeff(const PoissonKey& key) const;
  // [first,last) range of terms with the given sqrt(U) degree.
  std::span<const PoissonTerm> degree_block(int s) const;

  PoissonSeries with_truncation(TruncationPolicy trunc) const;

  PoissonSeries operator-() const;
  PoissonSeries& operator+=(const PoissonSeries& o);
  PoissonSeries& operator-=(const PoissonSeries& o);
  PoissonSeries& operator*=(double f);
  friend PoissonSeries operator+(PoissonSeries a, const PoissonSeries& b) { return a += b; }
  friend PoissonSeries operator-(PoissonSeries a, const PoissonSeries& b) { return a -= b; }
  friend PoissonSeries operator*(PoissonSeries a, double f) { return a *= f; }
  friend PoissonSeries operator*(double f, PoissonSeries a) { return a *= f; }

  bool operator==(const PoissonSeries& o) const;

 private:
  friend class SeriesAccumulator;
  std::vector<PoissonTerm> terms_;
  TruncationPolicy trunc_;
  double dropped_mass_ = 0.0;
};

// Canonical form of a key plus the sign to fold into the coefficient.
// Returns 0 for sin terms with zero wave (identically zero).
int canonicalize(PoissonKey& key);

PoissonSeries multiply(const PoissonSeries& a, const PoissonSeries& b,
                       TruncationPolicy trunc);

// {f,g} = sum_j (df/du_j dg/dU_j - df/dU_j dg/du_j), so that df/dt = {f,H}.
PoissonSeries poisson_bracket(const PoissonSeries& f, const PoissonSeries& g,
                              TruncationPolicy trunc);

// Partial derivatives; j is 1 or 3.
PoissonSeries derivative_angle(const PoissonSeries& f, int j);
PoissonSeries derivative_action(const PoissonSeries& f, int j);

double weighted_norm(const PoissonSeries& f, const WeightVector& R);
PoissonSeries homogeneous_part(const PoissonSeries& f, int s);
double evaluate(const PoissonSeries& f, const ActionAnglePoint& p);

// Removes terms with |coeff| <= threshold.
PoissonSeries chop(const PoissonSeries& f, double threshold);
// Angle-dependent part of f (terms with nonzero wave).
PoissonSeries angle_dependent_part(const PoissonSeries& f);
// Number of terms per sqrt(U) degree, index = degree.
std::vector<std::size_t> term_counts(const PoissonSeries& f);

// Text format: one "coeff m1 m3 kind k1 k3" line per term, sorted.
std::string to_text(const PoissonSeries& f);
PoissonSeries series_from_text(std::string_view text, TruncationPolicy trunc);
nlohmann::json to_json(const PoissonSeries& f);
PoissonSeries series_from_json(const nlohmann::json& j, TruncationPolicy trunc);

// ---------------------------------------------------------------------------
// Polynomials in (Sigma1, Sigma3, sigma1, sigma3).

using Exp4 = std::array<int, 4>;

struct Poly4Term {
  Exp4 exp{};
  double coeff = 0.0;

  int degree() const { return exp[0] + exp[1] + exp[2] + exp[3]; }
};

class Poly4 {
 public:
  Poly4() = default;
  explicit Poly4(TruncationPolicy trunc);

  static Poly4 from_terms(std::span<const Poly4Term> terms, TruncationPolicy trunc);

  const std::vector<Poly4Term>& terms() const& { return terms_; }
  std::vector<Poly4Term> terms() && { return std::move(terms_); }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const TruncationPolicy& truncation() const { return trunc_; }
  int max_degree() const;

  double coeff(const Exp4& e) const;

  Poly4& operator+=(const Poly4& o);
  Poly4& operator*=(double f);
  friend Poly4 operator+(Poly4 a, const Poly4& b) { return a += b; }
  friend Poly4 operator*(Poly4 a, double f) { return a *= f; }

 private:
  std::vector<Poly4Term> terms_;  // sorted by (degree, a, b, c, d)
  TruncationPolicy trunc_;
};

Poly4 multiply(const Poly4& a, const Poly4& b, TruncationPolicy trunc);
Poly4 homogeneous_part(const Poly4& q, int degree);
Poly4 derivative(const Poly4& q, int var);
double evaluate(const Poly4& q, const std::array<double, 4>& x);
Poly4 chop(const Poly4& q, double threshold);

using Mat2 = std::array<std::array<double, 2>, 2>;

// Substitutes (Sigma1,Sigma3) = A (Sigma1',Sigma3') and
// (sigma1,sigma3) = B (sigma1',sigma3'), exactly, degree by degree.
Poly4 linear_substitute(const Poly4& q, const Mat2& A, const Mat2& B);

std::string to_text(const Poly4& q);
nlohmann::json to_json(const Poly4& q);

}  // namespace cassini
