#include "cassini/pseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cassini/errors.hpp"

namespace cassini {

namespace {

constexpr int kWaveOffset = 32768;

std::uint64_t pack(const PoissonKey& k) {
  return (static_cast<std::uint64_t>(k.m1 & 0xff) << 56) |
         (static_cast<std::uint64_t>(k.m3 & 0xff) << 48) |
         (static_cast<std::uint64_t>(k.kind) << 40) |
         (static_cast<std::uint64_t>((k.k1 + kWaveOffset) & 0xffff) << 16) |
         static_cast<std::uint64_t>((k.k3 + kWaveOffset) & 0xffff);
}

PoissonKey unpack(std::uint64_t v) {
  PoissonKey k;
  k.m1 = static_cast<int>((v >> 56) & 0xff);
  k.m3 = static_cast<int>((v >> 48) & 0xff);
  k.kind = static_cast<TrigKind>((v >> 40) & 0x1);
  k.k1 = static_cast<int>((v >> 16) & 0xffff) - kWaveOffset;
  k.k3 = static_cast<int>(v & 0xffff) - kWaveOffset;
  return k;
}

bool key_less(const PoissonTerm& a, const PoissonTerm& b) {
  return (a.key <=> b.key) < 0;
}

std::string format_coeff(double c) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorKind::io, "pseries",
                "malformed number '" + std::string(tok) + "' on line " + std::to_string(line));
  }
  return v;
}

int parse_int(std::string_view tok, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorKind::io, "pseries",
                "malformed integer '" + std::string(tok) + "' on line " + std::to_string(line));
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

void TruncationPolicy::validate() const {
  if (max_sqrtU_degree < 1 || max_poly_degree < 1 || max_ecc_degree < 1) {
    throw Error(ErrorKind::domain, "pseries", "truncation degrees must be >= 1");
  }
  if (max_sqrtU_degree > 200 || max_poly_degree > 200) {
    throw Error(ErrorKind::domain, "pseries", "truncation degree above 200 is not supported");
  }
}

void WeightVector::validate() const {
  if (!(R1 > 0.0) || !(R3 > 0.0)) {
    throw Error(ErrorKind::domain, "pseries", "weights R1, R3 must be positive");
  }
}

std::string_view to_string(TrigKind kind) { return kind == TrigKind::cos ? "cos" : "sin"; }

TrigKind trig_kind_from_string(std::string_view s) {
  if (s == "cos") return TrigKind::cos;
  if (s == "sin") return TrigKind::sin;
  throw Error(ErrorKind::io, "pseries", "unknown trig kind '" + std::string(s) + "'");
}

std::strong_ordering operator<=>(const PoissonKey& a, const PoissonKey& b) {
  if (auto c = a.degree() <=> b.degree(); c != 0) return c;
  if (auto c = a.m1 <=> b.m1; c != 0) return c;
  if (auto c = a.k1 <=> b.k1; c != 0) return c;
  if (auto c = a.k3 <=> b.k3; c != 0) return c;
  return static_cast<int>(a.kind) <=> static_cast<int>(b.kind);
}

int canonicalize(PoissonKey& key) {
  if (key.m1 < 0 || key.m3 < 0) {
    throw Error(ErrorKind::singular_derivative, "pseries", "negative sqrt(U) exponent");
  }
  const bool flip = key.k1 < 0 || (key.k1 == 0 && key.k3 < 0);
  if (key.kind == TrigKind::sin && key.k1 == 0 && key.k3 == 0) return 0;
  if (!flip) return 1;
  key.k1 = -key.k1;
  key.k3 = -key.k3;
  return key.kind == TrigKind::sin ? -1 : 1;
}

// ---------------------------------------------------------------------------

SeriesAccumulator::SeriesAccumulator(TruncationPolicy trunc) : trunc_(trunc) {}

void SeriesAccumulator::add(PoissonKey key, double coeff) {
  if (coeff == 0.0) return;
  const int sign = canonicalize(key);
  if (sign == 0) return;
  if (key.degree() > trunc_.max_sqrtU_degree) {
    dropped_mass_ += std::abs(coeff);
    return;
  }
  map_[pack(key)] += sign * coeff;
}

void SeriesAccumulator::add(const PoissonSeries& s, double factor) {
  for (const auto& t : s.terms()) add(t.key, factor * t.coeff);
  dropped_mass_ += std::abs(factor) * s.dropped_mass();
}

PoissonSeries SeriesAccumulator::finish() && {
  PoissonSeries out(trunc_);
  out.terms_.reserve(map_.size());
  for (const auto& [k, c] : map_) {
    if (c != 0.0 && std::isfinite(c)) out.terms_.push_back({unpack(k), c});
    else if (!std::isfinite(c)) {
      throw Error(ErrorKind::numeric, "pseries", "non-finite coefficient");
    }
  }
  std::sort(out.terms_.begin(), out.terms_.end(), key_less);
  out.dropped_mass_ = dropped_mass_;
  return out;
}

// ---------------------------------------------------------------------------

PoissonSeries::PoissonSeries(TruncationPolicy trunc) : trunc_(trunc) {}

PoissonSeries PoissonSeries::from_terms(std::span<const PoissonTerm> terms,
                                        TruncationPolicy trunc) {
  SeriesAccumulator acc(trunc);
  acc.reserve(terms.size());
  for (const auto& t : terms) acc.add(t.key, t.coeff);
  return std::move(acc).finish();
}

PoissonSeries PoissonSeries::constant(double c, TruncationPolicy trunc) {
  return term(c, PoissonKey{}, trunc);
}

PoissonSeries PoissonSeries::term(double c, PoissonKey key, TruncationPolicy trunc) {
  PoissonTerm t{key, c};
  return from_terms(std::span(&t, 1), trunc);
}

PoissonSeries PoissonSeries::action(int j, TruncationPolicy trunc) {
  PoissonKey k;
  (j == 1 ? k.m1 : k.m3) = 2;
  return term(1.0, k, trunc);
}

int PoissonSeries::max_degree() const {
  return terms_.empty() ? -1 : terms_.back().key.degree();
}

double PoissonSeries::coeff(const PoissonKey& key) const {
  PoissonTerm probe{key, 0.0};
  auto it = std::lower_bound(terms_.begin(), terms_.end(), probe, key_less);
  if (it != terms_.end() && it->key == key) return it->coeff;
  return 0.0;
}

std::span<const PoissonTerm> PoissonSeries::degree_block(int s) const {
  auto lo = std::partition_point(terms_.begin(), terms_.end(),
                                 [s](const PoissonTerm& t) { return t.key.degree() < s; });
  auto hi = std::partition_point(lo, terms_.end(),
                                 [s](const PoissonTerm& t) { return t.key.degree() <= s; });
  return {terms_.data() + (lo - terms_.begin()), static_cast<std::size_t>(hi - lo)};
}

PoissonSeries PoissonSeries::with_truncation(TruncationPolicy trunc) const {
  PoissonSeries out(trunc);
  out.dropped_mass_ = dropped_mass_;
  for (const auto& t : terms_) {
    if (t.key.degree() <= trunc.max_sqrtU_degree) out.terms_.push_back(t);
    else out.dropped_mass_ += std::abs(t.coeff);
  }
  return out;
}

PoissonSeries PoissonSeries::operator-() const {
  PoissonSeries out = *this;
  for (auto& t : out.terms_) t.coeff = -t.coeff;
  return out;
}

PoissonSeries& PoissonSeries::operator+=(const PoissonSeries& o) {
  // Merge of two sorted canonical term lists.
  std::vector<PoissonTerm> merged;
  merged.reserve(terms_.size() + o.terms_.size());
  auto a = terms_.begin();
  auto b = o.terms_.begin();
  double dropped = dropped_mass_ + o.dropped_mass_;
  auto push = [&](const PoissonTerm& t) {
    if (t.key.degree() > trunc_.max_sqrtU_degree) {
      dropped += std::abs(t.coeff);
    } else if (t.coeff != 0.0) {
      merged.push_back(t);
    }
  };
  while (a != terms_.end() || b != o.terms_.end()) {
    if (b == o.terms_.end() || (a != terms_.end() && key_less(*a, *b))) {
      push(*a++);
    } else if (a == terms_.end() || key_less(*b, *a)) {
      push(*b++);
    } else {
      push({a->key, a->coeff + b->coeff});
      ++a;
      ++b;
    }
  }
  terms_ = std::move(merged);
  dropped_mass_ = dropped;
  return *this;
}

PoissonSeries& PoissonSeries::operator-=(const PoissonSeries& o) { return *this += -o; }

PoissonSeries& PoissonSeries::operator*=(double f) {
  if (f == 0.0) {
    terms_.clear();
    dropped_mass_ = 0.0;
    return *this;
  }
  for (auto& t : terms_) t.coeff *= f;
  dropped_mass_ *= std::abs(f);
  return *this;
}

bool PoissonSeries::operator==(const PoissonSeries& o) const {
  if (terms_.size() != o.terms_.size()) return false;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!(terms_[i].key == o.terms_[i].key) || terms_[i].coeff != o.terms_[i].coeff) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

// Adds c * trig_a(A) * trig_b(B) * U^(m) into acc via product-to-sum.
inline void add_trig_product(SeriesAccumulator& acc, double c, int m1, int m3, TrigKind ka,
                             int a1, int a3, TrigKind kb, int b1, int b3) {
  const double h = 0.5 * c;
  PoissonKey diff{m1, m3, TrigKind::cos, a1 - b1, a3 - b3};
  PoissonKey sum{m1, m3, TrigKind::cos, a1 + b1, a3 + b3};
  if (ka == TrigKind::cos && kb == TrigKind::cos) {
    acc.add(diff, h);
    acc.add(sum, h);
  } else if (ka == TrigKind::sin && kb == TrigKind::sin) {
    acc.add(diff, h);
    acc.add(sum, -h);
  } else if (ka == TrigKind::sin) {
    diff.kind = sum.kind = TrigKind::sin;
    acc.add(sum, h);
    acc.add(diff, h);
  } else {
    diff.kind = sum.kind = TrigKind::sin;
    acc.add(sum, h);
    acc.add(diff, -h);
  }
}

// Suffix sums of |coeff| by degree: abs_from[d] = sum of |c| over terms with degree >= d.
std::vector<double> abs_suffix_by_degree(const PoissonSeries& s, int max_deg) {
  std::vector<double> out(static_cast<std::size_t>(max_deg) + 2, 0.0);
  for (const auto& t : s.terms()) {
    out[static_cast<std::size_t>(std::min(t.key.degree(), max_deg + 1))] += std::abs(t.coeff);
  }
  for (int d = max_deg; d >= 0; --d) out[d] += out[d + 1];
  return out;
}

}  // namespace

PoissonSeries multiply(const PoissonSeries& a, const PoissonSeries& b, TruncationPolicy trunc) {
  SeriesAccumulator acc(trunc);
  acc.reserve(a.size() * 2 + b.size() * 2);
  const int N = trunc.max_sqrtU_degree;
  const auto b_suffix = abs_suffix_by_degree(b, N + 1);
  double dropped = 0.0;
  for (const auto& ta : a.terms()) {
    const int room = N - ta.key.degree();
    if (room < 0) {
      dropped += std::abs(ta.coeff) * b_suffix[0];
      continue;
    }
    for (const auto& tb : b.terms()) {
      if (tb.key.degree() > room) {
        dropped += std::abs(ta.coeff) * b_suffix[static_cast<std::size_t>(room + 1)];
        break;
      }
      add_trig_product(acc, ta.coeff * tb.coeff, ta.key.m1 + tb.key.m1, ta.key.m3 + tb.key.m3,
                       ta.key.kind, ta.key.k1, ta.key.k3, tb.key.kind, tb.key.k1, tb.key.k3);
    }
  }
  acc.add_dropped(dropped);
  return std::move(acc).finish();
}

namespace {

// Exponent of sqrt(U_j) after d/dU_j together with its factor m_j/2.
inline bool action_derivative(const PoissonKey& k, int j, int& m1, int& m3, double& factor) {
  const int m = (j == 1) ? k.m1 : k.m3;
  if (m == 0) return false;
  factor = 0.5 * m;
  m1 = k.m1 - (j == 1 ? 2 : 0);
  m3 = k.m3 - (j == 3 ? 2 : 0);
  return true;
}

// d/du_j of {cos|sin}(k.u): returns factor and new kind.
inline bool angle_derivative(const PoissonKey& k, int j, TrigKind& kind, double& factor) {
  const int kj = (j == 1) ? k.k1 : k.k3;
  if (kj == 0) return false;
  if (k.kind == TrigKind::cos) {
    kind = TrigKind::sin;
    factor = -kj;
  } else {
    kind = TrigKind::cos;
    factor = kj;
  }
  return true;
}

[[noreturn]] void singular(const PoissonKey& a, const PoissonKey& b) {
  throw Error(ErrorKind::singular_derivative, "pseries",
              "bracket term with negative sqrt(U) exponent (m=(" + std::to_string(a.m1) + "," +
                  std::to_string(a.m3) + ") against m=(" + std::to_string(b.m1) + "," +
                  std::to_string(b.m3) + "))");
}

}  // namespace

PoissonSeries poisson_bracket(const PoissonSeries& f, const PoissonSeries& g,
                              TruncationPolicy trunc) {
  SeriesAccumulator acc(trunc);
  acc.reserve(2 * (f.size() + g.size()));
  const int N = trunc.max_sqrtU_degree;
  for (const auto& tf : f.terms()) {
    const int room = N + 2 - tf.key.degree();
    for (const auto& tg : g.terms()) {
      if (tg.key.degree() > room) break;
      for (int j : {1, 3}) {
        TrigKind kind;
        double fa, fb;
        int m1, m3;
        // df/du_j * dg/dU_j
        if (angle_derivative(tf.key, j, kind, fa) && action_derivative(tg.key, j, m1, m3, fb)) {
          const int e1 = tf.key.m1 + m1, e3 = tf.key.m3 + m3;
          if (e1 < 0 || e3 < 0) singular(tf.key, tg.key);
          add_trig_product(acc, tf.coeff * fa * tg.coeff * fb, e1, e3, kind, tf.key.k1,
                           tf.key.k3, tg.key.kind, tg.key.k1, tg.key.k3);
        }
        // - df/dU_j * dg/du_j
        if (action_derivative(tf.key, j, m1, m3, fa) && angle_derivative(tg.key, j, kind, fb)) {
          const int e1 = m1 + tg.key.m1, e3 = m3 + tg.key.m3;
          if (e1 < 0 || e3 < 0) singular(tf.key, tg.key);
          add_trig_product(acc, -tf.coeff * fa * tg.coeff * fb, e1, e3, tf.key.kind, tf.key.k1,
                           tf.key.k3, kind, tg.key.k1, tg.key.k3);
        }
      }
    }
  }
  return std::move(acc).finish();
}

PoissonSeries derivative_angle(const PoissonSeries& f, int j) {
  SeriesAccumulator acc(f.truncation());
  for (const auto& t : f.terms()) {
    TrigKind kind;
    double fa;
    if (!angle_derivative(t.key, j, kind, fa)) continue;
    PoissonKey k = t.key;
    k.kind = kind;
    acc.add(k, fa * t.coeff);
  }
  return std::move(acc).finish();
}

PoissonSeries derivative_action(const PoissonSeries& f, int j) {
  SeriesAccumulator acc(f.truncation());
  for (const auto& t : f.terms()) {
    int m1, m3;
    double fa;
    if (!action_derivative(t.key, j, m1, m3, fa)) continue;
    if (m1 < 0 || m3 < 0) {
      throw Error(ErrorKind::singular_derivative, "pseries",
                  "d/dU of a sqrt(U)^1 term is singular at U=0");
    }
    PoissonKey k = t.key;
    k.m1 = m1;
    k.m3 = m3;
    acc.add(k, fa * t.coeff);
  }
  return std::move(acc).finish();
}

double weighted_norm(const PoissonSeries& f, const WeightVector& R) {
  R.validate();
  const int n = std::max(f.max_degree(), 0) + 1;
  std::vector<double> w1(n), w3(n);
  const double s1 = std::sqrt(R.R1), s3 = std::sqrt(R.R3);
  w1[0] = w3[0] = 1.0;
  for (int m = 1; m < n; ++m) {
    w1[m] = w1[m - 1] * s1;
    w3[m] = w3[m - 1] * s3;
  }
  double sum = 0.0;
  for (const auto& t : f.terms()) sum += std::abs(t.coeff) * w1[t.key.m1] * w3[t.key.m3];
  return sum;
}

PoissonSeries homogeneous_part(const PoissonSeries& f, int s) {
  if (s < 0) throw Error(ErrorKind::domain, "pseries", "homogeneous_part: negative degree");
  auto block = f.degree_block(s);
  return PoissonSeries::from_terms(block, f.truncation());
}

double evaluate(const PoissonSeries& f, const ActionAnglePoint& p) {
  if (p.U1 < 0.0 || p.U3 < 0.0) {
    throw Error(ErrorKind::domain, "pseries", "evaluate: actions must be nonnegative");
  }
  const int n = std::max(f.max_degree(), 0) + 1;
  std::vector<double> w1(n), w3(n);
  const double s1 = std::sqrt(p.U1), s3 = std::sqrt(p.U3);
  w1[0] = w3[0] = 1.0;
  for (int m = 1; m < n; ++m) {
    w1[m] = w1[m - 1] * s1;
    w3[m] = w3[m - 1] * s3;
  }
  double sum = 0.0;
  for (const auto& t : f.terms()) {
    const double arg = t.key.k1 * p.u1 + t.key.k3 * p.u3;
    const double trig = t.key.kind == TrigKind::cos ? std::cos(arg) : std::sin(arg);
    sum += t.coeff * w1[t.key.m1] * w3[t.key.m3] * trig;
  }
  return sum;
}

PoissonSeries chop(const PoissonSeries& f, double threshold) {
  std::vector<PoissonTerm> kept;
  kept.reserve(f.size());
  for (const auto& t : f.terms()) {
    if (std::abs(t.coeff) > threshold) kept.push_back(t);
  }
  return PoissonSeries::from_terms(kept, f.truncation());
}

PoissonSeries angle_dependent_part(const PoissonSeries& f) {
  std::vector<PoissonTerm> kept;
  for (const auto& t : f.terms()) {
    if (!t.key.angle_free()) kept.push_back(t);
  }
  return PoissonSeries::from_terms(kept, f.truncation());
}

std::vector<std::size_t> term_counts(const PoissonSeries& f) {
  std::vector<std::size_t> out(static_cast<std::size_t>(std::max(f.max_degree(), 0)) + 1, 0);
  for (const auto& t : f.terms()) ++out[static_cast<std::size_t>(t.key.degree())];
  return out;
}

std::string to_text(const PoissonSeries& f) {
  std::string out;
  out.reserve(f.size() * 40);
  for (const auto& t : f.terms()) {
    out += format_coeff(t.coeff);
    out += ' ' + std::to_string(t.key.m1) + ' ' + std::to_string(t.key.m3) + ' ';
    out += to_string(t.key.kind);
    out += ' ' + std::to_string(t.key.k1) + ' ' + std::to_string(t.key.k3) + '\n';
  }
  return out;
}

PoissonSeries series_from_text(std::string_view text, TruncationPolicy trunc) {
  std::vector<PoissonTerm> terms;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) toks.push_back(line.substr(i, j - i));
      i = j;
    }
    if (toks.empty()) continue;
    if (toks.size() != 6) {
      throw Error(ErrorKind::io, "pseries",
                  "expected 6 fields on line " + std::to_string(line_no));
    }
    PoissonTerm t;
    t.coeff = parse_double(toks[0], line_no);
    t.key.m1 = parse_int(toks[1], line_no);
    t.key.m3 = parse_int(toks[2], line_no);
    t.key.kind = trig_kind_from_string(toks[3]);
    t.key.k1 = parse_int(toks[4], line_no);
    t.key.k3 = parse_int(toks[5], line_no);
    terms.push_back(t);
  }
  return PoissonSeries::from_terms(terms, trunc);
}

nlohmann::json to_json(const PoissonSeries& f) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : f.terms()) {
    arr.push_back({t.coeff, t.key.m1, t.key.m3, std::string(to_string(t.key.kind)), t.key.k1,
                   t.key.k3});
  }
  return arr;
}

PoissonSeries series_from_json(const nlohmann::json& j, TruncationPolicy trunc) {
  if (!j.is_array()) throw Error(ErrorKind::io, "pseries", "series JSON must be an array");
  std::vector<PoissonTerm> terms;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 6) {
      throw Error(ErrorKind::io, "pseries", "series JSON entries must be 6-tuples");
    }
    PoissonTerm t;
    t.coeff = e[0].get<double>();
    t.key.m1 = e[1].get<int>();
    t.key.m3 = e[2].get<int>();
    t.key.kind = trig_kind_from_string(e[3].get<std::string>());
    t.key.k1 = e[4].get<int>();
    t.key.k3 = e[5].get<int>();
    terms.push_back(t);
  }
  return PoissonSeries::from_terms(terms, trunc);
}

// ---------------------------------------------------------------------------
// Poly4

namespace {

bool exp_less(const Poly4Term& a, const Poly4Term& b) {
  const int da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  return a.exp < b.exp;
}

std::uint32_t pack4(const Exp4& e) {
  return (static_cast<std::uint32_t>(e[0]) << 24) | (static_cast<std::uint32_t>(e[1]) << 16) |
         (static_cast<std::uint32_t>(e[2]) << 8) | static_cast<std::uint32_t>(e[3]);
}

Exp4 unpack4(std::uint32_t v) {
  return {static_cast<int>(v >> 24), static_cast<int>((v >> 16) & 0xff),
          static_cast<int>((v >> 8) & 0xff), static_cast<int>(v & 0xff)};
}

Poly4 from_map(const std::unordered_map<std::uint32_t, double>& m, TruncationPolicy trunc) {
  std::vector<Poly4Term> terms;
  terms.reserve(m.size());
  for (const auto& [k, c] : m) {
    if (c != 0.0) terms.push_back({unpack4(k), c});
  }
  return Poly4::from_terms(terms, trunc);
}

}  // namespace

Poly4::Poly4(TruncationPolicy trunc) : trunc_(trunc) {}

Poly4 Poly4::from_terms(std::span<const Poly4Term> terms, TruncationPolicy trunc) {
  Poly4 out(trunc);
  std::unordered_map<std::uint32_t, double> m;
  m.reserve(terms.size());
  for (const auto& t : terms) {
    for (int v : t.exp) {
      if (v < 0 || v > 255) throw Error(ErrorKind::domain, "pseries", "Poly4 exponent out of range");
    }
    if (t.degree() > trunc.max_poly_degree || t.coeff == 0.0) continue;
    if (!std::isfinite(t.coeff)) throw Error(ErrorKind::numeric, "pseries", "non-finite coefficient");
    m[pack4(t.exp)] += t.coeff;
  }
  out.terms_.reserve(m.size());
  for (const auto& [k, c] : m) {
    if (c != 0.0) out.terms_.push_back({unpack4(k), c});
  }
  std::sort(out.terms_.begin(), out.terms_.end(), exp_less);
  return out;
}

int Poly4::max_degree() const { return terms_.empty() ? -1 : terms_.back().degree(); }

double Poly4::coeff(const Exp4& e) const {
  Poly4Term probe{e, 0.0};
  auto it = std::lower_bound(terms_.begin(), terms_.end(), probe, exp_less);
  if (it != terms_.end() && it->exp == e) return it->coeff;
  return 0.0;
}

Poly4& Poly4::operator+=(const Poly4& o) {
  std::vector<Poly4Term> all = terms_;
  all.insert(all.end(), o.terms_.begin(), o.terms_.end());
  *this = from_terms(all, trunc_);
  return *this;
}

Poly4& Poly4::operator*=(double f) {
  if (f == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coeff *= f;
  return *this;
}

Poly4 multiply(const Poly4& a, const Poly4& b, TruncationPolicy trunc) {
  std::unordered_map<std::uint32_t, double> m;
  m.reserve(a.size() + b.size());
  const int N = trunc.max_poly_degree;
  for (const auto& ta : a.terms()) {
    const int room = N - ta.degree();
    if (room < 0) break;
    for (const auto& tb : b.terms()) {
      if (tb.degree() > room) break;
      const Exp4 e{ta.exp[0] + tb.exp[0], ta.exp[1] + tb.exp[1], ta.exp[2] + tb.exp[2],
                   ta.exp[3] + tb.exp[3]};
      m[pack4(e)] += ta.coeff * tb.coeff;
    }
  }
  return from_map(m, trunc);
}

Poly4 homogeneous_part(const Poly4& q, int degree) {
  std::vector<Poly4Term> kept;
  for (const auto& t : q.terms()) {
    if (t.degree() == degree) kept.push_back(t);
  }
  return Poly4::from_terms(kept, q.truncation());
}

Poly4 derivative(const Poly4& q, int var) {
  std::vector<Poly4Term> out;
  for (const auto& t : q.terms()) {
    if (t.exp[var] == 0) continue;
    Poly4Term d = t;
    d.coeff *= t.exp[var];
    --d.exp[var];
    out.push_back(d);
  }
  return Poly4::from_terms(out, q.truncation());
}

double evaluate(const Poly4& q, const std::array<double, 4>& x) {
  const int n = std::max(q.max_degree(), 0) + 1;
  std::vector<double> pw(4 * static_cast<std::size_t>(n));
  for (int v = 0; v < 4; ++v) {
    pw[v * n] = 1.0;
    for (int k = 1; k < n; ++k) pw[v * n + k] = pw[v * n + k - 1] * x[v];
  }
  double sum = 0.0;
  for (const auto& t : q.terms()) {
    sum += t.coeff * pw[t.exp[0]] * pw[n + t.exp[1]] * pw[2 * n + t.exp[2]] *
           pw[3 * n + t.exp[3]];
  }
  return sum;
}

Poly4 chop(const Poly4& q, double threshold) {
  std::vector<Poly4Term> kept;
  for (const auto& t : q.terms()) {
    if (std::abs(t.coeff) > threshold) kept.push_back(t);
  }
  return Poly4::from_terms(kept, q.truncation());
}

namespace {

// Coefficients of (M00 y0 + M01 y1)^a (M10 y0 + M11 y1)^b, indexed by the
// power t of y1 (the power of y0 is a+b-t).
std::vector<std::vector<std::vector<double>>> pair_powers(const Mat2& M, int N) {
  auto power_table = [N](double c0, double c1) {
    std::vector<std::vector<double>> p(static_cast<std::size_t>(N) + 1);
    p[0] = {1.0};
    for (int n = 1; n <= N; ++n) {
      p[n].assign(static_cast<std::size_t>(n) + 1, 0.0);
      for (int t = 0; t < n; ++t) {
        p[n][t] += p[n - 1][t] * c0;
        p[n][t + 1] += p[n - 1][t] * c1;
      }
    }
    return p;
  };
  const auto L0 = power_table(M[0][0], M[0][1]);
  const auto L1 = power_table(M[1][0], M[1][1]);
  std::vector<std::vector<std::vector<double>>> P(static_cast<std::size_t>(N) + 1);
  for (int a = 0; a <= N; ++a) {
    P[a].resize(static_cast<std::size_t>(N - a) + 1);
    for (int b = 0; a + b <= N; ++b) {
      auto& v = P[a][b];
      v.assign(static_cast<std::size_t>(a + b) + 1, 0.0);
      for (int i = 0; i <= a; ++i) {
        for (int j = 0; j <= b; ++j) v[i + j] += L0[a][i] * L1[b][j];
      }
    }
  }
  return P;
}

}  // namespace

Poly4 linear_substitute(const Poly4& q, const Mat2& A, const Mat2& B) {
  const int N = std::max(q.max_degree(), 0);
  const auto PA = pair_powers(A, N);
  const auto PB = pair_powers(B, N);
  // Stage 1: action pair.
  std::unordered_map<std::uint32_t, double> stage;
  stage.reserve(q.size() * 4);
  for (const auto& t : q.terms()) {
    const int a = t.exp[0], b = t.exp[1];
    const auto& v = PA[a][b];
    for (int s = 0; s <= a + b; ++s) {
      if (v[s] == 0.0) continue;
      stage[pack4({a + b - s, s, t.exp[2], t.exp[3]})] += t.coeff * v[s];
    }
  }
  // Stage 2: angle pair. Iterate in sorted key order so the summation order
  // is independent of hash-map layout.
  std::vector<std::pair<std::uint32_t, double>> ordered(stage.begin(), stage.end());
  std::sort(ordered.begin(), ordered.end());
  std::unordered_map<std::uint32_t, double> out;
  out.reserve(ordered.size() * 2);
  for (const auto& [key, c] : ordered) {
    const Exp4 e = unpack4(key);
    const int a = e[2], b = e[3];
    const auto& v = PB[a][b];
    for (int s = 0; s <= a + b; ++s) {
      if (v[s] == 0.0) continue;
      out[pack4({e[0], e[1], a + b - s, s})] += c * v[s];
    }
  }
  std::vector<std::pair<std::uint32_t, double>> fin(out.begin(), out.end());
  std::sort(fin.begin(), fin.end());
  std::vector<Poly4Term> terms;
  terms.reserve(fin.size());
  for (const auto& [k, c] : fin) terms.push_back({unpack4(k), c});
  return Poly4::from_terms(terms, q.truncation());
}

std::string to_text(const Poly4& q) {
  std::string out;
  for (const auto& t : q.terms()) {
    out += format_coeff(t.coeff);
    for (int v : t.exp) out += ' ' + std::to_string(v);
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Poly4& q) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : q.terms()) {
    arr.push_back({t.coeff, t.exp[0], t.exp[1], t.exp[2], t.exp[3]});
  }
  return arr;
}

}  // namespace cassini
