#include "cassini/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cassini/errors.hpp"
#include "cassini/orbexp.hpp"
#include "taylor2.hpp"

namespace cassini {

namespace {

constexpr double kSecondsPerYear = 365.25 * 86400.0;

using cplx = std::complex<double>;
using CK = DirectionSeries::Coeff;
using Key = DirectionSeries::Key;

// Product in the (x, sK) basis. Inputs whose product would need x^3 or
// sK x^2 are rejected; the rotation chain never produces them.
template <class T>
KPolyT<T> kmul(const KPolyT<T>& a, const KPolyT<T>& b) {
  // even part e(x) = c0 + c1 x + c2 x^2, odd part o(x) = c3 + c4 x
  T e[5] = {}, o[4] = {};
  const T ea[3] = {a.c[0], a.c[1], a.c[2]}, eb[3] = {b.c[0], b.c[1], b.c[2]};
  const T oa[2] = {a.c[3], a.c[4]}, ob[2] = {b.c[3], b.c[4]};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) e[i + j] += ea[i] * eb[j];
    for (int j = 0; j < 2; ++j) {
      o[i + j] += ea[i] * ob[j];
      o[j + i] += oa[j] * eb[i];
    }
  }
  // sK^2 = 2x - x^2
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const T p = oa[i] * ob[j];
      e[i + j + 1] += 2.0 * p;
      e[i + j + 2] -= p;
    }
  }
  if (e[3] != T{} || e[4] != T{} || o[2] != T{} || o[3] != T{}) {
    throw Error(ErrorKind::numeric, "model", "obliquity polynomial exceeds the (x, sK) basis");
  }
  return KPolyT<T>{{e[0], e[1], e[2], o[0], o[1]}};
}

[[maybe_unused]] bool is_zero(const CK& c) {
  for (const auto& v : c.c) {
    if (v != cplx{}) return false;
  }
  return true;
}

CK scaled(const CK& c, cplx f) {
  CK out = c;
  for (auto& v : out.c) v *= f;
  return out;
}

CK& accumulate(CK& into, const CK& c) {
  for (int i = 0; i < 5; ++i) into.c[i] += c.c[i];
  return into;
}

DirectionSeries single(Key k, CK c) {
  DirectionSeries s;
  s.terms[k] = c;
  return s;
}

CK kconst(cplx v) { return CK{{v, 0.0, 0.0, 0.0, 0.0}}; }

DirectionSeries operator+(const DirectionSeries& a, const DirectionSeries& b) {
  DirectionSeries out = a;
  for (const auto& [k, c] : b.terms) accumulate(out.terms[k], c);
  return out;
}

DirectionSeries operator*(const DirectionSeries& a, cplx f) {
  DirectionSeries out;
  for (const auto& [k, c] : a.terms) out.terms[k] = scaled(c, f);
  return out;
}

DirectionSeries operator-(const DirectionSeries& a, const DirectionSeries& b) {
  return a + b * cplx(-1.0);
}

DirectionSeries operator*(const DirectionSeries& a, const DirectionSeries& b) {
  DirectionSeries out;
  for (const auto& [ka, ca] : a.terms) {
    for (const auto& [kb, cb] : b.terms) {
      const Key k{ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2], ka[3] + kb[3]};
      accumulate(out.terms[k], kmul(ca, cb));
    }
  }
  return out;
}

DirectionSeries times_k(const DirectionSeries& a, const CK& kp) {
  DirectionSeries out;
  for (const auto& [k, c] : a.terms) out.terms[k] = kmul(c, kp);
  return out;
}

DirectionSeries conj(const DirectionSeries& a) {
  DirectionSeries out;
  for (const auto& [k, c] : a.terms) {
    CK cc;
    for (int i = 0; i < 5; ++i) cc.c[i] = std::conj(c.c[i]);
    out.terms[{-k[0], -k[1], -k[2], -k[3]}] = cc;
  }
  return out;
}

// exp(i n l) expansion of a cos-only / sin-only Kepler function pair
// A(l) + i B(l), with A = sum A_k cos kl, B = sum B_k sin kl.
DirectionSeries exp_series(const EccExpansion& A, const EccExpansion* B, double e) {
  DirectionSeries out;
  const int K = std::max(A.max_harmonic(), B ? B->max_harmonic() : 0);
  for (int k = 0; k <= K; ++k) {
    const double a = A.fourier(e, k, TrigKind::cos);
    const double b = B ? B->fourier(e, k, TrigKind::sin) : 0.0;
    if (k == 0) {
      if (a != 0.0) out.terms[{0, 0, 0, 0}] = kconst(a);
      continue;
    }
    if (a + b != 0.0) out.terms[{0, 0, k, 0}] = kconst(0.5 * (a + b));
    if (a - b != 0.0) out.terms[{0, 0, -k, 0}] = kconst(0.5 * (a - b));
  }
  return out;
}

// cos and sin of an angle with key `k`, as exponentials.
std::pair<DirectionSeries, DirectionSeries> cos_sin(Key k) {
  const Key m{-k[0], -k[1], -k[2], -k[3]};
  auto plus = single(k, kconst(1.0)), minus = single(m, kconst(1.0));
  return {(plus + minus) * cplx(0.5), (plus - minus) * cplx(0.0, -0.5)};
}

}  // namespace

void BodyParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::domain, "model", what); };
  if (!(M_kg > 0.0)) fail("M must be positive");
  if (!(J2 >= 0.0) || !(C22 >= 0.0)) fail("J2 and C22 must be nonnegative");
  if (!(C_norm > 0.0)) fail("C/(m Re^2) must be positive");
  if (!(a_km > 0.0)) fail("semi-major axis must be positive");
  if (!(e >= 0.0 && e < 1.0)) fail("eccentricity must be in [0,1)");
  if (!(i >= 0.0 && i < M_PI / 2)) fail("inclination must be in [0,pi/2)");
  if (!std::isfinite(Omega_dot)) fail("node rate must be finite");
  if (!(n_o > 0.0)) fail("mean motion must be positive");
  if (!(G_const > 0.0)) fail("G must be positive");
}

BodyParams titan_params() {
  BodyParams p;
  p.M_kg = 5.683200e26;
  p.J2 = 3.180800e-5;
  p.C22 = 9.983000e-6;
  p.C_norm = 3.414000e-1;
  p.a_km = 1.221865e6;
  p.e = 2.890000e-2;
  p.i = 5.579818e-3;
  p.Omega_dot = -8.931240e-3;
  p.n_o = 1.439240e2;
  return p;
}

DerivedParams derive_params(const BodyParams& p) {
  p.validate();
  DerivedParams d;
  d.gamma1 = p.J2 / p.C_norm;
  d.gamma2 = 2.0 * p.C22 / p.C_norm;
  const double a_m = p.a_km * 1e3;
  d.n_o_star = std::sqrt(p.G_const * p.M_kg / (a_m * a_m * a_m)) * kSecondsPerYear;
  const double ratio = d.n_o_star / p.n_o;
  d.delta1 = -1.5 * ratio * ratio * d.gamma1;
  d.delta2 = -1.5 * ratio * ratio * d.gamma2;
  return d;
}

std::array<double, 5> to_cos_basis(const KPoly& p) {
  // x = 1 - cK
  const auto& c = p.c;
  return {c[0] + c[1] + c[2], -c[1] - 2.0 * c[2], c[2], c[3] + c[4], -c[4]};
}

double DirectionSeries::evaluate(double K, double s1, double s3, double l, double g) const {
  const double x = 1.0 - std::cos(K), sK = std::sin(K);
  cplx sum = 0.0;
  for (const auto& [k, c] : terms) {
    const double arg = k[0] * s1 + k[1] * s3 + k[2] * l + k[3] * g;
    sum += c.eval(x, sK) * std::polar(1.0, arg);
  }
  return sum.real();
}

BodyDirection body_direction_series(const BodyParams& p, TruncationPolicy trunc) {
  trunc.validate();
  const auto kep = kepler_expansions(trunc.max_ecc_degree);
  const DirectionSeries eiv = exp_series(kep.cos_v, &kep.sin_v, p.e);
  const DirectionSeries eig = single({0, 0, 0, 1}, kconst(1.0));
  const DirectionSeries eith = eiv * eig;  // exp(i(v + g_o))
  const DirectionSeries cos_th = (eith + conj(eith)) * cplx(0.5);
  const DirectionSeries sin_th = (eith - conj(eith)) * cplx(0.0, -0.5);

  // R_x(-i) (cos th, sin th, 0)
  const DirectionSeries X = cos_th;
  const DirectionSeries Y = sin_th * cplx(std::cos(p.i));
  const DirectionSeries Z = sin_th * cplx(std::sin(p.i));

  // R_z(-sigma3): node of the spin relative to the orbit, h_s - h_o = -sigma3
  const auto [c3, s3] = cos_sin({0, 1, 0, 0});
  const DirectionSeries x1 = c3 * X - s3 * Y;
  const DirectionSeries y1 = s3 * X + c3 * Y;
  const DirectionSeries& z1 = Z;

  // R_x(K), with cos K = 1 - x
  const CK cK{{1.0, -1.0, 0.0, 0.0, 0.0}};
  const CK sK{{0.0, 0.0, 0.0, 1.0, 0.0}};
  const DirectionSeries y2 = times_k(y1, cK) + times_k(z1, sK);
  const DirectionSeries z2 = times_k(z1, cK) - times_k(y1, sK);

  // R_z(psi), psi = l_s + g_s = sigma1 + sigma3 + l_o + g_o
  const DirectionSeries w2 = x1 + y2 * cplx(0.0, 1.0);
  const DirectionSeries w3 = single({-1, -1, -1, -1}, kconst(1.0)) * w2;
  BodyDirection out;
  out.x3 = (w3 + conj(w3)) * cplx(0.5);
  out.y3 = (w3 - conj(w3)) * cplx(0.0, -0.5);
  out.z3 = z2;
  return out;
}

const Harmonic* AveragedPotential::find(int k1, int k3, TrigKind kind) const {
  for (const auto& h : harmonics) {
    if (h.k1 == k1 && h.k3 == k3 && h.kind == kind) return &h;
  }
  return nullptr;
}

double AveragedPotential::pericenter_residual(double K) const {
  const double x = 1.0 - std::cos(K), sK = std::sin(K);
  double m = 0.0;
  for (const auto& t : pericenter_terms) m = std::max(m, std::abs(t.coeff.eval(x, sK)));
  return m;
}

double AveragedPotential::value(double x, double sK, double s1, double s3) const {
  double v = 0.0;
  for (const auto& h : harmonics) {
    const double arg = h.k1 * s1 + h.k3 * s3;
    v += h.coeff.eval(x, sK) * (h.kind == TrigKind::cos ? std::cos(arg) : std::sin(arg));
  }
  return v;
}

AveragedPotential averaged_potential(const BodyParams& p, TruncationPolicy trunc) {
  const DerivedParams d = derive_params(p);
  AveragedPotential out;
  if (d.delta1 == 0.0 && d.delta2 == 0.0) return out;

  const auto kep = kepler_expansions(trunc.max_ecc_degree);
  const DirectionSeries ar3 = exp_series(kep.a_over_r_cubed, nullptr, p.e);
  const BodyDirection dir = body_direction_series(p, trunc);
  const DirectionSeries xx = dir.x3 * dir.x3, yy = dir.y3 * dir.y3;
  const DirectionSeries shape = (xx + yy) * cplx(d.delta1) + (xx - yy) * cplx(d.delta2);

  // Average over l_o: keep only the l_o-free part of (a/r)^3 * shape.
  std::map<std::array<int, 3>, CK> avg;  // (k1, k3, kg)
  for (const auto& [ka, ca] : ar3.terms) {
    for (const auto& [kb, cb] : shape.terms) {
      if (ka[2] + kb[2] != 0) continue;
      accumulate(avg[{ka[0] + kb[0], ka[1] + kb[1], ka[3] + kb[3]}], kmul(ca, cb));
    }
  }

  double scale = 0.0;
  for (const auto& [k, c] : avg) {
    for (const auto& v : c.c) scale = std::max(scale, std::abs(v));
  }
  const double noise = 1e-15 * scale;

  // Real form: c_n e^{i n.s} + conj(c_n) e^{-i n.s} = 2 Re c_n cos - 2 Im c_n sin.
  for (const auto& [k, c] : avg) {
    const bool canonical = k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] >= 0)));
    if (!canonical) continue;
    const bool zero_wave = k[0] == 0 && k[1] == 0 && k[2] == 0;
    const double f = zero_wave ? 1.0 : 2.0;
    KPoly re, im;
    double mag = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double r = f * p.n_o * c.c[j].real(), q = -f * p.n_o * c.c[j].imag();
      re.c[j] = std::abs(r) > noise * p.n_o ? r : 0.0;
      im.c[j] = (!zero_wave && std::abs(q) > noise * p.n_o) ? q : 0.0;
      mag = std::max({mag, std::abs(re.c[j]), std::abs(im.c[j])});
    }
    if (mag == 0.0) continue;
    auto nonzero = [](const KPoly& kp) {
      return std::any_of(kp.c.begin(), kp.c.end(), [](double v) { return v != 0.0; });
    };
    if (k[2] != 0) {
      if (nonzero(re)) out.pericenter_terms.push_back({k[0], k[1], k[2], TrigKind::cos, re});
      if (nonzero(im)) out.pericenter_terms.push_back({k[0], k[1], k[2], TrigKind::sin, im});
      continue;
    }
    if (nonzero(re)) out.harmonics.push_back({k[0], k[1], TrigKind::cos, re});
    if (nonzero(im)) out.harmonics.push_back({k[0], k[1], TrigKind::sin, im});
  }
  std::sort(out.harmonics.begin(), out.harmonics.end(), [](const Harmonic& a, const Harmonic& b) {
    return std::tie(a.k1, a.k3, a.kind) < std::tie(b.k1, b.k3, b.kind);
  });
  return out;
}

HamiltonianModel::HamiltonianModel(BodyParams p, DerivedParams d, AveragedPotential v,
                                   TruncationPolicy trunc)
    : params_(p), derived_(d), potential_(std::move(v)), trunc_(trunc) {}

double HamiltonianModel::value(double S1, double S3, double s1, double s3) const {
  if (!(S1 > 0.0) || S3 < 0.0 || S3 > 2.0 * S1) {
    throw Error(ErrorKind::domain, "model", "actions outside 0 <= S3/S1 <= 2");
  }
  const double x = S3 / S1, sK = std::sqrt(std::max(0.0, x * (2.0 - x)));
  const double n = params_.n_o;
  return n * S1 * S1 / 2 - n * S1 + params_.Omega_dot * S3 + potential_.value(x, sK, s1, s3);
}

std::array<double, 4> HamiltonianModel::gradient(double S1, double S3, double s1,
                                                 double s3) const {
  if (!(S1 > 0.0) || S3 < 0.0 || S3 > 2.0 * S1) {
    throw Error(ErrorKind::domain, "model", "actions outside 0 <= S3/S1 <= 2");
  }
  const double x = S3 / S1, sK = std::sqrt(std::max(0.0, x * (2.0 - x)));
  const double n = params_.n_o;
  std::array<double, 4> g{n * S1 - n, params_.Omega_dot, 0.0, 0.0};
  for (const auto& h : potential_.harmonics) {
    const auto& c = h.coeff.c;
    const double arg = h.k1 * s1 + h.k3 * s3;
    const double tr = h.kind == TrigKind::cos ? std::cos(arg) : std::sin(arg);
    const double dtr = h.kind == TrigKind::cos ? -std::sin(arg) : std::cos(arg);
    double dC = c[1] + 2.0 * x * c[2] + sK * c[4];
    const double odd = c[3] + x * c[4];
    if (odd != 0.0) {
      if (sK == 0.0) throw Error(ErrorKind::domain, "model", "sin K derivative singular at K=0");
      dC += (1.0 - x) / sK * odd;
    }
    const double C = h.coeff.eval(x, sK);
    g[0] += dC * (-x / S1) * tr;
    g[1] += dC * (1.0 / S1) * tr;
    g[2] += C * h.k1 * dtr;
    g[3] += C * h.k3 * dtr;
  }
  return g;
}

Poly4 HamiltonianModel::expand_about(double S1, double S3, int degree) const {
  if (degree < 0) throw Error(ErrorKind::domain, "model", "negative expansion degree");
  if (!(S1 > 0.0) || S3 < 0.0 || S3 > 2.0 * S1) {
    throw Error(ErrorKind::domain, "model", "expansion point outside 0 <= S3/S1 <= 2");
  }
  const int N = degree;
  using detail::Taylor2;
  const Taylor2 dS1 = Taylor2::variable(N, 0), dS3 = Taylor2::variable(N, 1);
  const Taylor2 s1 = dS1 + S1, s3 = dS3 + S3;
  const Taylor2 x = s3 * detail::reciprocal(s1);
  const Taylor2 one = Taylor2::constant(N, 1.0);

  bool need_sK = false;
  for (const auto& h : potential_.harmonics) need_sK |= h.coeff.c[3] != 0.0 || h.coeff.c[4] != 0.0;
  Taylor2 sK = Taylor2::constant(N, 0.0);
  if (need_sK) {
    if (S3 <= 0.0) throw Error(ErrorKind::domain, "model", "sin K is not analytic at K=0");
    sK = detail::sqrt(x * (one * 2.0 - x));
  }
  const Taylor2 x2 = x * x, sKx = sK * x;

  TruncationPolicy tp = trunc_;
  tp.max_poly_degree = std::max(tp.max_poly_degree, N);
  std::vector<Poly4Term> terms;

  // Kinetic and node-precession part.
  const double n = params_.n_o;
  terms.push_back({{0, 0, 0, 0}, n * S1 * S1 / 2 - n * S1 + params_.Omega_dot * S3});
  if (N >= 1) {
    terms.push_back({{1, 0, 0, 0}, n * S1 - n});
    terms.push_back({{0, 1, 0, 0}, params_.Omega_dot});
  }
  if (N >= 2) terms.push_back({{2, 0, 0, 0}, n / 2});

  // Taylor coefficients of cos/sin(k1 s1 + k3 s3) at s = 0.
  std::vector<double> inv_fact(N + 1, 1.0);
  for (int k = 1; k <= N; ++k) inv_fact[k] = inv_fact[k - 1] / k;

  for (const auto& h : potential_.harmonics) {
    const auto& c = h.coeff.c;
    Taylor2 C = one * c[0];
    if (c[1] != 0.0) C += x * c[1];
    if (c[2] != 0.0) C += x2 * c[2];
    if (c[3] != 0.0) C += sK * c[3];
    if (c[4] != 0.0) C += sKx * c[4];
    for (int a = 0; a <= N; ++a) {
      for (int b = 0; a + b <= N; ++b) {
        const double cab = C.at(a, b);
        if (cab == 0.0) continue;
        for (int p = 0; a + b + p <= N; ++p) {
          for (int q = 0; a + b + p + q <= N; ++q) {
            const int m = p + q;
            double der;
            if (h.kind == TrigKind::cos) {
              if (m % 2) continue;
              der = (m / 2) % 2 ? -1.0 : 1.0;
            } else {
              if (m % 2 == 0) continue;
              der = ((m - 1) / 2) % 2 ? -1.0 : 1.0;
            }
            const double t = der * std::pow(h.k1, p) * std::pow(h.k3, q) * inv_fact[p] * inv_fact[q];
            if (t == 0.0) continue;
            terms.push_back({{a, b, p, q}, cab * t});
          }
        }
      }
    }
  }
  return Poly4::from_terms(terms, tp);
}

std::string HamiltonianModel::to_text() const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "# kinetic: %.17g*S1^2/2 - %.17g*S1 + %.17g*S3\n", params_.n_o,
                params_.n_o, params_.Omega_dot);
  out += buf;
  out += "# coeff k1 k3 kind basis   (basis in cos K, sin K)\n";
  static const char* names[5] = {"1", "cosK", "cosK^2", "sinK", "sinK*cosK"};
  for (const auto& h : potential_.harmonics) {
    const auto cb = to_cos_basis(h.coeff);
    for (int j = 0; j < 5; ++j) {
      if (cb[j] == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g %d %d %s %s\n", cb[j], h.k1, h.k3,
                    h.kind == TrigKind::cos ? "cos" : "sin", names[j]);
      out += buf;
    }
  }
  return out;
}

HamiltonianModel assemble_hamiltonian(const BodyParams& p, TruncationPolicy trunc) {
  trunc.validate();
  return HamiltonianModel(p, derive_params(p), averaged_potential(p, trunc), trunc);
}

}  // namespace cassini
