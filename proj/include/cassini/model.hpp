#pragma once

// Averaged resonant spin-orbit Hamiltonian
//   H(S1,S3,s1,s3) = n_o S1^2/2 - n_o S1 + Omega_dot S3 + <V>(S1,S3,s1,s3)
// in modified Andoyer-Delaunay resonant variables, with the wobble J = 0.
//
// The obliquity enters through x = 1 - cos K = S3/S1 and sK = sin K; every
// coefficient of <V> is a polynomial in the basis {1, x, x^2, sK, sK x}.

#include <array>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "cassini/pseries.hpp"

namespace cassini {

struct BodyParams {
  double M_kg = 0.0;        // central mass
  double J2 = 0.0;
  double C22 = 0.0;
  double C_norm = 0.0;      // C / (m Re^2)
  double a_km = 0.0;
  double e = 0.0;
  double i = 0.0;           // rad
  double Omega_dot = 0.0;   // rad/year
  double n_o = 0.0;         // rad/year
  double G_const = 6.67430e-11;

  void validate() const;
};

// Table values of the Titan run.
BodyParams titan_params();

struct DerivedParams {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double n_o_star = 0.0;  // rad/year
  double delta1 = 0.0;
  double delta2 = 0.0;
};

DerivedParams derive_params(const BodyParams& p);

// Polynomial in (x, sK) reduced with sK^2 = 2x - x^2.
template <class T>
struct KPolyT {
  // Coefficients of 1, x, x^2, sK, sK*x.
  std::array<T, 5> c{};

  T eval(double x, double sK) const {
    return c[0] + x * (c[1] + x * c[2]) + sK * (c[3] + x * c[4]);
  }
};
using KPoly = KPolyT<double>;

// Same polynomial in the basis {1, cK, cK^2, sK, sK*cK}.
std::array<double, 5> to_cos_basis(const KPoly& p);

struct Harmonic {
  int k1 = 0;  // multiple of sigma1
  int k3 = 0;  // multiple of sigma3
  TrigKind kind = TrigKind::cos;
  KPoly coeff;  // rad/year
};

// Harmonic of the averaged potential that still depends on the argument of
// the pericenter g_o: coefficient of {cos|sin}(k1 s1 + k3 s3 + kg g_o).
struct PericenterTerm {
  int k1 = 0;
  int k3 = 0;
  int kg = 0;
  TrigKind kind = TrigKind::cos;
  KPoly coeff;
};

struct AveragedPotential {
  std::vector<Harmonic> harmonics;  // sorted by (k1, k3, kind)
  // Flagged and dropped from the two-degree-of-freedom Hamiltonian.
  std::vector<PericenterTerm> pericenter_terms;

  // Largest |coefficient| among the pericenter terms at obliquity K.
  double pericenter_residual(double K) const;

  const Harmonic* find(int k1, int k3, TrigKind kind = TrigKind::cos) const;
  double value(double x, double sK, double s1, double s3) const;
};

// Multi-angle Fourier series with complex (x, sK) coefficients in the angles
// (sigma1, sigma3, l_o, g_o): sum c_n exp(i n.angles).
class DirectionSeries {
 public:
  using Key = std::array<int, 4>;
  using Coeff = KPolyT<std::complex<double>>;

  std::map<Key, Coeff> terms;

  // Real part of the sum at the given angles (the series are real-valued).
  double evaluate(double K, double s1, double s3, double l, double g) const;
};

struct BodyDirection {
  DirectionSeries x3, y3, z3;
};

// Unit vector to the perturber in the body frame, Kepler expansions
// substituted at the body's eccentricity.
BodyDirection body_direction_series(const BodyParams& p, TruncationPolicy trunc);

AveragedPotential averaged_potential(const BodyParams& p, TruncationPolicy trunc);

class HamiltonianModel {
 public:
  HamiltonianModel() = default;
  HamiltonianModel(BodyParams p, DerivedParams d, AveragedPotential v, TruncationPolicy trunc);

  const BodyParams& params() const { return params_; }
  const DerivedParams& derived() const { return derived_; }
  const AveragedPotential& potential() const { return potential_; }
  const TruncationPolicy& truncation() const { return trunc_; }

  double value(double S1, double S3, double s1, double s3) const;
  // (dH/dS1, dH/dS3, dH/ds1, dH/ds3).
  std::array<double, 4> gradient(double S1, double S3, double s1, double s3) const;

  // Taylor polynomial of H in (dS1, dS3, s1, s3) about (S1, S3, 0, 0), to the
  // given total degree, constant term included.
  Poly4 expand_about(double S1, double S3, int degree) const;

  // Text dump: "coeff k1 k3 kind basis" lines plus the kinetic part.
  std::string to_text() const;

 private:
  BodyParams params_;
  DerivedParams derived_;
  AveragedPotential potential_;
  TruncationPolicy trunc_;
};

HamiltonianModel assemble_hamiltonian(const BodyParams& p, TruncationPolicy trunc);

}  // namespace cassini
