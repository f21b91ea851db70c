#pragma once

// Remainder norms, escape-time estimates and parameter scans.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cassini/birkhoff.hpp"
#include "cassini/equil.hpp"
#include "cassini/errors.hpp"
#include "cassini/model.hpp"

namespace cassini {

// Exponent a in tau = (rho - rho0) / (c |{U,R}|_R rho^a).
//   printed:     a = r/2 + 1
//   homogeneous: a = (r+3)/2, the scaling of the sqrt(U)-degree r+3 block
enum class ExponentVariant { printed, homogeneous };

std::string_view to_string(ExponentVariant v);
ExponentVariant exponent_variant_from_string(std::string_view s);

double tau_exponent(int r, ExponentVariant v);
double optimal_rho(double rho0, int r, ExponentVariant v = ExponentVariant::printed);

// max_j |dR/du_j|_R / R_j for the first remainder block of H^(r).
// Returns 0 when that block is empty or angle-free.
double remainder_velocity_norm(const NormalForm& nf, int r, const WeightVector& R);

double escape_time_tau(double rho0, double rho, int r, double rem_norm, double c,
                       ExponentVariant v = ExponentVariant::printed);

// R_j = libration^2 / (2 U_j*): rho = 1 is a libration of that amplitude in sigma'_j.
WeightVector default_weights(const Linearization& lin, double libration = 0.1);

struct StabilityRow {
  int r = 0;
  double rho_opt = 0.0;
  double tau_tilde = 0.0;  // +inf when the remainder norm is zero
  double rem_norm = 0.0;
};

struct StabilityEstimate {
  double rho0 = 0.0;
  double c = 2.0;
  WeightVector R;
  ExponentVariant variant = ExponentVariant::printed;
  std::vector<StabilityRow> per_order;  // even r = 2..r_max
  int r_opt = 0;
  double T = 0.0;  // years
};

// Max over even r <= r_max of tau(rho0, rho_opt(r), r). Rows with a zero
// remainder norm are kept as infinite markers and skipped by the max.
StabilityEstimate effective_stability_time(const NormalForm& nf, double rho0,
                                           const WeightVector& R, double c, int r_max,
                                           ExponentVariant v = ExponentVariant::printed);

// Whole chain for one parameter set.
struct PipelineSettings {
  TruncationPolicy trunc{16, 16, 8};
  int r = 12;
  double resonance_threshold = 1e-10;
};

struct PipelineResult {
  HamiltonianModel model;
  EquilibriumExpansion expansion;
  NormalForm nf;
};

PipelineResult run_pipeline(const BodyParams& p, const PipelineSettings& s);

// ---------------------------------------------------------------------------
// Scans

enum class ScanAxis { i, Omega_dot, C_norm };

std::string_view to_string(ScanAxis a);
ScanAxis scan_axis_from_string(std::string_view s);

struct AxisRange {
  ScanAxis axis = ScanAxis::i;
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  double value(int idx) const;
};

struct ScanSpec {
  AxisRange x;
  AxisRange y;
  BodyParams base;
  PipelineSettings pipeline;
  double rho0 = 1.0;
  double c = 2.0;
  // Weights shared by every grid point; when unset, default_weights(lin,
  // libration) at the base parameters.
  std::optional<WeightVector> R;
  double libration = 0.1;
  ExponentVariant variant = ExponentVariant::printed;
  int threads = 1;

  void validate() const;
};

struct ScanCell {
  double log10_T = 0.0;
  std::optional<ErrorKind> hole;
};

struct ScanResult {
  ScanSpec spec;
  std::vector<ScanCell> cells;  // row-major, index iy * nx + ix

  const ScanCell& at(int ix, int iy) const { return cells[iy * spec.x.n + ix]; }
};

BodyParams apply_axis(BodyParams p, ScanAxis a, double value);

// Per-point errors become holes. Output is independent of the thread count.
ScanResult parameter_scan(const ScanSpec& spec);

void write_csv(std::ostream& os, const ScanResult& res);
void write_json(std::ostream& os, const ScanResult& res);
void write_gnuplot(std::ostream& os, const ScanResult& res);
void write_csv(std::ostream& os, const StabilityEstimate& est);

}  // namespace cassini
