#pragma once

// Dense inner loops behind series/polynomial evaluation and majorant norms.
//
// Every evaluation in the library reduces to a gathered product sum
//
//     sum_i coeff[i] * t0[i0[i]] * t1[i1[i]] * t2[i2[i]] * t3[i3[i]]
//
// over precomputed power/trigonometric tables. A scalar reference kernel is
// always built; an AVX2+FMA kernel is built when the compiler supports it and
// selected at runtime from CPUID. Both are tested against each other.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cassini::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

// Best ISA supported by both the build and the running CPU.
Isa detected_isa();
// ISA used by dispatching calls. Defaults to detected_isa(); the
// CASSINI_FORCE_SCALAR environment variable pins it to scalar.
Isa active_isa();
void set_active_isa(Isa isa);
bool avx2_compiled();

// Structure-of-arrays gather plan. All index arrays have coeff.size() entries.
struct GatherPlan {
  std::vector<double> coeff;
  std::vector<std::int32_t> idx[4];

  std::size_t size() const { return coeff.size(); }
  void reserve(std::size_t n);
  void push(double c, std::int32_t a, std::int32_t b, std::int32_t d, std::int32_t e);
};

struct Tables {
  const double* t[4];
};

double gather_sum(const GatherPlan& plan, const Tables& tabs);
double gather_sum(Isa isa, const GatherPlan& plan, const Tables& tabs);

namespace scalar {
double gather_sum(const GatherPlan& plan, const Tables& tabs);
}

namespace avx2 {
// Only callable when avx2_compiled() and the CPU supports AVX2+FMA.
double gather_sum(const GatherPlan& plan, const Tables& tabs);
}

}  // namespace cassini::kernels
