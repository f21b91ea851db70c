#include "cassini/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace cassini::kernels {

namespace {

std::atomic<int> g_active{-1};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

std::string_view to_string(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool avx2_compiled() {
#ifdef CASSINI_HAVE_AVX2
  return true;
#else
  return false;
#endif
}

Isa detected_isa() {
  static const Isa isa = (avx2_compiled() && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar;
  return isa;
}

Isa active_isa() {
  int v = g_active.load(std::memory_order_relaxed);
  if (v < 0) {
    Isa isa = detected_isa();
    if (std::getenv("CASSINI_FORCE_SCALAR") != nullptr) isa = Isa::scalar;
    v = static_cast<int>(isa);
    g_active.store(v, std::memory_order_relaxed);
  }
  return static_cast<Isa>(v);
}

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  g_active.store(static_cast<int>(isa), std::memory_order_relaxed);
}

void GatherPlan::reserve(std::size_t n) {
  coeff.reserve(n);
  for (auto& v : idx) v.reserve(n);
}

void GatherPlan::push(double c, std::int32_t a, std::int32_t b, std::int32_t d,
                      std::int32_t e) {
  coeff.push_back(c);
  idx[0].push_back(a);
  idx[1].push_back(b);
  idx[2].push_back(d);
  idx[3].push_back(e);
}

namespace scalar {

double gather_sum(const GatherPlan& plan, const Tables& tabs) {
  const std::size_t n = plan.size();
  const double* c = plan.coeff.data();
  const std::int32_t* i0 = plan.idx[0].data();
  const std::int32_t* i1 = plan.idx[1].data();
  const std::int32_t* i2 = plan.idx[2].data();
  const std::int32_t* i3 = plan.idx[3].data();
  // Four interleaved partial sums, same association as the AVX2 lanes.
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const std::size_t j = i + l;
      acc[l] += c[j] * tabs.t[0][i0[j]] * tabs.t[1][i1[j]] * tabs.t[2][i2[j]] *
                tabs.t[3][i3[j]];
    }
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    tail += c[i] * tabs.t[0][i0[i]] * tabs.t[1][i1[i]] * tabs.t[2][i2[i]] *
            tabs.t[3][i3[i]];
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

}  // namespace scalar

double gather_sum(Isa isa, const GatherPlan& plan, const Tables& tabs) {
#ifdef CASSINI_HAVE_AVX2
  if (isa == Isa::avx2) return avx2::gather_sum(plan, tabs);
#else
  (void)isa;
#endif
  return scalar::gather_sum(plan, tabs);
}

double gather_sum(const GatherPlan& plan, const Tables& tabs) {
  return gather_sum(active_isa(), plan, tabs);
}

}  // namespace cassini::kernels
