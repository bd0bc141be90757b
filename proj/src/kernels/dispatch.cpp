#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels/kernels_impl.hpp"

namespace srd::kernels {
namespace {

Isa initial_isa() {
  const char* env = std::getenv("SRD_ISA");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return best_supported_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(SRD_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa best_supported_isa() { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument(std::string("kernel ISA not supported on this host: ") +
                                std::string(isa_name(isa)));
  }
  active().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

#if defined(SRD_HAVE_AVX2_TU)
#define SRD_DISPATCH(fn, ...) \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define SRD_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

std::size_t ball_kernel(int m, double s, const BallBatch& batch, std::span<double> e, std::span<double> coef) {
  if (batch.mean_sq.size() != batch.size() || batch.inv_scale.size() != batch.size() ||
      e.size() != batch.size() || (!coef.empty() && coef.size() != batch.size())) {
    throw std::invalid_argument("ball_kernel: span sizes disagree");
  }
  return SRD_DISPATCH(ball_kernel, m, s, batch, e, coef);
}

double compensated_sum(std::span<const double> values) { return SRD_DISPATCH(compensated_sum, values); }

double sum_squared_deviation(std::span<const double> values, double mean) {
  return SRD_DISPATCH(sum_squared_deviation, values, mean);
}

double sum_cross_deviation(std::span<const double> a, double mean_a, std::span<const double> b, double mean_b) {
  if (a.size() != b.size()) throw std::invalid_argument("sum_cross_deviation: span sizes disagree");
  return SRD_DISPATCH(sum_cross_deviation, a, mean_a, b, mean_b);
}

#undef SRD_DISPATCH

}  // namespace srd::kernels
