#pragma once

// Per-ISA entry points behind the dispatcher in srd/kernels.hpp. Tests call
// these directly to check the variants against each other.

#include "srd/kernels.hpp"

namespace srd::kernels {

namespace scalar {
std::size_t ball_kernel(int m, double s, const BallBatch& batch, std::span<double> e, std::span<double> coef);
double compensated_sum(std::span<const double> values);
double sum_squared_deviation(std::span<const double> values, double mean);
double sum_cross_deviation(std::span<const double> a, double mean_a, std::span<const double> b, double mean_b);
}  // namespace scalar

#if defined(SRD_HAVE_AVX2_TU)
namespace avx2 {
std::size_t ball_kernel(int m, double s, const BallBatch& batch, std::span<double> e, std::span<double> coef);
double compensated_sum(std::span<const double> values);
double sum_squared_deviation(std::span<const double> values, double mean);
double sum_cross_deviation(std::span<const double> a, double mean_a, std::span<const double> b, double mean_b);
}  // namespace avx2
#endif

// Shared helpers for the even-dimension closed forms.
namespace detail {

// sum_{j<k} y^j / j!
inline double exp_partial_sum(int k, double y) {
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= y / j;
    sum += term;
  }
  return sum;
}

// y^{k-1} / (k-1)!
inline double poisson_power(int k, double y) {
  double term = 1.0;
  for (int j = 1; j < k; ++j) term *= y / j;
  return term;
}

}  // namespace detail
}  // namespace srd::kernels
