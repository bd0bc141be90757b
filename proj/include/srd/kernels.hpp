#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2/FMA variant chosen at runtime. The AVX2 variant agrees with the
// scalar one to a few ulps (its exp is a polynomial, not libm).

#include <cstddef>
#include <span>
#include <string_view>

namespace srd::kernels {

enum class Isa { Scalar, Avx2 };

bool isa_supported(Isa isa);
Isa best_supported_isa();
// Defaults to the best supported ISA; SRD_ISA=scalar in the environment
// forces the scalar kernels.
Isa active_isa();
// Throws std::invalid_argument for an ISA the host cannot run.
void set_active_isa(Isa isa);
std::string_view isa_name(Isa isa);

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Per-sample geometry for g(x, z) = ||z||^2 - s with z = mu + t * sigma * v:
//   along[i]     = <mu_i, v_i>
//   mean_sq[i]   = ||mu_i||^2
//   inv_scale[i] = 1 / sigma_i
struct BallBatch {
  std::span<const double> along;
  std::span<const double> mean_sq;
  std::span<const double> inv_scale;

  std::size_t size() const { return along.size(); }
};

// For every sample: rho = boundary radius, e[i] = ChiCdf_m(rho) and
// coef[i] = ChiPdf_m(rho) / (sigma * sqrt(<mu,v>^2 + s - ||mu||^2)), so that
// grad_x e = coef * x. `coef` may be empty. Returns the index of the first
// sample whose ray origin is infeasible (mean_sq >= s), or npos.
std::size_t ball_kernel(int m, double s, const BallBatch& batch, std::span<double> e, std::span<double> coef);

// Neumaier-compensated sum; the summation order is fixed for a given ISA.
double compensated_sum(std::span<const double> values);
// Compensated sum of (values[i] - mean)^2.
double sum_squared_deviation(std::span<const double> values, double mean);
// Compensated sum of (a[i] - mean_a) * (b[i] - mean_b).
double sum_cross_deviation(std::span<const double> a, double mean_a, std::span<const double> b, double mean_b);

}  // namespace srd::kernels
