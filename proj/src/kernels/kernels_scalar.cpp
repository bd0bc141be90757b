#include <cmath>
#include <stdexcept>

#include "kernels/kernels_impl.hpp"
#include "srd/distributions.hpp"

namespace srd::kernels::scalar {
namespace {

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
  }
  double result() const { return sum + comp; }
};

}  // namespace

std::size_t ball_kernel(int m, double s, const BallBatch& batch, std::span<double> e, std::span<double> coef) {
  if (m < 1) throw std::invalid_argument("ball_kernel: dimension must be >= 1");
  const std::size_t n = batch.size();
  const bool want_coef = !coef.empty();
  const bool even = m % 2 == 0;
  const int k = m / 2;
  const ChiLaw chi(m);
  std::size_t first_bad = npos;

  for (std::size_t i = 0; i < n; ++i) {
    const double a = batch.along[i];
    const double d = s - batch.mean_sq[i];
    if (!(d > 0.0)) {
      if (first_bad == npos) first_bad = i;
      e[i] = 0.0;
      if (want_coef) coef[i] = 0.0;
      continue;
    }
    const double root = std::sqrt(std::fma(a, a, d));
    const double t = a > 0.0 ? d / (root + a) : root - a;
    const double rho = t * batch.inv_scale[i];
    if (even) {
      const double y = 0.5 * rho * rho;
      const double ey = std::exp(-y);
      e[i] = 1.0 - ey * detail::exp_partial_sum(k, y);
      if (want_coef) coef[i] = rho * detail::poisson_power(k, y) * ey * batch.inv_scale[i] / root;
    } else {
      e[i] = chi.cdf(rho);
      if (want_coef) coef[i] = chi.pdf(rho) * batch.inv_scale[i] / root;
    }
  }
  return first_bad;
}

double compensated_sum(std::span<const double> values) {
  Neumaier acc;
  for (double v : values) acc.add(v);
  return acc.result();
}

double sum_squared_deviation(std::span<const double> values, double mean) {
  Neumaier acc;
  for (double v : values) {
    const double d = v - mean;
    acc.add(d * d);
  }
  return acc.result();
}

double sum_cross_deviation(std::span<const double> a, double mean_a, std::span<const double> b, double mean_b) {
  Neumaier acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add((a[i] - mean_a) * (b[i] - mean_b));
  return acc.result();
}

}  // namespace srd::kernels::scalar
