#include "srd/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace srd {
namespace {

constexpr int kMaxIterations = 100000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr double kPoissonTail = 1e-14;

// Returns P(a, x) via the power series; valid for x < a + 1.
double lower_gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Returns Q(a, x) via the modified Lentz continued fraction; valid for x >= a + 1.
double upper_gamma_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void require_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw std::invalid_argument("incomplete gamma: need a > 0 and x >= 0 (a=" + std::to_string(a) +
                                ", x=" + std::to_string(x) + ")");
  }
}

}  // namespace

double regularized_lower_gamma(double a, double x) {
  require_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_gamma_series(a, x);
  return 1.0 - upper_gamma_fraction(a, x);
}

double regularized_upper_gamma(double a, double x) {
  require_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_gamma_series(a, x);
  return upper_gamma_fraction(a, x);
}

double central_chisq_cdf(double dof, double t) {
  if (t <= 0.0) return 0.0;
  return regularized_lower_gamma(0.5 * dof, 0.5 * t);
}

double central_chisq_pdf(double dof, double t) {
  if (t < 0.0) return 0.0;
  const double k = 0.5 * dof;
  if (t == 0.0) {
    if (dof < 2.0) return std::numeric_limits<double>::infinity();
    return dof == 2.0 ? 0.5 : 0.0;
  }
  return std::exp((k - 1.0) * std::log(t) - 0.5 * t - k * std::numbers::ln2 - std::lgamma(k));
}

// ---------------------------------------------------------------------------
// ChiLaw

ChiLaw::ChiLaw(int dof) : dof_(dof) {
  if (dof < 1) throw std::invalid_argument("ChiLaw: dof must be >= 1");
  const double k = 0.5 * dof;
  log_norm_ = (1.0 - k) * std::numbers::ln2 - std::lgamma(k);
}

double ChiLaw::pdf(double r) const {
  if (r < 0.0) return 0.0;
  if (r == 0.0) {
    if (dof_ == 1) return std::exp(log_norm_);
    return 0.0;
  }
  if (std::isinf(r)) return 0.0;
  return std::exp(log_norm_ + (dof_ - 1) * std::log(r) - 0.5 * r * r);
}

double ChiLaw::cdf(double r) const {
  if (r <= 0.0) return 0.0;
  return regularized_lower_gamma(0.5 * dof_, 0.5 * r * r);
}

double ChiLaw::survival(double r) const {
  if (r <= 0.0) return 1.0;
  return regularized_upper_gamma(0.5 * dof_, 0.5 * r * r);
}

namespace {

// Bisection for the unique root of a monotone function on [0, inf).
template <class Increasing>
double invert_monotone(Increasing&& above_target) {
  double lo = 0.0;
  double hi = 1.0;
  while (!above_target(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) throw std::runtime_error("ChiLaw: quantile bracket diverged");
  }
  while (hi - lo > 1e-15 * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (above_target(mid)) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double ChiLaw::quantile(double p) const {
  if (!(p >= 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("ChiLaw::quantile: need 0 <= p < 1, got " + std::to_string(p));
  }
  if (p == 0.0) return 0.0;
  if (p > 0.5) return upper_quantile(1.0 - p);
  return invert_monotone([&](double r) { return cdf(r) >= p; });
}

double ChiLaw::upper_quantile(double q) const {
  if (!(q > 0.0) || !(q <= 1.0)) {
    throw std::invalid_argument("ChiLaw::upper_quantile: need 0 < q <= 1, got " + std::to_string(q));
  }
  if (q == 1.0) return 0.0;
  return invert_monotone([&](double r) { return survival(r) <= q; });
}

// ---------------------------------------------------------------------------
// NoncentralChiSquareLaw

NoncentralChiSquareLaw::NoncentralChiSquareLaw(int dof, double noncentrality)
    : dof_(dof), lambda_(noncentrality) {
  if (dof < 1) throw std::invalid_argument("NoncentralChiSquareLaw: dof must be >= 1");
  if (!(noncentrality >= 0.0)) {
    throw std::invalid_argument("NoncentralChiSquareLaw: noncentrality must be >= 0");
  }
}

// Sum_j Pois(j; lambda/2) * term(dof + 2j), starting at the Poisson mode and
// walking outward until the unvisited Poisson mass is below kPoissonTail.
template <class Term>
double NoncentralChiSquareLaw::poisson_mixture(Term&& term) const {
  const double mu = 0.5 * lambda_;
  if (mu == 0.0) return term(static_cast<double>(dof_));

  const long mode = static_cast<long>(std::floor(mu));
  const auto weight = [mu](long j) {
    return std::exp(-mu + j * std::log(mu) - std::lgamma(static_cast<double>(j) + 1.0));
  };

  double sum = 0.0;
  double mass = 0.0;
  for (long j = mode; j >= 0; --j) {
    const double w = weight(j);
    sum += w * term(dof_ + 2.0 * j);
    mass += w;
    if (w < kPoissonTail * 1e-3 && j < mode) break;
  }
  for (long j = mode + 1; 1.0 - mass >= kPoissonTail; ++j) {
    const double w = weight(j);
    sum += w * term(dof_ + 2.0 * j);
    mass += w;
    if (w == 0.0 || j - mode > 100000) break;
  }
  return sum;
}

double NoncentralChiSquareLaw::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  const double p = poisson_mixture([t](double k) { return central_chisq_cdf(k, t); });
  return std::min(1.0, std::max(0.0, p));
}

double NoncentralChiSquareLaw::pdf(double t) const {
  if (t < 0.0) return 0.0;
  return poisson_mixture([t](double k) { return central_chisq_pdf(k, t); });
}

// ---------------------------------------------------------------------------
// Samplers

void sample_sphere(std::span<double> out, RngStream& rng) {
  if (out.empty()) throw std::invalid_argument("sample_sphere: dimension must be >= 1");
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : out) {
      x = rng.normal();
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : out) x *= inv;
}

std::vector<double> sample_sphere(int m, RngStream& rng) {
  if (m < 1) throw std::invalid_argument("sample_sphere: dimension must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(m));
  sample_sphere(std::span<double>(v), rng);
  return v;
}

double sample_beta_symmetric(double delta, RngStream& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("sample_beta_symmetric: delta must be > 0");
  std::gamma_distribution<double> gamma(delta, 1.0);
  for (;;) {
    const double x = gamma(rng);
    const double y = gamma(rng);
    const double d = x / (x + y);
    if (d > 0.0 && d < 1.0) return d;
  }
}

}  // namespace srd
