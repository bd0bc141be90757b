#pragma once

#include <span>
#include <vector>

#include "srd/rng.hpp"

namespace srd {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
// Series below x = a + 1, Lentz continued fraction above.
double regularized_lower_gamma(double a, double x);
double regularized_upper_gamma(double a, double x);

double central_chisq_cdf(double dof, double t);
double central_chisq_pdf(double dof, double t);

// Law of the Euclidean norm of an m-dimensional standard normal vector.
class ChiLaw {
 public:
  explicit ChiLaw(int dof);

  int dof() const { return dof_; }

  double pdf(double r) const;
  double cdf(double r) const;
  // 1 - cdf(r), evaluated without cancellation.
  double survival(double r) const;
  // Inverse of cdf; requires 0 <= p < 1.
  double quantile(double p) const;
  // Inverse of survival; requires 0 < q <= 1.
  double upper_quantile(double q) const;

 private:
  int dof_;
  double log_norm_;  // log of 2^{1 - m/2} / Gamma(m/2)
};

class NoncentralChiSquareLaw {
 public:
  NoncentralChiSquareLaw(int dof, double noncentrality);

  int dof() const { return dof_; }
  double noncentrality() const { return lambda_; }

  double cdf(double t) const;
  double pdf(double t) const;

 private:
  template <class Term>
  double poisson_mixture(Term&& term) const;

  int dof_;
  double lambda_;
};

// Uniform direction on the unit sphere S^{m-1}, written into `out` (size m).
void sample_sphere(std::span<double> out, RngStream& rng);
std::vector<double> sample_sphere(int m, RngStream& rng);

// Beta(delta, delta) draw via the ratio of two Gamma(delta, 1) variates.
double sample_beta_symmetric(double delta, RngStream& rng);

}  // namespace srd
