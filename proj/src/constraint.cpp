#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "srd/errors.hpp"
#include "srd/model.hpp"

namespace srd {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Constraint ball_constraint(int n, int m, double offset) {
  if (n < 1 || m < 1) throw ConfigError("ball constraint: dimensions must be >= 1");
  Constraint c;
  c.name = "ball";
  c.decision_dimension = n;
  c.random_dimension = m;
  c.value = [offset](std::span<const double> x, std::span<const double> z) {
    return dot(z, z) - dot(x, x) - offset;
  };
  c.grad_x = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -2.0 * x[i];
  };
  c.grad_z = [](std::span<const double>, std::span<const double> z, std::span<double> out) {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = 2.0 * z[i];
  };
  c.convex_in_z = true;
  c.growth = GrowthConstants{1.0, 2.0, 1.0};
  c.ball = BallStructure{offset};
  return c;
}

Constraint halfspace_constraint(std::vector<double> a, std::vector<double> b, double beta) {
  if (a.empty() || b.empty()) throw ConfigError("half-space constraint: empty coefficient vector");
  Constraint c;
  c.name = "halfspace";
  c.decision_dimension = static_cast<int>(b.size());
  c.random_dimension = static_cast<int>(a.size());
  c.value = [a, b, beta](std::span<const double> x, std::span<const double> z) {
    return dot(a, z) - dot(b, x) - beta;
  };
  c.grad_x = [b](std::span<const double>, std::span<const double>, std::span<double> out) {
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = -b[i];
  };
  c.grad_z = [a](std::span<const double>, std::span<const double>, std::span<double> out) {
    std::copy(a.begin(), a.end(), out.begin());
  };
  c.convex_in_z = true;
  double bn = 0.0;
  for (double v : b) bn += v * v;
  c.growth = GrowthConstants{1.0, std::sqrt(bn) + 1e-300, 0.0};
  return c;
}

Constraint constant_constraint(int n, int m, double level) {
  if (n < 1 || m < 1) throw ConfigError("constant constraint: dimensions must be >= 1");
  Constraint c;
  c.name = "constant";
  c.decision_dimension = n;
  c.random_dimension = m;
  c.value = [level](std::span<const double>, std::span<const double>) { return level; };
  c.grad_x = [](std::span<const double>, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  c.grad_z = c.grad_x;
  c.convex_in_z = true;
  return c;
}

GradientCheckReport check_constraint_gradients(const Constraint& cons, RngStream& rng, int points,
                                               double tolerance) {
  const auto n = static_cast<std::size_t>(cons.decision_dimension);
  const auto m = static_cast<std::size_t>(cons.random_dimension);
  GradientCheckReport report;
  std::vector<double> x(n), z(m), gx(n), gz(m);
  const auto relative_error = [](double analytic, double numeric) {
    return std::fabs(analytic - numeric) / std::max(1.0, std::fabs(numeric));
  };
  for (int p = 0; p < points; ++p) {
    for (double& v : x) v = 2.0 * rng.normal();
    for (double& v : z) v = 2.0 * rng.normal();
    cons.grad_x(x, z, gx);
    cons.grad_z(x, z, gz);
    const auto probe = [&](std::vector<double>& arg, std::size_t i) {
      const double h = 1e-6 * std::max(1.0, std::fabs(arg[i]));
      const double saved = arg[i];
      arg[i] = saved + h;
      const double up = cons(x, z);
      arg[i] = saved - h;
      const double down = cons(x, z);
      arg[i] = saved;
      return (up - down) / (2.0 * h);
    };
    for (std::size_t i = 0; i < n; ++i) {
      report.worst_relative_error = std::max(report.worst_relative_error, relative_error(gx[i], probe(x, i)));
    }
    for (std::size_t i = 0; i < m; ++i) {
      report.worst_relative_error = std::max(report.worst_relative_error, relative_error(gz[i], probe(z, i)));
    }
    ++report.points_checked;
  }
  report.pass = report.worst_relative_error <= tolerance;
  return report;
}

ConvexityCheckReport check_convexity_in_z(const Constraint& cons, RngStream& rng, int triples) {
  const auto n = static_cast<std::size_t>(cons.decision_dimension);
  const auto m = static_cast<std::size_t>(cons.random_dimension);
  ConvexityCheckReport report;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  std::vector<double> x(n), z1(m), z2(m), mid(m);
  for (int t = 0; t < triples; ++t) {
    for (double& v : x) v = 2.0 * rng.normal();
    for (std::size_t i = 0; i < m; ++i) {
      z1[i] = 3.0 * rng.normal();
      z2[i] = 3.0 * rng.normal();
      mid[i] = 0.5 * (z1[i] + z2[i]);
    }
    const double g1 = cons(x, z1);
    const double g2 = cons(x, z2);
    const double violation = cons(x, mid) - 0.5 * (g1 + g2);
    report.worst_violation = std::max(report.worst_violation, violation);
    ++report.triples_checked;
    if (violation > 1e-9 * (1.0 + std::fabs(g1) + std::fabs(g2))) report.pass = false;
  }
  return report;
}

}  // namespace srd
