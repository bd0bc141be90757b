#include <gtest/gtest.h>

#include <cmath>

#include "srd/errors.hpp"
#include "srd/oracle.hpp"
#include "srd/radial.hpp"

using namespace srd;

namespace {

// Boundary radius for g = ||z||^2 - ||x||^2 - 2 with z = (0, c) + r v.
double example_rho(double xnorm_sq, double c, const double v[2]) {
  return -c * v[1] + std::sqrt(xnorm_sq + 2.0 - c * c * v[0] * v[0]);
}

GaussianParams example_params(double c) { return {{0.0, c}, CholeskyFactor::identity(2)}; }

}  // namespace

TEST(Radius, KnownPoints) {
  const Constraint cons = ball_constraint(1, 2, 2.0);
  const double v10[2] = {1.0, 0.0}, v01[2] = {0.0, 1.0};
  const double x0[1] = {0.0}, x1[1] = {1.0}, x2[1] = {2.0};

  EXPECT_NEAR(radius(cons, example_params(0.0), x0, v10).rho, std::sqrt(2.0), 1e-12);

  const RadiusResult r = radius(cons, example_params(0.5), x1, v01);
  ASSERT_EQ(r.kind, RayKind::Finite);
  EXPECT_NEAR(r.rho, std::sqrt(3.0) - 0.5, 1e-12);
  EXPECT_NEAR(grad_rho(cons, example_params(0.5), x1, v01, r)[0], 1.0 / std::sqrt(3.0), 1e-10);

  const RadiusResult r2 = radius(cons, example_params(0.0), x2, v10);
  EXPECT_NEAR(grad_rho(cons, example_params(0.0), x2, v10, r2)[0], 2.0 / std::sqrt(6.0), 1e-10);

  const RadialKernel kernel(cons);
  double grad[1];
  const double e = kernel.evaluate(example_params(0.0), x2, v10, grad);
  EXPECT_NEAR(e, 1.0 - std::exp(-3.0), 1e-12);
  EXPECT_NEAR(grad[0], 2.0 * std::exp(-3.0), 1e-10);
}

TEST(Radius, MatchesClosedFormOnRandomInstances) {
  const Constraint cons = ball_constraint(3, 2, 2.0);
  const RadialKernel kernel(cons);
  RngStream rng(21, 0);
  for (int i = 0; i < 500; ++i) {
    const double c = 2.0 * rng.uniform() - 1.0;
    const double theta = 2.0 * M_PI * rng.uniform();
    const double v[2] = {std::cos(theta), std::sin(theta)};
    const double x[3] = {4.0 * rng.uniform() - 2.0, rng.uniform(), -rng.uniform()};
    const double xsq = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const RadiusResult r = kernel.radius(example_params(c), x, v);
    ASSERT_EQ(r.kind, RayKind::Finite);
    EXPECT_NEAR(r.rho, example_rho(xsq, c, v), 1e-10);
    EXPECT_NEAR(r.boundary_residual, 0.0, 1e-9);
  }
}

TEST(Radius, FeasibleSetAlongRayIsTheInterval) {
  const Constraint cons = halfspace_constraint({1.0, 2.0}, {1.0}, 1.5);
  const GaussianParams p{{0.2, -0.1}, CholeskyFactor({{0.9, 0.0}, {0.4, 0.5}})};
  const RadialKernel kernel(cons);
  const double x[1] = {0.3};
  RngStream rng(5, 0);
  for (int i = 0; i < 50; ++i) {
    const double theta = 2.0 * M_PI * rng.uniform();
    const double v[2] = {std::cos(theta), std::sin(theta)};
    const RadiusResult r = kernel.radius(p, x, v);
    double lv[2];
    p.chol.apply(v, lv);
    for (double t = 0.0; t <= 6.0; t += 0.25) {
      const double z[2] = {p.mean[0] + t * lv[0], p.mean[1] + t * lv[1]};
      if (r.kind == RayKind::Infinite || t < r.rho * (1.0 - 1e-9)) {
        EXPECT_LE(cons(x, z), 1e-12);
      } else if (t > r.rho * (1.0 + 1e-9)) {
        EXPECT_GT(cons(x, z), 0.0);
      }
    }
  }
}

TEST(Radius, InfiniteDirections) {
  const Constraint half = halfspace_constraint({1.0, 0.0}, {1.0}, 1.0);
  const GaussianParams p{{0.0, 0.0}, CholeskyFactor::identity(2)};
  const double x[1] = {0.0};
  const double away[2] = {-1.0, 0.0}, along[2] = {0.0, 1.0}, toward[2] = {1.0, 0.0};
  const RadialKernel kernel(half);
  EXPECT_EQ(kernel.radius(p, x, away).kind, RayKind::Infinite);
  EXPECT_EQ(kernel.radius(p, x, along).kind, RayKind::Infinite);
  EXPECT_EQ(kernel.radius(p, x, toward).kind, RayKind::Finite);
  double grad[1] = {7.0};
  EXPECT_EQ(kernel.evaluate(p, x, away, grad), 1.0);
  EXPECT_EQ(grad[0], 0.0);

  const Constraint never = constant_constraint(1, 2, -1.0);
  EXPECT_EQ(RadialKernel(never).probability(p, x, toward), 1.0);
}

TEST(Radius, TruncationUsesChiQuantile) {
  const Constraint cons = ball_constraint(1, 2, 2.0);
  const RadialKernel kernel(cons);
  EXPECT_NEAR(kernel.truncation_radius(), std::sqrt(-2.0 * std::log(1e-12)), 1e-9);
  // Boundary beyond the truncation radius: treated as never crossing.
  const double x[1] = {8.0};
  const double v[2] = {1.0, 0.0};
  EXPECT_EQ(kernel.radius(example_params(0.0), x, v).kind, RayKind::Infinite);
}

TEST(Radius, SlaterViolation) {
  const Constraint cons = ball_constraint(1, 2, -1.0);
  const double x[1] = {0.0};
  const double v[2] = {1.0, 0.0};
  EXPECT_THROW(radius(cons, example_params(0.0), x, v), SlaterViolation);
  const Constraint tight = ball_constraint(1, 2, 0.25);
  EXPECT_THROW(radius(tight, example_params(0.5), x, v), SlaterViolation);
}

TEST(Radius, ConvexityViolationDuringBracketing) {
  Constraint cons = ball_constraint(1, 2, 2.0);
  cons.value = [](std::span<const double>, std::span<const double> z) {
    const double r = std::hypot(z[0], z[1]);
    return -1.0 + 0.9 * (1.0 - std::exp(-r)) + 0.01 * r * r;
  };
  const double x[1] = {0.0};
  const double v[2] = {1.0, 0.0};
  EXPECT_THROW(radius(cons, example_params(0.0), x, v), ConvexityViolation);
}

TEST(Radius, DegenerateBoundary) {
  Constraint cons = ball_constraint(1, 2, 2.0);
  cons.grad_z = [](std::span<const double>, std::span<const double>, std::span<double> out) {
    out[0] = 0.0;
    out[1] = 0.0;
  };
  const double x[1] = {0.0};
  const double v[2] = {1.0, 0.0};
  const RadiusResult r = radius(cons, example_params(0.0), x, v);
  EXPECT_THROW(grad_rho(cons, example_params(0.0), x, v, r), DegenerateBoundary);
}

TEST(Radius, DimensionChecks) {
  const Constraint cons = ball_constraint(2, 2, 2.0);
  const double x[1] = {0.0};
  const double v[2] = {1.0, 0.0};
  EXPECT_THROW(radius(cons, example_params(0.0), x, v), ConfigError);
}

TEST(KernelGradient, MatchesFiniteDifferences) {
  const ParameterModel beta = beta_example_model(2.5);
  const Constraint ball = ball_constraint(2, 2, 2.0);
  FiniteMixture mix;
  mix.weights = {0.4, 0.6};
  mix.components.push_back({{0.5, -0.2}, CholeskyFactor({{1.0, 0.0}, {0.5, 0.8}})});
  mix.components.push_back({{-0.3, 0.4}, CholeskyFactor({{0.6, 0.0}, {-0.2, 1.1}})});
  const ParameterModel mixture = mixture_as_parameter_model(mix);
  const Constraint half = halfspace_constraint({1.0, -0.5}, {0.7, -0.4}, 2.0);

  RngStream rng(31, 0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const bool use_beta = i % 2 == 0;
    const ParameterModel& model = use_beta ? beta : mixture;
    const Constraint& cons = use_beta ? ball : half;
    RadialSample s{sample_sphere(2, rng), model.sample_parameter(rng)};
    const std::vector<double> x = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    if (radius(cons, model.gaussian_params(s.parameter), x, s.direction).kind != RayKind::Finite) continue;
    const std::vector<double> g = radial_gradient(cons, model, s, x);
    const std::vector<double> fd = finite_difference_gradient(
        [&](std::span<const double> p) { return radial_probability(cons, model, s, p); }, x, 1e-6);
    const double scale = 1.0 + std::hypot(g[0], g[1]);
    EXPECT_LE(std::hypot(g[0] - fd[0], g[1] - fd[1]), 1e-5 * scale);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}
