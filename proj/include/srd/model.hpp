#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srd/rng.hpp"

namespace srd {

using Parameter = std::vector<double>;

// Dense m x m lower-triangular factor L with strictly positive diagonal,
// so that Sigma = L L^T is positive definite. Stored row-major.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  // `rows` must be m rows of length m; entries above the diagonal must be 0.
  explicit CholeskyFactor(std::vector<std::vector<double>> rows);
  static CholeskyFactor identity(int m);
  static CholeskyFactor scaled_identity(int m, double scale);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * dim_ + j)]; }

  // out = L v
  void apply(std::span<const double> v, std::span<double> out) const;
  // out = L^T v
  void apply_transpose(std::span<const double> v, std::span<double> out) const;
  double frobenius_norm() const;
  // sigma when L == sigma * I.
  std::optional<double> isotropic_scale() const;

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

struct GaussianParams {
  std::vector<double> mean;
  CholeskyFactor chol;

  int dim() const { return static_cast<int>(mean.size()); }
  // ||mean|| + ||L||_F, the quantity bounded by eta0.
  double size_bound() const;
};

// Atom of a discrete prior.
struct WeightedParameter {
  Parameter value;
  double weight;
};

// Prior over the parameter space together with the map c -> (mean(c), L(c)).
class ParameterModel {
 public:
  struct Definition {
    std::string name;
    int dimension = 0;            // m
    int parameter_dimension = 0;  // p
    std::function<Parameter(RngStream&)> sampler;
    std::function<GaussianParams(std::span<const double>)> map;
    double eta0 = 0.0;
    // Unnormalized prior density; zero outside the parameter space.
    std::function<double(std::span<const double>)> density;
    // Set for priors with finitely many atoms (mixtures, point masses).
    std::vector<WeightedParameter> atoms;
    // Interval containing the support of a scalar continuous parameter.
    std::optional<std::pair<double, double>> support;
  };

  explicit ParameterModel(Definition def);

  const std::string& name() const { return def_.name; }
  int dimension() const { return def_.dimension; }
  int parameter_dimension() const { return def_.parameter_dimension; }
  double eta0() const { return def_.eta0; }

  // Mean and Cholesky factor for c; throws ModelMisspecification when the
  // factor is degenerate or the eta0 bound fails.
  GaussianParams gaussian_params(std::span<const double> c) const;
  Parameter sample_parameter(RngStream& rng) const;

  bool has_density() const { return static_cast<bool>(def_.density); }
  double density(std::span<const double> c) const;

  bool is_discrete() const { return !def_.atoms.empty(); }
  const std::vector<WeightedParameter>& atoms() const { return def_.atoms; }
  const std::optional<std::pair<double, double>>& support() const { return def_.support; }

 private:
  Definition def_;
};

struct FiniteMixture {
  std::vector<double> weights;
  std::vector<GaussianParams> components;

  // Throws ConfigError unless weights are positive, sum to 1 within 1e-12,
  // all components share one dimension and every factor is nonsingular.
  void validate() const;
};

// Parameter space {0, ..., k-1}; c = {i} selects components[i].
ParameterModel mixture_as_parameter_model(const FiniteMixture& mix);

// Prior concentrated at c0 with the given Gaussian.
ParameterModel point_mass_model(Parameter c0, GaussianParams params);

// Scalar c in (-1, 1) with (c + 1)/2 ~ Beta(delta, delta); xi | c ~ N((0, c), I).
ParameterModel beta_example_model(double delta);

// ---------------------------------------------------------------------------
// Constraint g(x, z) <= 0 with x in R^n and z in R^m.

struct GrowthConstants {
  double epsilon = 0.0;
  double a = 0.0;
  double b = 0.0;
};

// g(x, z) = ||z||^2 - ||x||^2 - offset. Lets estimators use the closed-form
// batch kernels when every Gaussian component is isotropic.
struct BallStructure {
  double offset = 0.0;
};

struct Constraint {
  using Value = std::function<double(std::span<const double> x, std::span<const double> z)>;
  using Gradient =
      std::function<void(std::span<const double> x, std::span<const double> z, std::span<double> out)>;

  std::string name;
  int decision_dimension = 0;  // n
  int random_dimension = 0;    // m
  Value value;
  Gradient grad_x;
  Gradient grad_z;
  bool convex_in_z = true;
  std::optional<GrowthConstants> growth;
  std::optional<BallStructure> ball;

  double operator()(std::span<const double> x, std::span<const double> z) const { return value(x, z); }
};

Constraint ball_constraint(int n, int m, double offset);
// g(x, z) = a^T z - b^T x - beta
Constraint halfspace_constraint(std::vector<double> a, std::vector<double> b, double beta);
// g(x, z) = level everywhere.
Constraint constant_constraint(int n, int m, double level);

struct GradientCheckReport {
  int points_checked = 0;
  double worst_relative_error = 0.0;
  bool pass = true;
};

// Compares grad_x and grad_z against central differences at random points.
GradientCheckReport check_constraint_gradients(const Constraint& cons, RngStream& rng, int points = 20,
                                               double tolerance = 1e-5);

struct ConvexityCheckReport {
  int triples_checked = 0;
  double worst_violation = 0.0;  // max of g(mid) - (g(a) + g(b)) / 2
  bool pass = true;
};

// Midpoint convexity in z at random (x, z1, z2) triples.
ConvexityCheckReport check_convexity_in_z(const Constraint& cons, RngStream& rng, int triples = 100);

struct SlaterReport {
  double gamma0 = 0.0;
  std::size_t samples_checked = 0;
  double worst_margin = 0.0;  // max over checked c of g(x, mean(c))
  bool pass = false;
};

// Samples n_check parameters (or visits every atom of a discrete prior)
// and reports whether g(x, mean(c)) < -gamma0 held throughout.
SlaterReport verify_slater(const ParameterModel& model, const Constraint& cons, std::span<const double> x,
                           double gamma0, std::size_t n_check, RngStream& rng);

}  // namespace srd
