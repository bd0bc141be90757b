#include "srd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "srd/distributions.hpp"
#include "srd/errors.hpp"

namespace srd {
namespace {

std::string describe(std::span<const double> c) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? ", " : "") << c[i];
  os << ')';
  return os.str();
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// CholeskyFactor

CholeskyFactor::CholeskyFactor(std::vector<std::vector<double>> rows) : dim_(static_cast<int>(rows.size())) {
  if (rows.empty()) throw ConfigError("Cholesky factor must have at least one row");
  data_.assign(static_cast<std::size_t>(dim_ * dim_), 0.0);
  for (int i = 0; i < dim_; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != dim_) {
      throw ConfigError("Cholesky factor row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                        " entries, expected " + std::to_string(dim_));
    }
    for (int j = 0; j < dim_; ++j) {
      if (j > i && row[static_cast<std::size_t>(j)] != 0.0) {
        throw ConfigError("Cholesky factor must be lower triangular (entry " + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      }
      data_[static_cast<std::size_t>(i * dim_ + j)] = row[static_cast<std::size_t>(j)];
    }
  }
}

CholeskyFactor CholeskyFactor::identity(int m) { return scaled_identity(m, 1.0); }

CholeskyFactor CholeskyFactor::scaled_identity(int m, double scale) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = scale;
  return CholeskyFactor(std::move(rows));
}

void CholeskyFactor::apply(std::span<const double> v, std::span<double> out) const {
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += (*this)(i, j) * v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
}

void CholeskyFactor::apply_transpose(std::span<const double> v, std::span<double> out) const {
  for (int j = 0; j < dim_; ++j) {
    double s = 0.0;
    for (int i = j; i < dim_; ++i) s += (*this)(i, j) * v[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(j)] = s;
  }
}

double CholeskyFactor::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

std::optional<double> CholeskyFactor::isotropic_scale() const {
  if (dim_ == 0) return std::nullopt;
  const double sigma = data_[0];
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double expected = i == j ? sigma : 0.0;
      if ((*this)(i, j) != expected) return std::nullopt;
    }
  }
  return sigma;
}

double GaussianParams::size_bound() const { return norm2(mean) + chol.frobenius_norm(); }

// ---------------------------------------------------------------------------
// ParameterModel

ParameterModel::ParameterModel(Definition def) : def_(std::move(def)) {
  if (def_.dimension < 1) throw ConfigError("parameter model: dimension must be >= 1");
  if (def_.parameter_dimension < 1) throw ConfigError("parameter model: parameter dimension must be >= 1");
  if (!def_.map) throw ConfigError("parameter model: missing parameter-to-Gaussian map");
  if (!def_.sampler) throw ConfigError("parameter model: missing sampler");
  if (!(def_.eta0 > 0.0)) throw ConfigError("parameter model: eta0 must be > 0");
  for (const auto& atom : def_.atoms) {
    if (static_cast<int>(atom.value.size()) != def_.parameter_dimension || !(atom.weight > 0.0)) {
      throw ConfigError("parameter model: malformed atom");
    }
  }
}

GaussianParams ParameterModel::gaussian_params(std::span<const double> c) const {
  GaussianParams p = def_.map(c);
  if (p.dim() != def_.dimension || p.chol.dim() != def_.dimension) {
    throw ModelMisspecification("parameter map returned dimension " + std::to_string(p.dim()) + " for c=" +
                                describe(c) + ", model dimension is " + std::to_string(def_.dimension));
  }
  for (int i = 0; i < p.chol.dim(); ++i) {
    if (!(p.chol(i, i) > 0.0)) {
      throw ModelMisspecification("degenerate covariance at c=" + describe(c) + ": Cholesky diagonal entry " +
                                  std::to_string(i) + " is not positive");
    }
  }
  const double size = p.size_bound();
  if (!(size <= def_.eta0)) {
    std::ostringstream os;
    os.precision(17);
    os << "eta0 bound violated at c=" << describe(c) << ": ||mean|| + ||L|| = " << size << " > " << def_.eta0;
    throw ModelMisspecification(os.str());
  }
  return p;
}

Parameter ParameterModel::sample_parameter(RngStream& rng) const { return def_.sampler(rng); }

double ParameterModel::density(std::span<const double> c) const {
  if (!def_.density) throw ConfigError("parameter model '" + def_.name + "' has no prior density");
  return def_.density(c);
}

// ---------------------------------------------------------------------------
// Concrete models

void FiniteMixture::validate() const {
  if (weights.empty()) throw ConfigError("finite mixture needs at least one component");
  if (weights.size() != components.size()) {
    throw ConfigError("finite mixture: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(components.size()) + " components");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("finite mixture: weights must be positive");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw ConfigError("finite mixture: weights must sum to 1");
  const int m = components.front().dim();
  for (const auto& comp : components) {
    if (comp.dim() != m || comp.chol.dim() != m) {
      throw ConfigError("finite mixture: components have inconsistent dimensions");
    }
    for (int i = 0; i < m; ++i) {
      if (!(comp.chol(i, i) > 0.0)) throw ConfigError("finite mixture: singular Cholesky factor");
    }
  }
}

ParameterModel mixture_as_parameter_model(const FiniteMixture& mix) {
  mix.validate();
  std::vector<double> cumulative;
  double acc = 0.0;
  for (double w : mix.weights) cumulative.push_back(acc += w);
  cumulative.back() = 1.0;

  ParameterModel::Definition def;
  def.name = "finite-mixture";
  def.dimension = mix.components.front().dim();
  def.parameter_dimension = 1;
  for (const auto& comp : mix.components) def.eta0 = std::max(def.eta0, comp.size_bound());
  for (std::size_t i = 0; i < mix.weights.size(); ++i) {
    def.atoms.push_back({{static_cast<double>(i)}, mix.weights[i]});
  }
  def.sampler = [cumulative](RngStream& rng) {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    return Parameter{static_cast<double>(idx)};
  };
  def.map = [components = mix.components](std::span<const double> c) {
    const double raw = c.empty() ? -1.0 : c[0];
    if (!(raw >= 0.0) || raw >= static_cast<double>(components.size()) || raw != std::floor(raw)) {
      throw ModelMisspecification("finite mixture: parameter " + std::to_string(raw) + " is not a component index");
    }
    return components[static_cast<std::size_t>(raw)];
  };
  return ParameterModel(std::move(def));
}

ParameterModel point_mass_model(Parameter c0, GaussianParams params) {
  ParameterModel::Definition def;
  def.name = "point-mass";
  def.dimension = params.dim();
  def.parameter_dimension = static_cast<int>(c0.size());
  def.eta0 = params.size_bound();
  def.atoms.push_back({c0, 1.0});
  def.sampler = [c0](RngStream&) { return c0; };
  def.map = [params](std::span<const double>) { return params; };
  return ParameterModel(std::move(def));
}

ParameterModel beta_example_model(double delta) {
  if (!(delta > 0.0)) throw ConfigError("beta example: delta must be > 0");
  ParameterModel::Definition def;
  def.name = "beta-example";
  def.dimension = 2;
  def.parameter_dimension = 1;
  // ||(0, c)|| <= 1 and ||I_2||_F = sqrt(2).
  def.eta0 = 1.0 + std::sqrt(2.0);
  def.support = std::make_pair(-1.0, 1.0);
  def.sampler = [delta](RngStream& rng) { return Parameter{2.0 * sample_beta_symmetric(delta, rng) - 1.0}; };
  def.density = [delta](std::span<const double> c) {
    const double v = c[0];
    if (!(v > -1.0 && v < 1.0)) return 0.0;
    return std::pow(1.0 - v * v, delta - 1.0);
  };
  def.map = [](std::span<const double> c) {
    return GaussianParams{{0.0, c[0]}, CholeskyFactor::identity(2)};
  };
  return ParameterModel(std::move(def));
}

// ---------------------------------------------------------------------------
// Slater verification

SlaterReport verify_slater(const ParameterModel& model, const Constraint& cons, std::span<const double> x,
                           double gamma0, std::size_t n_check, RngStream& rng) {
  if (!(gamma0 > 0.0)) throw std::invalid_argument("verify_slater: gamma0 must be > 0");
  if (n_check < 1) throw std::invalid_argument("verify_slater: n_check must be >= 1");

  SlaterReport report;
  report.gamma0 = gamma0;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  const auto visit = [&](std::span<const double> c) {
    const GaussianParams p = model.gaussian_params(c);
    report.worst_margin = std::max(report.worst_margin, cons(x, p.mean));
    ++report.samples_checked;
  };
  if (model.is_discrete()) {
    for (const auto& atom : model.atoms()) visit(atom.value);
  } else {
    for (std::size_t i = 0; i < n_check; ++i) visit(model.sample_parameter(rng));
  }
  report.pass = report.worst_margin < -gamma0;
  return report;
}

}  // namespace srd
