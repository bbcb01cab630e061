#include "cdiff/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace cdiff {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedDimension: return "unsupported_dimension";
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kOutOfDomain: return "out_of_domain";
    case ErrorCode::kShape: return "shape_mismatch";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kPackingInfeasible: return "packing_infeasible";
    case ErrorCode::kStepTooLarge: return "step_too_large";
    case ErrorCode::kUnresolvedCollision: return "unresolved_collision";
    case ErrorCode::kInstability: return "pde_instability";
    case ErrorCode::kBracketing: return "bracketing_failure";
    case ErrorCode::kInvariant: return "invariant_violation";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

double Box::min_width() const {
  double w = width(0);
  for (int k = 1; k < dim; ++k) w = std::min(w, width(k));
  return w;
}

double Box::volume() const {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= width(k);
  return v;
}

bool Box::contains(std::span<const double> x) const {
  for (int k = 0; k < dim; ++k) {
    if (!(x[k] >= lo[k] && x[k] <= hi[k])) return false;
  }
  return true;
}

Vec Box::center() const {
  Vec c{0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) c[k] = 0.5 * (lo[k] + hi[k]);
  return c;
}

// ---------------------------------------------------------------------------

PotentialSpec volcano_potential() {
  return GaussianSumPotential{{{-4.77, 100.0}, {3.58, 50.0}}};
}

bool is_zero(const PotentialSpec& spec) { return std::holds_alternative<ZeroPotential>(spec); }

namespace {

bool grid_covers(const GridSpec& g, const Box& box) {
  if (g.dim != box.dim) return false;
  for (int k = 0; k < box.dim; ++k) {
    if (g.lo[k] > box.lo[k] || g.hi[k] < box.hi[k]) return false;
  }
  return true;
}

double squared_norm(std::span<const double> x, std::size_t dim) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < dim; ++k) r2 += x[k] * x[k];
  return r2;
}

}  // namespace

void validate(const PotentialSpec& spec, const Box& domain) {
  if (const auto* g = std::get_if<GaussianSumPotential>(&spec)) {
    for (const auto& term : g->terms) {
      if (!(term.width > 0.0)) fail(ErrorCode::kConfig, "Gaussian potential widths must be > 0");
    }
  } else if (const auto* t = std::get_if<TabulatedPotential>(&spec)) {
    if (!grid_covers(t->values.grid(), domain)) {
      fail(ErrorCode::kConfig, "tabulated potential grid does not cover the domain");
    }
  }
}

double eval_potential(const PotentialSpec& spec, std::span<const double> x) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ZeroPotential>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, GaussianSumPotential>) {
          const double r2 = squared_norm(x, x.size());
          double v = 0.0;
          for (const auto& term : p.terms) v += term.amplitude * std::exp(-term.width * r2);
          return v;
        } else {
          return p.values.value_at(x);
        }
      },
      spec);
}

Vec eval_force(const PotentialSpec& spec, std::span<const double> x) {
  return std::visit(
      [&](const auto& p) -> Vec {
        using T = std::decay_t<decltype(p)>;
        Vec f{0.0, 0.0, 0.0};
        if constexpr (std::is_same_v<T, GaussianSumPotential>) {
          const double r2 = squared_norm(x, x.size());
          double s = 0.0;
          for (const auto& term : p.terms) {
            s += 2.0 * term.amplitude * term.width * std::exp(-term.width * r2);
          }
          for (std::size_t k = 0; k < x.size(); ++k) f[k] = s * x[k];
        } else if constexpr (std::is_same_v<T, TabulatedPotential>) {
          const Vec g = p.values.gradient_at(x);
          for (std::size_t k = 0; k < x.size(); ++k) f[k] = -g[k];
        }
        return f;
      },
      spec);
}

ScalarField sample_potential(const PotentialSpec& spec, const GridSpec& grid) {
  ScalarField v(grid);
  if (is_zero(spec)) return v;
  const auto d = static_cast<std::size_t>(grid.dim);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.center(i);
    v[i] = eval_potential(spec, std::span<const double>(x.data(), d));
  }
  return v;
}

// ---------------------------------------------------------------------------

void validate(const InitSpec& spec, const Box& domain) {
  if (const auto* g = std::get_if<TruncatedGaussianInit>(&spec)) {
    if (!(g->sigma > 0.0)) fail(ErrorCode::kConfig, "initial Gaussian sigma must be > 0");
  } else if (const auto* t = std::get_if<TabulatedDensityInit>(&spec)) {
    if (!grid_covers(t->density.grid(), domain)) {
      fail(ErrorCode::kConfig, "tabulated initial density does not cover the domain");
    }
    if (t->density.min() < 0.0) fail(ErrorCode::kConfig, "tabulated initial density is negative");
    if (std::abs(t->density.integral() - 1.0) > 1e-8) {
      fail(ErrorCode::kConfig, "tabulated initial density must integrate to 1");
    }
  }
}

void validate(const SimConfig& c) {
  if (c.dim != 2 && c.dim != 3) {
    fail(ErrorCode::kUnsupportedDimension, fmt::format("dimension {} not in {{2, 3}}", c.dim));
  }
  if (c.domain.dim != c.dim) fail(ErrorCode::kConfig, "domain dimension differs from sim.d");
  for (int k = 0; k < c.dim; ++k) {
    if (!(c.domain.hi[k] > c.domain.lo[k])) fail(ErrorCode::kConfig, "domain requires lo < hi");
  }
  if (c.particle_count < 1) fail(ErrorCode::kConfig, "particle count must be >= 1");
  if (!(c.diameter >= 0.0)) fail(ErrorCode::kConfig, "diameter must be >= 0");
  if (!(c.diameter < c.domain.min_width())) {
    fail(ErrorCode::kConfig, "diameter must be smaller than every side of the domain");
  }
  if (c.particle_count * particle_volume(c.diameter, c.dim) >= c.domain.volume()) {
    fail(ErrorCode::kPackingInfeasible, "particle bodies exceed the domain volume");
  }
  if (!(c.dt > 0.0)) fail(ErrorCode::kConfig, "dt must be > 0");
  if (!(c.t_final >= 0.0)) fail(ErrorCode::kConfig, "t_final must be >= 0");
  if (c.realizations < 1) fail(ErrorCode::kConfig, "realizations must be >= 1");
  if (c.grid_cells < 1) fail(ErrorCode::kConfig, "grid cells must be >= 1");
  if (c.compare_cells < 1) fail(ErrorCode::kConfig, "compare cells must be >= 1");
  double previous = 0.0;
  for (double t : c.sample_times) {
    if (!(t >= previous)) fail(ErrorCode::kConfig, "sample times must be sorted and >= 0");
    if (t > c.t_final) fail(ErrorCode::kConfig, "sample time exceeds t_final");
    previous = t;
  }
  if (c.bd.max_sweeps < 1) fail(ErrorCode::kConfig, "bd.max_sweeps must be >= 1");
  if (c.bd.check_interval < 1) fail(ErrorCode::kConfig, "bd.check_interval must be >= 1");
  if (!(c.pde.safety_factor > 0.0 && c.pde.safety_factor <= 1.0)) {
    fail(ErrorCode::kConfig, "pde.safety_factor must lie in (0, 1]");
  }
  validate(c.potential, c.domain);
  validate(c.init, c.domain);
}

// ---------------------------------------------------------------------------

double alpha(int dim) {
  switch (dim) {
    case 2: return std::numbers::pi / 2.0;
    case 3: return 2.0 * std::numbers::pi / 3.0;
    default:
      fail(ErrorCode::kUnsupportedDimension, fmt::format("dimension {} not in {{2, 3}}", dim));
  }
}

double excluded_volume_coefficient(int particle_count, double diameter, int dim) {
  const double ad = alpha(dim);
  if (particle_count < 1) fail(ErrorCode::kDomain, "particle count must be >= 1");
  if (!(diameter >= 0.0)) fail(ErrorCode::kDomain, "diameter must be >= 0");
  return ad * (particle_count - 1) * std::pow(diameter, dim);
}

double particle_volume(double diameter, int dim) {
  const double r = 0.5 * diameter;
  switch (dim) {
    case 2: return std::numbers::pi * r * r;
    case 3: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
    default:
      fail(ErrorCode::kUnsupportedDimension, fmt::format("dimension {} not in {{2, 3}}", dim));
  }
}

double volume_fraction(int particle_count, double diameter, int dim, double domain_volume) {
  if (!(domain_volume > 0.0)) fail(ErrorCode::kDomain, "domain volume must be > 0");
  return particle_count * particle_volume(diameter, dim) / domain_volume;
}

double concentration_from_density(double density, int particle_count, double diameter, int dim) {
  if (dim != 2 && dim != 3) {
    fail(ErrorCode::kUnsupportedDimension, fmt::format("dimension {} not in {{2, 3}}", dim));
  }
  if (density < 0.0) fail(ErrorCode::kDomain, "density must be >= 0");
  return std::numbers::pi * particle_count * std::pow(diameter, dim) * density / (2.0 * dim);
}

Coefficients make_coefficients(const SimConfig& config) {
  Coefficients c;
  c.dim = config.dim;
  c.particle_count = config.particle_count;
  c.diameter = config.diameter;
  c.alpha_d = alpha(config.dim);
  c.a = excluded_volume_coefficient(config.particle_count, config.diameter, config.dim);
  c.phi = volume_fraction(config.particle_count, config.diameter, config.dim,
                          config.domain.volume());
  return c;
}

}  // namespace cdiff
