#include "cdiff/pde.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace cdiff {

PdeParams make_pde_params(const PotentialSpec& potential, const GridSpec& grid, double a,
                          double dt_max, double safety_factor, DriftScheme drift) {
  if (a < 0.0) fail(ErrorCode::kDomain, "excluded-volume coefficient must be >= 0");
  PdeParams params;
  params.grid = grid;
  params.a = a;
  params.dt_max = dt_max;
  params.safety_factor = safety_factor;
  params.drift = drift;
  params.has_drift = !is_zero(potential);
  if (!params.has_drift) return params;

  const ScalarField v = sample_potential(potential, grid);
  for (int axis = 0; axis < grid.dim; ++axis) {
    auto& f = params.face_force[axis];
    f.assign(grid.size(), 0.0);
    const std::size_t stride = grid.stride(axis);
    const double h = grid.spacing(axis);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid.unflatten(i)[axis] + 1 >= grid.cells[axis]) continue;
      f[i] = -(v[i + stride] - v[i]) / h;
      params.max_force = std::max(params.max_force, std::abs(f[i]));
    }
  }
  return params;
}

ScalarField init_gaussian_grid(double sigma, const GridSpec& grid, const Vec& mean) {
  if (!(sigma > 0.0)) fail(ErrorCode::kDomain, "sigma must be > 0");
  ScalarField p(grid);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.center(i);
    double r2 = 0.0;
    for (int k = 0; k < grid.dim; ++k) r2 += (x[k] - mean[k]) * (x[k] - mean[k]);
    p[i] = std::exp(-r2 * inv);
  }
  const double mass = p.integral();
  for (double& value : p.values()) value /= mass;
  return p;
}

ScalarField init_density(const InitSpec& init, const GridSpec& grid) {
  if (std::holds_alternative<UniformInit>(init)) return ScalarField(grid, 1.0 / grid.volume());
  if (const auto* g = std::get_if<TruncatedGaussianInit>(&init)) {
    return init_gaussian_grid(g->sigma, grid, g->mean);
  }
  const auto& tab = std::get<TabulatedDensityInit>(init).density;
  if (tab.grid() == grid) return tab;
  ScalarField p(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.center(i);
    p[i] = tab.value_at(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim)));
  }
  const double mass = p.integral();
  for (double& value : p.values()) value /= mass;
  return p;
}

double entropic_face_value(double p, double q, double a) {
  if (p <= 0.0 || q <= 0.0) return 0.0;
  const double mean = 0.5 * (p + q);
  const double u = (q - p) / (q + p);
  // L = (q - p) / (ln q - ln p) = mean * u / atanh(u).
  double ratio;
  if (std::abs(u) < 1e-4) {
    const double u2 = u * u;
    ratio = 1.0 - u2 / 3.0 - 4.0 * u2 * u2 / 45.0;
  } else {
    ratio = u / std::atanh(u);
  }
  const double log_mean = mean * ratio;
  return log_mean * (1.0 + a * (p + q)) / (1.0 + 2.0 * a * log_mean);
}

namespace {

template <bool Nonlinear>
void step_impl(ScalarField& field, const PdeParams& params, double dt) {
  const GridSpec& grid = field.grid();
  if (!(grid == params.grid)) fail(ErrorCode::kShape, "field and PDE parameters use different grids");
  const std::size_t n = grid.size();
  const double a = params.a;

  thread_local std::vector<double> phi;
  thread_local std::vector<double> rate;
  phi.resize(n);
  rate.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = field[i];
    if constexpr (Nonlinear) {
      phi[i] = p + a * p * p;
    } else {
      phi[i] = p;
    }
  }

  for (int axis = 0; axis < grid.dim; ++axis) {
    const std::size_t stride = grid.stride(axis);
    const int cells = grid.cells[axis];
    const std::size_t block = stride * static_cast<std::size_t>(cells);
    const double inv_h = 1.0 / grid.spacing(axis);
    const double* force = params.has_drift ? params.face_force[axis].data() : nullptr;
    // Faces are interior only: wall faces carry zero flux.
    for (std::size_t base = 0; base < n; base += block) {
      for (int line = 0; line + 1 < cells; ++line) {
        const std::size_t row = base + static_cast<std::size_t>(line) * stride;
        for (std::size_t off = 0; off < stride; ++off) {
          const std::size_t i = row + off;
          const std::size_t j = i + stride;
          double flux = (phi[j] - phi[i]) * inv_h;
          if (force != nullptr) {
            const double f = force[i];
            double face;
            if (params.drift == DriftScheme::kUpwind) {
              face = f > 0.0 ? field[i] : field[j];
            } else if constexpr (Nonlinear) {
              face = entropic_face_value(field[i], field[j], a);
            } else {
              face = entropic_face_value(field[i], field[j], 0.0);
            }
            flux -= f * face;
          }
          flux *= inv_h;
          rate[i] += flux;
          rate[j] -= flux;
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    double p = field[i] + dt * rate[i];
    if (p < 0.0) {
      if (p < -1e-12) {
        fail(ErrorCode::kInstability,
             fmt::format("density {} below zero at cell {} (dt = {} too large)", p, i, dt));
      }
      p = 0.0;
    }
    field[i] = p;
  }
  field.set_time(field.time() + dt);
}

}  // namespace

void step_nonlinear(ScalarField& field, const PdeParams& params, double dt) {
  step_impl<true>(field, params, dt);
}

void step_linear(ScalarField& field, const PdeParams& params, double dt) {
  step_impl<false>(field, params, dt);
}

double cfl_dt(const ScalarField& field, const PdeParams& params) {
  const GridSpec& grid = field.grid();
  const double h = grid.min_spacing();
  const double p_max = std::max(0.0, field.max());
  double dt = h * h / (2.0 * grid.dim * (1.0 + 2.0 * params.a * p_max));
  if (params.has_drift && params.max_force > 0.0) dt = std::min(dt, h / (2.0 * params.max_force));
  return params.safety_factor * dt;
}

PdeRun integrate(ScalarField field, const PdeParams& params, std::span<const double> sample_times,
                 const StepObserver& observer) {
  PdeRun run;
  run.initial_mass = field.integral();
  const bool linear = params.a == 0.0;
  for (double target : sample_times) {
    if (target < field.time()) fail(ErrorCode::kConfig, "sample times must be sorted");
    while (field.time() < target) {
      const double stable = std::min(cfl_dt(field, params), params.dt_max);
      double dt = target - field.time();
      const bool last = dt <= stable * (1.0 + 1e-9);
      if (!last) dt = stable;
      if (linear) {
        step_linear(field, params, dt);
      } else {
        step_nonlinear(field, params, dt);
      }
      if (last) field.set_time(target);
      ++run.steps;
      if (observer) observer(field);
    }
    const double mass = field.integral();
    if (run.initial_mass > 0.0) {
      run.max_relative_mass_drift = std::max(
          run.max_relative_mass_drift, std::abs(mass - run.initial_mass) / run.initial_mass);
    }
    run.snapshots.push_back(field);
  }
  return run;
}

PdeRun solve_pde(const SimConfig& config, std::span<const double> sample_times,
                 const StepObserver& observer) {
  validate(config);
  const GridSpec grid = config.grid();
  const double a = excluded_volume_coefficient(config.particle_count, config.diameter, config.dim);
  const PdeParams params = make_pde_params(config.potential, grid, a, config.dt,
                                           config.pde.safety_factor, config.pde.drift);
  return integrate(init_density(config.init, grid), params, sample_times, observer);
}

}  // namespace cdiff
