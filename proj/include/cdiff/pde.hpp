#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "cdiff/core.hpp"
#include "cdiff/grid.hpp"

namespace cdiff {

/// Discretization data for dp/dt = div( grad(p + a p^2) - f p ) with zero
/// flux through the walls.
struct PdeParams {
  GridSpec grid;
  double a = 0.0;
  /// Force normal to the face between cell i and its +axis neighbour, stored
  /// at index i; sampled as -(V_j - V_i) / h from V at cell centers.
  std::array<std::vector<double>, 3> face_force;
  bool has_drift = false;
  double max_force = 0.0;
  double dt_max = 1e-5;
  double safety_factor = 0.9;
  DriftScheme drift = DriftScheme::kEntropicMean;
};

PdeParams make_pde_params(const PotentialSpec& potential, const GridSpec& grid, double a,
                          double dt_max = 1e-5, double safety_factor = 0.9,
                          DriftScheme drift = DriftScheme::kEntropicMean);

/// Centered Gaussian exp(-|x - mean|^2 / (2 sigma^2)) sampled at cell
/// centers and rescaled so the discrete integral is 1.
ScalarField init_gaussian_grid(double sigma, const GridSpec& grid, const Vec& mean = {});

/// Discrete initial density for any InitSpec, normalized to unit mass.
ScalarField init_density(const InitSpec& init, const GridSpec& grid);

/// Face value used for the drift flux in the entropic scheme:
/// L (1 + a (p + q)) / (1 + 2 a L) with L the logarithmic mean of p and q.
double entropic_face_value(double p, double q, double a);

/// One explicit conservative step of the nonlinear equation. Throws
/// kInstability if any cell drops below -1e-12.
void step_nonlinear(ScalarField& field, const PdeParams& params, double dt);
/// The a = 0 (point particle) equation through its own code path.
void step_linear(ScalarField& field, const PdeParams& params, double dt);

/// safety * min( h^2 / (2 d (1 + 2 a p_max)), h / (2 max|f|) ).
double cfl_dt(const ScalarField& field, const PdeParams& params);

struct PdeRun {
  std::vector<ScalarField> snapshots;
  std::uint64_t steps = 0;
  double initial_mass = 0.0;
  double max_relative_mass_drift = 0.0;
};

using StepObserver = std::function<void(const ScalarField&)>;

/// Integrates from `initial` to every sample time, shortening the last step
/// before each sample so snapshots land exactly on it.
PdeRun integrate(ScalarField initial, const PdeParams& params,
                 std::span<const double> sample_times, const StepObserver& observer = {});

/// Builds the initial field, coefficient and force field from the config
/// and integrates; dt = min(cfl_dt, config.dt).
PdeRun solve_pde(const SimConfig& config, std::span<const double> sample_times,
                 const StepObserver& observer = {});

}  // namespace cdiff
