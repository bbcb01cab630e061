#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cdiff/error.hpp"
#include "cdiff/grid.hpp"

namespace cdiff {

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

/// Axis-aligned box available to particle centers.
struct Box {
  int dim = 2;
  Vec lo{-0.5, -0.5, -0.5};
  Vec hi{0.5, 0.5, 0.5};

  double width(int axis) const { return hi[axis] - lo[axis]; }
  double min_width() const;
  double volume() const;
  bool contains(std::span<const double> x) const;
  Vec center() const;

  bool operator==(const Box&) const = default;
};

// ---------------------------------------------------------------------------
// External potential V(x); the force is always f = -grad V.
// ---------------------------------------------------------------------------

struct ZeroPotential {};

struct GaussianTerm {
  double amplitude = 0.0;  // A_i
  double width = 1.0;      // beta_i, multiplies |x|^2 in the exponent
};

/// V(x) = sum_i A_i exp(-beta_i |x|^2), centered at the origin.
struct GaussianSumPotential {
  std::vector<GaussianTerm> terms;
};

/// V sampled at cell centers, multilinear in between.
struct TabulatedPotential {
  ScalarField values;
};

using PotentialSpec = std::variant<ZeroPotential, GaussianSumPotential, TabulatedPotential>;

/// The well-plus-barrier potential -4.77 exp(-100|x|^2) + 3.58 exp(-50|x|^2).
PotentialSpec volcano_potential();

bool is_zero(const PotentialSpec& spec);
void validate(const PotentialSpec& spec, const Box& domain);

double eval_potential(const PotentialSpec& spec, std::span<const double> x);
Vec eval_force(const PotentialSpec& spec, std::span<const double> x);

/// V sampled at every cell center of `grid`.
ScalarField sample_potential(const PotentialSpec& spec, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Initial distribution of particle centers
// ---------------------------------------------------------------------------

struct UniformInit {};

struct TruncatedGaussianInit {
  Vec mean{0.0, 0.0, 0.0};
  double sigma = 0.09;
};

struct TabulatedDensityInit {
  ScalarField density;
};

using InitSpec = std::variant<UniformInit, TruncatedGaussianInit, TabulatedDensityInit>;

void validate(const InitSpec& spec, const Box& domain);

// ---------------------------------------------------------------------------
// Experiment description
// ---------------------------------------------------------------------------

enum class DriftScheme { kEntropicMean, kUpwind };

struct BdSettings {
  int max_sweeps = 100;
  // Full no-overlap audit every this many steps (every step in debug builds).
  int check_interval = 100;
  std::size_t trajectory_realizations = 0;
};

struct MhSettings {
  std::uint64_t steps = 10'000'000;
  std::int64_t burn_in = -1;  // negative: 10% of steps
  std::int64_t thin = -1;     // negative: chosen so ~5e6 positions are binned
  double proposal_scale = -1.0;  // negative: eps, or 0.05 domain widths when eps = 0
  std::uint64_t refresh_interval = 100'000;
};

struct PdeSettings {
  double safety_factor = 0.9;
  DriftScheme drift = DriftScheme::kEntropicMean;
};

struct SimConfig {
  int dim = 2;
  int particle_count = 1;
  double diameter = 0.0;
  Box domain;
  double dt = 1e-5;
  double t_final = 0.0;
  int realizations = 1;
  std::uint64_t seed = 0;
  PotentialSpec potential = ZeroPotential{};
  InitSpec init = UniformInit{};

  int grid_cells = 128;
  std::vector<double> sample_times;
  int compare_cells = 16;
  std::string compare_source_a;
  std::string compare_source_b;

  BdSettings bd;
  MhSettings mh;
  PdeSettings pde;

  GridSpec grid() const { return make_grid(dim, domain.lo, domain.hi, grid_cells); }
};

/// Checks every structural invariant of the configuration; throws kConfig,
/// kPackingInfeasible or kUnsupportedDimension.
void validate(const SimConfig& config);

// ---------------------------------------------------------------------------
// Scalar coefficients of the continuum model
// ---------------------------------------------------------------------------

/// Pair coefficient alpha_d: pi/2 for disks, 2 pi/3 for spheres.
double alpha(int dim);

/// a = alpha_d (N - 1) eps^d, the coefficient of p^2 under the gradient.
double excluded_volume_coefficient(int particle_count, double diameter, int dim);

/// Fraction of |Omega| covered by N particle bodies of diameter eps.
double volume_fraction(int particle_count, double diameter, int dim, double domain_volume);

/// c = pi N eps^d p / (2 d).
double concentration_from_density(double density, int particle_count, double diameter, int dim);

/// Volume of one particle body (disk area or sphere volume).
double particle_volume(double diameter, int dim);

struct Coefficients {
  double alpha_d = 0.0;
  double a = 0.0;
  double phi = 0.0;
  int dim = 2;
  int particle_count = 1;
  double diameter = 0.0;
};

Coefficients make_coefficients(const SimConfig& config);

}  // namespace cdiff
