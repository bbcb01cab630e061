#include "cdiff/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace cdiff {

double solve_pointwise(double rhs, double a) {
  if (a < 0.0) fail(ErrorCode::kDomain, "a must be >= 0");
  if (!std::isfinite(rhs)) fail(ErrorCode::kDomain, "right-hand side must be finite");
  if (a == 0.0) return std::exp(rhs);

  // h(u) = u + 2 a e^u - rhs is increasing and convex. Both candidates below
  // satisfy h >= 0, so Newton from their minimum decreases monotonically.
  double u = std::min(rhs, std::log(std::max(1.0, rhs / (2.0 * a))));
  for (int iter = 0; iter < 200; ++iter) {
    const double e = 2.0 * a * std::exp(u);
    const double h = u + e - rhs;
    if (h <= 0.0) break;
    const double step = h / (1.0 + e);
    u -= step;
    if (step <= 1e-16 * std::max(1.0, std::abs(u))) break;
  }
  return std::exp(u);
}

namespace {

double discrete_mass(const ScalarField& potential, double constant, double a, double cell_volume,
                     ScalarField* out) {
  double mass = 0.0;
  for (std::size_t i = 0; i < potential.size(); ++i) {
    const double p = solve_pointwise(constant - potential[i], a);
    if (out != nullptr) (*out)[i] = p;
    mass += p;
  }
  return mass * cell_volume;
}

}  // namespace

StationarySolution solve_stationary(const PotentialSpec& potential, double a,
                                    const GridSpec& grid) {
  if (a < 0.0) fail(ErrorCode::kDomain, "a must be >= 0");
  const ScalarField v = sample_potential(potential, grid);
  const double cell_volume = grid.cell_volume();
  StationarySolution sol;
  sol.a = a;

  auto mass_at = [&](double c) {
    const double m = discrete_mass(v, c, a, cell_volume, nullptr);
    sol.bisection_trace.emplace_back(c, m);
    return m;
  };

  // At C_lo every cell has p <= 1/|Omega|, so the mass is at most 1.
  double c_lo = v.min() + std::log(1.0 / grid.volume());
  double m_lo = mass_at(c_lo);
  double step = 1.0;
  double c_hi = c_lo + step;
  double m_hi = mass_at(c_hi);
  constexpr int kMaxExpansions = 64;
  for (int k = 0; m_hi < 1.0; ++k) {
    if (k == kMaxExpansions || !std::isfinite(m_hi)) {
      fail(ErrorCode::kBracketing, "could not bracket the normalization constant");
    }
    c_lo = c_hi;
    m_lo = m_hi;
    step *= 2.0;
    c_hi = c_lo + step;
    m_hi = mass_at(c_hi);
  }
  if (m_lo > 1.0) fail(ErrorCode::kBracketing, "lower bracket already exceeds unit mass");

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (c_lo + c_hi);
    if (mid <= c_lo || mid >= c_hi) break;
    const double m = mass_at(mid);
    if (m < 1.0) {
      c_lo = mid;
    } else {
      c_hi = mid;
    }
    if (m == 1.0) {
      c_lo = c_hi = mid;
      break;
    }
  }

  ScalarField density(grid);
  const double m_low_end = discrete_mass(v, c_lo, a, cell_volume, nullptr);
  const double m_high_end = discrete_mass(v, c_hi, a, cell_volume, nullptr);
  sol.constant = std::abs(m_low_end - 1.0) <= std::abs(m_high_end - 1.0) ? c_lo : c_hi;
  discrete_mass(v, sol.constant, a, cell_volume, &density);
  sol.density = std::move(density);
  sol.residual_norm = stationary_residual(sol.density, potential, a, sol.constant);
  return sol;
}

double free_energy(const ScalarField& density, const PotentialSpec& potential, double a) {
  const GridSpec& grid = density.grid();
  const ScalarField v = sample_potential(potential, grid);
  double total = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double p = density[i];
    if (p < 0.0) fail(ErrorCode::kDomain, "free energy requires p >= 0");
    const double entropy = p > 0.0 ? p * std::log(p) : 0.0;
    total += entropy + a * p * p + v[i] * p;
  }
  return total * grid.cell_volume();
}

double stationary_residual(const ScalarField& density, const PotentialSpec& potential, double a,
                           double constant) {
  const ScalarField v = sample_potential(potential, density.grid());
  double worst = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double p = density[i];
    if (!(p > 0.0)) fail(ErrorCode::kDomain, fmt::format("residual requires p > 0 (cell {})", i));
    worst = std::max(worst, std::abs(std::log(p) + 2.0 * a * p + v[i] - constant));
  }
  return worst;
}

}  // namespace cdiff
