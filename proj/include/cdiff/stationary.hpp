#pragma once

#include <utility>
#include <vector>

#include "cdiff/core.hpp"
#include "cdiff/grid.hpp"

namespace cdiff {

/// The unique p > 0 with ln p + 2 a p = rhs (a >= 0). Newton iteration on
/// u = ln p, started above the root so the convex iteration is monotone.
double solve_pointwise(double rhs, double a);

struct StationarySolution {
  ScalarField density;
  double constant = 0.0;  // C in ln p + 2 a p + V = C
  double residual_norm = 0.0;
  double a = 0.0;
  /// (C, discrete mass) pairs visited by the normalization search.
  std::vector<std::pair<double, double>> bisection_trace;
};

/// Finds C by bisection so the midpoint-rule mass of solve_pointwise(C - V)
/// equals 1. Throws kBracketing if no bracket is found.
StationarySolution solve_stationary(const PotentialSpec& potential, double a,
                                    const GridSpec& grid);

/// Midpoint-rule quadrature of  p ln p + a p^2 + V p ; p ln p -> 0 at p = 0.
double free_energy(const ScalarField& density, const PotentialSpec& potential, double a);

/// max over cells of |ln p + 2 a p + V - C|; throws kDomain on p <= 0.
double stationary_residual(const ScalarField& density, const PotentialSpec& potential, double a,
                           double constant);

}  // namespace cdiff
