#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cdiff/analysis.hpp"
#include "cdiff/bd.hpp"
#include "cdiff/cell_list.hpp"
#include "cdiff/core.hpp"
#include "cdiff/rng.hpp"

namespace cdiff {

struct MhState {
  int dim = 2;
  std::vector<double> coords;
  double total_potential = 0.0;  // running sum of V(x_i)
  std::uint64_t step_count = 0;
  std::uint64_t accept_count = 0;

  double acceptance_rate() const {
    return step_count == 0 ? 0.0
                           : static_cast<double>(accept_count) / static_cast<double>(step_count);
  }
};

/// Metropolis rule: accept when u < exp(-delta_v).
inline bool metropolis_accept(double delta_v, double uniform) {
  return delta_v <= 0.0 || uniform < std::exp(-delta_v);
}

/// Single-particle Metropolis-Hastings chain for N hard spheres in V,
/// targeting exp(-sum V) on the overlap-free configurations.
class MhChain {
 public:
  MhChain(ParticleEnsemble start, const PotentialSpec& potential, const Box& domain,
          double diameter, double proposal_scale);

  /// One proposal: uniform particle choice, isotropic Gaussian displacement,
  /// reject on leaving the box or overlapping, Metropolis test otherwise.
  /// Returns whether the move was accepted.
  bool step(RngStream& rng);

  const MhState& state() const { return state_; }
  /// Recomputes the sum of V from scratch, returning the bookkeeping drift.
  double refresh_total_potential();
  bool overlap_free(double tolerance = 1e-12) const;

 private:
  MhState state_;
  const PotentialSpec& potential_;
  Box domain_;
  double diameter_;
  double proposal_scale_;
  CellList cells_;
  std::vector<double> site_potential_;
};

struct MhResult {
  HistogramEstimate histogram;
  std::uint64_t steps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  double acceptance_rate = 0.0;
  double proposal_scale = 0.0;
  std::uint64_t seed = 0;
  int chains = 1;
  double wall_time_seconds = 0.0;
};

double default_proposal_scale(const SimConfig& config);
std::uint64_t default_burn_in(std::uint64_t steps);
std::uint64_t default_thin(std::uint64_t steps, std::uint64_t burn_in, int particle_count);

/// Runs config.realizations independent chains (stream ids 0..M-1) of
/// `steps` proposals each, binning all N positions every `thin` steps after
/// `burn_in`. Chains start from sequential uniform insertion.
MhResult run_mh(const SimConfig& config, std::uint64_t steps, std::uint64_t burn_in,
                std::uint64_t thin, const GridSpec& histogram_grid, unsigned threads = 0);

/// Same, with steps/burn-in/thin taken from config.mh (defaults resolved).
MhResult run_mh(const SimConfig& config, const GridSpec& histogram_grid, unsigned threads = 0);

}  // namespace cdiff
