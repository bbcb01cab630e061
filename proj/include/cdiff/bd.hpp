#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cdiff/analysis.hpp"
#include "cdiff/cell_list.hpp"
#include "cdiff/core.hpp"
#include "cdiff/rng.hpp"

namespace cdiff {

/// Positions of N particle centers for one realization, stored as a flat
/// N x d array.
struct ParticleEnsemble {
  int dim = 2;
  std::vector<double> coords;
  double time = 0.0;
  std::uint64_t realization_id = 0;

  std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
  std::span<double> position(std::size_t i) {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<const double> position(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Distances below eps - kContactSlack count as overlaps during resolution;
/// the slack absorbs round-off after pairs are placed at contact.
inline constexpr double kContactSlack = 1e-13;

/// Free Euler-Maruyama flight x <- x + f(x) dt + sqrt(2 dt) xi with the given
/// standard-normal noise (N x d values). Advances the ensemble time.
void apply_em_update(ParticleEnsemble& ensemble, const PotentialSpec& potential, double dt,
                     std::span<const double> noise);
void em_step(ParticleEnsemble& ensemble, const PotentialSpec& potential, double dt,
             RngStream& rng);

/// Mirror-reflects one coordinate vector into the box.
void reflect_into(std::span<double> x, const Box& domain);
void reflect_walls(ParticleEnsemble& ensemble, const Box& domain);

/// All pairs (i < j) with |x_i - x_j| < threshold, sorted ascending. The cell
/// list must be built from the current positions with cell side >= threshold.
std::vector<IndexPair> detect_overlaps(const ParticleEnsemble& ensemble, const CellList& cells,
                                       double threshold);

struct ResolveStats {
  int sweeps = 0;
  std::size_t corrections = 0;
  std::size_t initial_overlaps = 0;
};

/// Pushes overlapping pairs apart along their line of centers to contact
/// distance eps, sweeping pairs in ascending order until none remain.
/// Throws kUnresolvedCollision after max_sweeps.
ResolveStats resolve_overlaps(ParticleEnsemble& ensemble, const Box& domain, double eps,
                              int max_sweeps, CellList& workspace);
ResolveStats resolve_overlaps(ParticleEnsemble& ensemble, const Box& domain, double eps,
                              int max_sweeps);

/// True when every center is inside the box and every pair is at least
/// eps - tolerance apart.
bool satisfies_invariants(const ParticleEnsemble& ensemble, const Box& domain, double eps,
                          CellList& workspace, double tolerance = 1e-12);

/// Sequential random insertion from the initial law restricted to the box,
/// redrawing any candidate that overlaps an already placed particle.
ParticleEnsemble sample_initial(const InitSpec& init, const SimConfig& config, RngStream& rng);

struct EnsembleSnapshot {
  std::uint64_t realization = 0;
  double time = 0.0;
  std::vector<double> coords;
};

struct EnsembleResult {
  std::vector<HistogramEstimate> histograms;  // one per sample time
  std::vector<double> msd;                    // mean |X(t) - X(0)|^2 per sample time
  std::uint64_t steps = 0;                    // summed over realizations
  std::uint64_t overlap_pairs = 0;            // overlaps found right after free flight
  int max_sweeps_used = 0;
  std::vector<EnsembleSnapshot> trajectories;

  double mean_overlaps_per_step() const {
    return steps == 0 ? 0.0 : static_cast<double>(overlap_pairs) / static_cast<double>(steps);
  }
};

/// Runs config.realizations independent realizations (stream ids 0..M-1)
/// and bins all N particles of every realization at each sample time.
/// Output is independent of the thread count.
EnsembleResult run_ensemble(const SimConfig& config, std::span<const double> sample_times,
                            const GridSpec& histogram_grid, unsigned threads = 0);

/// Mean-square displacement at each sample time. Requires a zero force and
/// times with sqrt(4 t) below a sixth of the narrowest domain side.
std::vector<double> msd(const SimConfig& config, std::span<const double> sample_times,
                        unsigned threads = 0);

}  // namespace cdiff
