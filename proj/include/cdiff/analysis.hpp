#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cdiff/core.hpp"
#include "cdiff/grid.hpp"

namespace cdiff {

/// Binned empirical density of particle positions. Bins are half-open
/// [lo, hi) except the last bin on each axis, which is closed.
class HistogramEstimate {
 public:
  HistogramEstimate() = default;
  explicit HistogramEstimate(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t sample_count() const { return sample_count_; }

  /// Bin index for a position; throws kOutOfDomain outside the grid box.
  std::size_t bin_of(std::span<const double> x) const;
  void add(std::span<const double> x) { add_to_bin(bin_of(x)); }
  void add_to_bin(std::size_t bin) {
    ++counts_[bin];
    ++sample_count_;
  }
  /// Bins every row of a flat N x d coordinate array.
  void add_all(std::span<const double> coords);

  /// Merge-by-addition; exact, associative and commutative.
  void merge(const HistogramEstimate& other);
  HistogramEstimate coarsened(int factor) const;

  /// counts / (sample_count * cell_volume); integrates to 1.
  ScalarField density() const;

 private:
  GridSpec grid_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t sample_count_ = 0;
};

HistogramEstimate bin_positions(std::span<const double> coords, const GridSpec& grid);

double l1_distance(const ScalarField& a, const ScalarField& b);
double linf_distance(const ScalarField& a, const ScalarField& b);

/// Block average onto a grid coarser by `factor` per axis (mass preserving).
ScalarField coarsen(const ScalarField& field, int factor);

/// D(c) = 1 + 4 (d - 1) c.
double collective_diffusivity(double concentration, int dim);

ScalarField concentration_field(const ScalarField& density, int particle_count, double diameter,
                                int dim);
ScalarField concentration_field(const ScalarField& density, const SimConfig& config);

/// Second moment of a density about its own mean, summed over axes.
double spatial_variance(const ScalarField& density);

}  // namespace cdiff
