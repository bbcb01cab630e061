#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace cdiff {

using Vec = std::array<double, 3>;

/// Regular cell-centered grid over an axis-aligned box. Axis 0 varies
/// fastest in the flat index.
struct GridSpec {
  int dim = 2;
  std::array<int, 3> cells{1, 1, 1};
  Vec lo{0.0, 0.0, 0.0};
  Vec hi{1.0, 1.0, 1.0};

  double spacing(int axis) const { return (hi[axis] - lo[axis]) / cells[axis]; }
  double min_spacing() const;
  double cell_volume() const;
  double volume() const;
  std::size_t size() const;

  std::size_t stride(int axis) const;
  std::array<int, 3> unflatten(std::size_t index) const;
  std::size_t flatten(const std::array<int, 3>& idx) const;
  Vec center(std::size_t index) const;

  /// Grid with each axis coarsened by `factor`; cells must divide evenly.
  GridSpec coarsened(int factor) const;

  /// Compares the active axes only.
  bool operator==(const GridSpec& other) const;
};

/// Builds a grid with `cells_per_axis` cells along every active axis.
GridSpec make_grid(int dim, const Vec& lo, const Vec& hi, int cells_per_axis);

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& grid, double fill = 0.0, double time = 0.0);
  ScalarField(const GridSpec& grid, std::vector<double> values, double time = 0.0);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Midpoint-rule integral: sum of cells times cell volume.
  double integral() const;
  double max() const;
  double min() const;

  /// Multilinear interpolation between cell centers, constant extrapolation
  /// in the half cell next to each wall. Throws kOutOfDomain outside the box.
  double value_at(std::span<const double> x) const;
  /// Gradient of the same interpolant.
  Vec gradient_at(std::span<const double> x) const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
  double time_ = 0.0;
};

}  // namespace cdiff
