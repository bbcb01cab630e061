#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "cdiff/core.hpp"

namespace cdiff {

/// Linked-cell index over a box. Cells tile the box exactly and every cell
/// side is at least `min_cell_size`, so any pair closer than that lies in the
/// same or an adjacent cell.
class CellList {
 public:
  CellList(const Box& domain, double min_cell_size, std::size_t particle_count);

  /// Re-indexes all particles from a flat N x d coordinate array.
  void rebuild(std::span<const double> coords);
  /// Starts an empty index sized for incremental insertion.
  void clear();
  void insert(std::size_t particle, std::span<const double> x);
  /// Moves an indexed particle to the cell containing `x`.
  void relocate(std::size_t particle, std::span<const double> x);

  int cell_of(std::span<const double> x) const;
  int cells_along(int axis) const { return cells_[axis]; }
  double cell_size(int axis) const { return size_[axis]; }
  std::size_t cell_count() const { return head_.size(); }
  std::size_t particle_count() const { return next_.size(); }

  /// Calls fn(j) for every indexed particle in the cells adjacent to (and
  /// including) the cell containing `x`.
  template <class Fn>
  void for_each_candidate(std::span<const double> x, Fn&& fn) const;

 private:
  std::array<int, 3> cell_coords(std::span<const double> x) const;

  Box domain_;
  std::array<int, 3> cells_{1, 1, 1};
  Vec size_{1.0, 1.0, 1.0};
  std::vector<int> head_;
  std::vector<int> next_;
  std::vector<int> cell_;
};

template <class Fn>
void CellList::for_each_candidate(std::span<const double> x, Fn&& fn) const {
  const auto c = cell_coords(x);
  const int dim = domain_.dim;
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    lo[k] = c[k] > 0 ? c[k] - 1 : 0;
    hi[k] = c[k] + 1 < cells_[k] ? c[k] + 1 : cells_[k] - 1;
  }
  for (int iz = lo[2]; iz <= hi[2]; ++iz) {
    for (int iy = lo[1]; iy <= hi[1]; ++iy) {
      const int row = (iz * cells_[1] + iy) * cells_[0];
      for (int ix = lo[0]; ix <= hi[0]; ++ix) {
        for (int j = head_[static_cast<std::size_t>(row + ix)]; j >= 0;
             j = next_[static_cast<std::size_t>(j)]) {
          fn(static_cast<std::size_t>(j));
        }
      }
    }
  }
}

}  // namespace cdiff
