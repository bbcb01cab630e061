#include "cdiff/cell_list.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdiff {

namespace {

// Upper bound on the number of cells; beyond it cells are widened uniformly.
std::size_t max_cells(std::size_t particle_count) {
  return std::max<std::size_t>(std::size_t{1} << 14, 8 * particle_count);
}

}  // namespace

CellList::CellList(const Box& domain, double min_cell_size, std::size_t particle_count)
    : domain_(domain), next_(particle_count, -1), cell_(particle_count, -1) {
  const std::size_t limit = max_cells(particle_count);
  double side = min_cell_size;
  for (;;) {
    std::size_t total = 1;
    for (int k = 0; k < domain.dim; ++k) {
      const double w = domain.width(k);
      double n = side > 0.0 ? std::floor(w / side) : std::numeric_limits<double>::infinity();
      n = std::clamp(n, 1.0, static_cast<double>(limit));
      cells_[k] = static_cast<int>(n);
      size_[k] = w / cells_[k];
      total *= static_cast<std::size_t>(cells_[k]);
    }
    if (total <= limit) break;
    // Too fine: grow the minimum side so the total fits.
    const double shrink = std::pow(static_cast<double>(total) / limit, 1.0 / domain.dim);
    double widest = 0.0;
    for (int k = 0; k < domain.dim; ++k) widest = std::max(widest, size_[k]);
    side = std::max(side, widest) * shrink * 1.0000001;
  }
  head_.assign(static_cast<std::size_t>(cells_[0]) * cells_[1] * cells_[2], -1);
}

std::array<int, 3> CellList::cell_coords(std::span<const double> x) const {
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < domain_.dim; ++k) {
    const int i = static_cast<int>(std::floor((x[k] - domain_.lo[k]) / size_[k]));
    c[k] = std::clamp(i, 0, cells_[k] - 1);
  }
  return c;
}

int CellList::cell_of(std::span<const double> x) const {
  const auto c = cell_coords(x);
  return (c[2] * cells_[1] + c[1]) * cells_[0] + c[0];
}

void CellList::clear() {
  std::fill(head_.begin(), head_.end(), -1);
  std::fill(next_.begin(), next_.end(), -1);
  std::fill(cell_.begin(), cell_.end(), -1);
}

void CellList::rebuild(std::span<const double> coords) {
  std::fill(head_.begin(), head_.end(), -1);
  const auto d = static_cast<std::size_t>(domain_.dim);
  const std::size_t n = coords.size() / d;
  next_.resize(n);
  cell_.resize(n);
  // Descending insertion keeps each cell's chain in ascending particle order.
  for (std::size_t i = n; i-- > 0;) {
    const int c = cell_of(coords.subspan(i * d, d));
    cell_[i] = c;
    next_[i] = head_[static_cast<std::size_t>(c)];
    head_[static_cast<std::size_t>(c)] = static_cast<int>(i);
  }
}

void CellList::insert(std::size_t particle, std::span<const double> x) {
  const int c = cell_of(x);
  cell_[particle] = c;
  next_[particle] = head_[static_cast<std::size_t>(c)];
  head_[static_cast<std::size_t>(c)] = static_cast<int>(particle);
}

void CellList::relocate(std::size_t particle, std::span<const double> x) {
  const int target = cell_of(x);
  const int current = cell_[particle];
  if (target == current) return;
  // Unlink from the current chain.
  int* link = &head_[static_cast<std::size_t>(current)];
  while (*link != static_cast<int>(particle)) link = &next_[static_cast<std::size_t>(*link)];
  *link = next_[particle];
  insert(particle, x);
}

}  // namespace cdiff
