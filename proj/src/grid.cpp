#include "cdiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdiff/error.hpp"

namespace cdiff {

double GridSpec::min_spacing() const {
  double h = spacing(0);
  for (int k = 1; k < dim; ++k) h = std::min(h, spacing(k));
  return h;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= spacing(k);
  return v;
}

double GridSpec::volume() const {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= hi[k] - lo[k];
  return v;
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(cells[k]);
  return n;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int k = 0; k < axis; ++k) s *= static_cast<std::size_t>(cells[k]);
  return s;
}

std::array<int, 3> GridSpec::unflatten(std::size_t index) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    idx[k] = static_cast<int>(index % static_cast<std::size_t>(cells[k]));
    index /= static_cast<std::size_t>(cells[k]);
  }
  return idx;
}

std::size_t GridSpec::flatten(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int k = dim - 1; k >= 0; --k) {
    flat = flat * static_cast<std::size_t>(cells[k]) + static_cast<std::size_t>(idx[k]);
  }
  return flat;
}

Vec GridSpec::center(std::size_t index) const {
  const auto idx = unflatten(index);
  Vec x{0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) x[k] = lo[k] + (idx[k] + 0.5) * spacing(k);
  return x;
}

GridSpec GridSpec::coarsened(int factor) const {
  if (factor < 1) fail(ErrorCode::kShape, "coarsening factor must be >= 1");
  GridSpec out = *this;
  for (int k = 0; k < dim; ++k) {
    if (cells[k] % factor != 0) {
      fail(ErrorCode::kShape, "grid does not divide evenly by coarsening factor");
    }
    out.cells[k] = cells[k] / factor;
  }
  return out;
}

GridSpec make_grid(int dim, const Vec& lo, const Vec& hi, int cells_per_axis) {
  GridSpec g;
  g.dim = dim;
  g.lo = lo;
  g.hi = hi;
  for (int k = 0; k < 3; ++k) g.cells[k] = k < dim ? cells_per_axis : 1;
  for (int k = dim; k < 3; ++k) {
    g.lo[k] = 0.0;
    g.hi[k] = 1.0;
  }
  return g;
}

bool GridSpec::operator==(const GridSpec& other) const {
  if (dim != other.dim) return false;
  for (int k = 0; k < dim && k < 3; ++k) {
    if (cells[k] != other.cells[k] || lo[k] != other.lo[k] || hi[k] != other.hi[k]) return false;
  }
  return true;
}

ScalarField::ScalarField(const GridSpec& grid, double fill, double time)
    : grid_(grid), values_(grid.size(), fill), time_(time) {}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values, double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.size()) {
    fail(ErrorCode::kShape, "field value count does not match grid size");
  }
}

double ScalarField::integral() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) * grid_.cell_volume();
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

namespace {

struct AxisStencil {
  int i0 = 0;
  int i1 = 0;
  double w = 0.0;  // weight of i1
  bool interior = false;
};

AxisStencil locate(const GridSpec& g, int axis, double x) {
  const double h = g.spacing(axis);
  const int n = g.cells[axis];
  const double s = (x - g.lo[axis]) / h - 0.5;
  AxisStencil st;
  if (n == 1 || s <= 0.0) return st;
  if (s >= n - 1) {
    st.i0 = st.i1 = n - 1;
    return st;
  }
  st.i0 = static_cast<int>(std::floor(s));
  st.i1 = st.i0 + 1;
  st.w = s - st.i0;
  st.interior = true;
  return st;
}

void check_inside(const GridSpec& g, std::span<const double> x) {
  for (int k = 0; k < g.dim; ++k) {
    if (!(x[k] >= g.lo[k] && x[k] <= g.hi[k])) {
      fail(ErrorCode::kOutOfDomain, "point lies outside the tabulated grid");
    }
  }
}

}  // namespace

double ScalarField::value_at(std::span<const double> x) const {
  check_inside(grid_, x);
  std::array<AxisStencil, 3> st{};
  for (int k = 0; k < grid_.dim && k < 3; ++k) st[k] = locate(grid_, k, x[k]);
  double v = 0.0;
  const int corners = 1 << grid_.dim;
  for (int c = 0; c < corners; ++c) {
    std::array<int, 3> idx{0, 0, 0};
    double w = 1.0;
    for (int k = 0; k < grid_.dim; ++k) {
      const bool upper = (c >> k) & 1;
      idx[k] = upper ? st[k].i1 : st[k].i0;
      w *= upper ? st[k].w : 1.0 - st[k].w;
    }
    if (w != 0.0) v += w * values_[grid_.flatten(idx)];
  }
  return v;
}

Vec ScalarField::gradient_at(std::span<const double> x) const {
  check_inside(grid_, x);
  std::array<AxisStencil, 3> st{};
  for (int k = 0; k < grid_.dim && k < 3; ++k) st[k] = locate(grid_, k, x[k]);
  Vec grad{0.0, 0.0, 0.0};
  const int corners = 1 << grid_.dim;
  for (int axis = 0; axis < grid_.dim; ++axis) {
    if (!st[axis].interior) continue;
    double g = 0.0;
    for (int c = 0; c < corners; ++c) {
      std::array<int, 3> idx{0, 0, 0};
      double w = 1.0;
      for (int k = 0; k < grid_.dim; ++k) {
        const bool upper = (c >> k) & 1;
        idx[k] = upper ? st[k].i1 : st[k].i0;
        if (k == axis) {
          w *= upper ? 1.0 : -1.0;
        } else {
          w *= upper ? st[k].w : 1.0 - st[k].w;
        }
      }
      if (w != 0.0) g += w * values_[grid_.flatten(idx)];
    }
    grad[axis] = g / grid_.spacing(axis);
  }
  return grad;
}

}  // namespace cdiff
