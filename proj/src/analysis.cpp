#include "cdiff/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace cdiff {

HistogramEstimate::HistogramEstimate(const GridSpec& grid)
    : grid_(grid), counts_(grid.size(), 0) {}

std::size_t HistogramEstimate::bin_of(std::span<const double> x) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < grid_.dim; ++k) {
    if (!(x[k] >= grid_.lo[k] && x[k] <= grid_.hi[k])) {
      fail(ErrorCode::kOutOfDomain, "sample lies outside the histogram grid");
    }
    const int n = grid_.cells[k];
    const int i = static_cast<int>(std::floor((x[k] - grid_.lo[k]) / grid_.spacing(k)));
    idx[k] = std::min(i, n - 1);
  }
  return grid_.flatten(idx);
}

void HistogramEstimate::add_all(std::span<const double> coords) {
  const auto d = static_cast<std::size_t>(grid_.dim);
  for (std::size_t i = 0; i + d <= coords.size(); i += d) add(coords.subspan(i, d));
}

void HistogramEstimate::merge(const HistogramEstimate& other) {
  if (!(other.grid_ == grid_)) fail(ErrorCode::kShape, "histogram grids differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  sample_count_ += other.sample_count_;
}

HistogramEstimate HistogramEstimate::coarsened(int factor) const {
  HistogramEstimate out(grid_.coarsened(factor));
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    auto idx = grid_.unflatten(i);
    for (int k = 0; k < grid_.dim; ++k) idx[k] /= factor;
    out.counts_[out.grid_.flatten(idx)] += counts_[i];
  }
  out.sample_count_ = sample_count_;
  return out;
}

ScalarField HistogramEstimate::density() const {
  ScalarField f(grid_);
  if (sample_count_ == 0) return f;
  const double scale = 1.0 / (static_cast<double>(sample_count_) * grid_.cell_volume());
  for (std::size_t i = 0; i < counts_.size(); ++i) f[i] = static_cast<double>(counts_[i]) * scale;
  return f;
}

HistogramEstimate bin_positions(std::span<const double> coords, const GridSpec& grid) {
  HistogramEstimate h(grid);
  h.add_all(coords);
  return h;
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) fail(ErrorCode::kShape, "fields live on different grids");
}

}  // namespace

double l1_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid().cell_volume();
}

double linf_distance(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ScalarField coarsen(const ScalarField& field, int factor) {
  const GridSpec& fine = field.grid();
  ScalarField out(fine.coarsened(factor), 0.0, field.time());
  for (std::size_t i = 0; i < field.size(); ++i) {
    auto idx = fine.unflatten(i);
    for (int k = 0; k < fine.dim; ++k) idx[k] /= factor;
    out[out.grid().flatten(idx)] += field[i];
  }
  const double block = std::pow(static_cast<double>(factor), fine.dim);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= block;
  return out;
}

double collective_diffusivity(double concentration, int dim) {
  if (dim != 2 && dim != 3) fail(ErrorCode::kUnsupportedDimension, "dimension not in {2, 3}");
  if (concentration < 0.0) fail(ErrorCode::kDomain, "concentration must be >= 0");
  return 1.0 + 4.0 * (dim - 1) * concentration;
}

ScalarField concentration_field(const ScalarField& density, int particle_count, double diameter,
                                int dim) {
  ScalarField c(density.grid(), 0.0, density.time());
  for (std::size_t i = 0; i < density.size(); ++i) {
    c[i] = concentration_from_density(density[i], particle_count, diameter, dim);
  }
  return c;
}

ScalarField concentration_field(const ScalarField& density, const SimConfig& config) {
  return concentration_field(density, config.particle_count, config.diameter, config.dim);
}

double spatial_variance(const ScalarField& density) {
  const GridSpec& g = density.grid();
  const double mass = density.integral();
  Vec mean{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < density.size(); ++i) {
    const Vec x = g.center(i);
    for (int k = 0; k < g.dim; ++k) mean[k] += x[k] * density[i];
  }
  for (int k = 0; k < g.dim; ++k) mean[k] *= g.cell_volume() / mass;
  double var = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const Vec x = g.center(i);
    double r2 = 0.0;
    for (int k = 0; k < g.dim; ++k) r2 += (x[k] - mean[k]) * (x[k] - mean[k]);
    var += r2 * density[i];
  }
  return var * g.cell_volume() / mass;
}

}  // namespace cdiff
