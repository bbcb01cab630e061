#include "cdiff/bd.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cdiff/parallel.hpp"

namespace cdiff {

void apply_em_update(ParticleEnsemble& ensemble, const PotentialSpec& potential, double dt,
                     std::span<const double> noise) {
  const double amplitude = std::sqrt(2.0 * dt);
  const auto d = static_cast<std::size_t>(ensemble.dim);
  const bool drift = !is_zero(potential);
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    auto x = ensemble.position(i);
    Vec f{0.0, 0.0, 0.0};
    if (drift) f = eval_force(potential, x);
    for (std::size_t k = 0; k < d; ++k) x[k] += f[k] * dt + amplitude * noise[i * d + k];
  }
  ensemble.time += dt;
}

void em_step(ParticleEnsemble& ensemble, const PotentialSpec& potential, double dt,
             RngStream& rng) {
  // Reused per thread; the free flight is the hot path of every realization.
  thread_local std::vector<double> noise;
  noise.resize(ensemble.coords.size());
  for (double& xi : noise) xi = rng.normal();
  apply_em_update(ensemble, potential, dt, noise);
}

void reflect_into(std::span<double> x, const Box& domain) {
  for (int k = 0; k < domain.dim; ++k) {
    const double lo = domain.lo[k];
    const double hi = domain.hi[k];
    const double w = hi - lo;
    double v = x[k];
    if (v < lo - w || v > hi + w) {
      fail(ErrorCode::kStepTooLarge,
           fmt::format("displacement beyond a full domain width on axis {} (dt too large)", k));
    }
    while (v < lo || v > hi) {
      if (v < lo) v = 2.0 * lo - v;
      if (v > hi) v = 2.0 * hi - v;
    }
    x[k] = v;
  }
}

void reflect_walls(ParticleEnsemble& ensemble, const Box& domain) {
  for (std::size_t i = 0; i < ensemble.size(); ++i) reflect_into(ensemble.position(i), domain);
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double dx = b[k] - a[k];
    r2 += dx * dx;
  }
  return r2;
}

/// Projects onto the closed box; returns true if anything moved.
bool clamp_into(std::span<double> x, const Box& domain) {
  bool moved = false;
  for (int k = 0; k < domain.dim; ++k) {
    const double v = std::clamp(x[k], domain.lo[k], domain.hi[k]);
    moved = moved || v != x[k];
    x[k] = v;
  }
  return moved;
}

}  // namespace

std::vector<IndexPair> detect_overlaps(const ParticleEnsemble& ensemble, const CellList& cells,
                                       double threshold) {
  std::vector<IndexPair> pairs;
  if (!(threshold > 0.0)) return pairs;
  const double t2 = threshold * threshold;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto xi = ensemble.position(i);
    cells.for_each_candidate(xi, [&](std::size_t j) {
      if (j > i && squared_distance(xi, ensemble.position(j)) < t2) pairs.emplace_back(i, j);
    });
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

ResolveStats resolve_overlaps(ParticleEnsemble& ensemble, const Box& domain, double eps,
                              int max_sweeps, CellList& workspace) {
  ResolveStats stats;
  if (!(eps > 0.0)) return stats;
  const double threshold = eps - kContactSlack;
  const double t2 = threshold * threshold;
  const auto d = static_cast<std::size_t>(ensemble.dim);
  std::array<double, 3> u{};
  for (int sweep = 0;; ++sweep) {
    workspace.rebuild(ensemble.coords);
    const auto pairs = detect_overlaps(ensemble, workspace, threshold);
    if (sweep == 0) stats.initial_overlaps = pairs.size();
    if (pairs.empty()) {
      stats.sweeps = sweep;
      return stats;
    }
    if (sweep == max_sweeps) {
      fail(ErrorCode::kUnresolvedCollision,
           fmt::format("{} overlapping pairs remain after {} sweeps (dt too large or density "
                       "too high)",
                       pairs.size(), max_sweeps));
    }
    for (const auto& [i, j] : pairs) {
      auto xi = ensemble.position(i);
      auto xj = ensemble.position(j);
      const double r2 = squared_distance(xi, xj);
      if (r2 >= t2) continue;  // already separated earlier in this sweep
      const double r = std::sqrt(r2);
      if (r > 0.0) {
        for (std::size_t k = 0; k < d; ++k) u[k] = (xj[k] - xi[k]) / r;
      } else {
        u = {1.0, 0.0, 0.0};
      }
      const double shift = 0.5 * (eps - r);
      for (std::size_t k = 0; k < d; ++k) {
        xi[k] -= shift * u[k];
        xj[k] += shift * u[k];
      }
      // A particle pushed through a wall stays on it; its partner takes the
      // remaining separation so the pair still ends at contact.
      const bool clamped_i = clamp_into(xi, domain);
      const bool clamped_j = clamp_into(xj, domain);
      if (clamped_i && !clamped_j) {
        for (std::size_t k = 0; k < d; ++k) xj[k] = xi[k] + eps * u[k];
        clamp_into(xj, domain);
      } else if (clamped_j && !clamped_i) {
        for (std::size_t k = 0; k < d; ++k) xi[k] = xj[k] - eps * u[k];
        clamp_into(xi, domain);
      }
      ++stats.corrections;
    }
  }
}

ResolveStats resolve_overlaps(ParticleEnsemble& ensemble, const Box& domain, double eps,
                              int max_sweeps) {
  CellList workspace(domain, eps, ensemble.size());
  return resolve_overlaps(ensemble, domain, eps, max_sweeps, workspace);
}

bool satisfies_invariants(const ParticleEnsemble& ensemble, const Box& domain, double eps,
                          CellList& workspace, double tolerance) {
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    if (!domain.contains(ensemble.position(i))) return false;
  }
  if (!(eps > 0.0)) return true;
  workspace.rebuild(ensemble.coords);
  return detect_overlaps(ensemble, workspace, eps - tolerance).empty();
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxConsecutiveRejections = 100'000;

class PositionSampler {
 public:
  PositionSampler(const InitSpec& init, const Box& domain) : init_(init), domain_(domain) {
    if (const auto* t = std::get_if<TabulatedDensityInit>(&init_)) {
      const auto values = t->density.values();
      cells_ = std::discrete_distribution<std::size_t>(values.begin(), values.end());
    }
  }

  void draw(std::span<double> x, RngStream& rng) const {
    const int d = domain_.dim;
    if (std::holds_alternative<UniformInit>(init_)) {
      for (int k = 0; k < d; ++k) x[k] = domain_.lo[k] + domain_.width(k) * rng.uniform();
    } else if (const auto* g = std::get_if<TruncatedGaussianInit>(&init_)) {
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxConsecutiveRejections) {
          fail(ErrorCode::kConfig, "initial Gaussian has negligible mass inside the domain");
        }
        for (int k = 0; k < d; ++k) x[k] = g->mean[k] + g->sigma * rng.normal();
        if (domain_.contains(x)) return;
      }
    } else {
      const auto& field = std::get<TabulatedDensityInit>(init_).density;
      const GridSpec& grid = field.grid();
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxConsecutiveRejections) {
          fail(ErrorCode::kConfig, "tabulated initial density has no mass inside the domain");
        }
        const auto idx = grid.unflatten(cells_(rng.engine()));
        for (int k = 0; k < d; ++k) {
          x[k] = grid.lo[k] + (idx[k] + rng.uniform()) * grid.spacing(k);
        }
        if (domain_.contains(x)) return;
      }
    }
  }

 private:
  const InitSpec& init_;
  const Box& domain_;
  mutable std::discrete_distribution<std::size_t> cells_;
};

}  // namespace

ParticleEnsemble sample_initial(const InitSpec& init, const SimConfig& config, RngStream& rng) {
  const Box& domain = config.domain;
  const auto n = static_cast<std::size_t>(config.particle_count);
  const auto d = static_cast<std::size_t>(config.dim);
  if (static_cast<double>(n) * particle_volume(config.diameter, config.dim) >= domain.volume()) {
    fail(ErrorCode::kPackingInfeasible, "particle bodies exceed the domain volume");
  }
  ParticleEnsemble ensemble;
  ensemble.dim = config.dim;
  ensemble.coords.assign(n * d, 0.0);
  ensemble.realization_id = rng.stream_id();

  const PositionSampler sampler(init, domain);
  const double eps = config.diameter;
  const double e2 = eps * eps;
  CellList cells(domain, eps, n);
  cells.clear();
  std::array<double, 3> candidate{};
  const std::span<double> x(candidate.data(), d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int rejected = 0;; ++rejected) {
      if (rejected > kMaxConsecutiveRejections) {
        fail(ErrorCode::kPackingInfeasible,
             fmt::format("could not insert particle {} after {} consecutive rejections", i,
                         kMaxConsecutiveRejections));
      }
      sampler.draw(x, rng);
      bool free = true;
      if (eps > 0.0) {
        cells.for_each_candidate(x, [&](std::size_t j) {
          if (free && squared_distance(x, ensemble.position(j)) < e2) free = false;
        });
      }
      if (free) break;
    }
    std::copy(x.begin(), x.end(), ensemble.position(i).begin());
    if (eps > 0.0) cells.insert(i, x);
  }
  return ensemble;
}

// ---------------------------------------------------------------------------

namespace {

struct WorkerAccumulator {
  std::vector<HistogramEstimate> histograms;
  std::uint64_t steps = 0;
  std::uint64_t overlap_pairs = 0;
  int max_sweeps_used = 0;
};

int audit_interval(const SimConfig& config) {
#ifndef NDEBUG
  (void)config;
  return 1;
#else
  return config.bd.check_interval;
#endif
}

}  // namespace

EnsembleResult run_ensemble(const SimConfig& config, std::span<const double> sample_times,
                            const GridSpec& histogram_grid, unsigned threads) {
  validate(config);
  for (std::size_t s = 1; s < sample_times.size(); ++s) {
    if (sample_times[s] < sample_times[s - 1]) fail(ErrorCode::kConfig, "sample times unsorted");
  }
  const auto realizations = static_cast<std::size_t>(config.realizations);
  const std::size_t n_times = sample_times.size();
  const unsigned workers = resolve_threads(threads);

  std::vector<WorkerAccumulator> acc(workers);
  for (auto& a : acc) a.histograms.assign(n_times, HistogramEstimate(histogram_grid));
  // Per-realization MSD sums, reduced in realization order for determinism.
  std::vector<double> msd_sums(realizations * n_times, 0.0);
  std::vector<std::vector<EnsembleSnapshot>> snapshots(
      std::min(realizations, config.bd.trajectory_realizations));

  const double eps = config.diameter;
  const int interval = audit_interval(config);

  parallel_for(realizations, threads, [&](std::size_t r, unsigned worker) {
    auto& local = acc[worker];
    RngStream rng(config.seed, r);
    ParticleEnsemble ensemble = sample_initial(config.init, config, rng);
    const std::vector<double> origin = ensemble.coords;
    CellList cells(config.domain, eps, ensemble.size());
    std::uint64_t step = 0;

    for (std::size_t s = 0; s < n_times; ++s) {
      const double target = sample_times[s];
      while (ensemble.time < target) {
        double h = target - ensemble.time;
        const bool last = h <= config.dt * (1.0 + 1e-9);
        if (!last) h = config.dt;
        em_step(ensemble, config.potential, h, rng);
        if (last) ensemble.time = target;
        reflect_walls(ensemble, config.domain);
        const ResolveStats rs =
            resolve_overlaps(ensemble, config.domain, eps, config.bd.max_sweeps, cells);
        local.overlap_pairs += rs.initial_overlaps;
        local.max_sweeps_used = std::max(local.max_sweeps_used, rs.sweeps);
        ++step;
        if (step % static_cast<std::uint64_t>(interval) == 0 &&
            !satisfies_invariants(ensemble, config.domain, eps, cells)) {
          fail(ErrorCode::kInvariant,
               fmt::format("realization {} violates overlap/domain invariant at t = {}", r,
                           ensemble.time));
        }
      }
      local.histograms[s].add_all(ensemble.coords);
      double sum = 0.0;
      for (std::size_t i = 0; i < ensemble.coords.size(); ++i) {
        const double dx = ensemble.coords[i] - origin[i];
        sum += dx * dx;
      }
      msd_sums[r * n_times + s] = sum;
      if (r < snapshots.size()) {
        snapshots[r].push_back({r, target, ensemble.coords});
      }
    }
    local.steps += step;
  });

  EnsembleResult result;
  result.histograms.assign(n_times, HistogramEstimate(histogram_grid));
  for (const auto& a : acc) {
    for (std::size_t s = 0; s < n_times; ++s) result.histograms[s].merge(a.histograms[s]);
    result.steps += a.steps;
    result.overlap_pairs += a.overlap_pairs;
    result.max_sweeps_used = std::max(result.max_sweeps_used, a.max_sweeps_used);
  }
  result.msd.assign(n_times, 0.0);
  const double norm = static_cast<double>(realizations) * config.particle_count;
  for (std::size_t s = 0; s < n_times; ++s) {
    double total = 0.0;
    for (std::size_t r = 0; r < realizations; ++r) total += msd_sums[r * n_times + s];
    result.msd[s] = total / norm;
  }
  for (auto& per_realization : snapshots) {
    for (auto& snap : per_realization) result.trajectories.push_back(std::move(snap));
  }
  return result;
}

std::vector<double> msd(const SimConfig& config, std::span<const double> sample_times,
                        unsigned threads) {
  if (!is_zero(config.potential)) {
    fail(ErrorCode::kConfig, "mean-square displacement requires a zero force");
  }
  const double limit = config.domain.min_width() / 6.0;
  for (double t : sample_times) {
    if (std::sqrt(4.0 * t) >= limit) {
      fail(ErrorCode::kConfig,
           fmt::format("sample time {} too long: walls would bias the displacement", t));
    }
  }
  return run_ensemble(config, sample_times, config.grid(), threads).msd;
}

}  // namespace cdiff
