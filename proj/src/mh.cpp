#include "cdiff/mh.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "cdiff/parallel.hpp"

namespace cdiff {

MhChain::MhChain(ParticleEnsemble start, const PotentialSpec& potential, const Box& domain,
                 double diameter, double proposal_scale)
    : potential_(potential),
      domain_(domain),
      diameter_(diameter),
      proposal_scale_(proposal_scale),
      cells_(domain, diameter, start.size()) {
  state_.dim = start.dim;
  state_.coords = std::move(start.coords);
  const auto d = static_cast<std::size_t>(state_.dim);
  const std::size_t n = state_.coords.size() / d;
  site_potential_.resize(n);
  cells_.rebuild(state_.coords);
  refresh_total_potential();
}

double MhChain::refresh_total_potential() {
  const auto d = static_cast<std::size_t>(state_.dim);
  double total = 0.0;
  for (std::size_t i = 0; i < site_potential_.size(); ++i) {
    site_potential_[i] = eval_potential(potential_, std::span<const double>(&state_.coords[i * d], d));
    total += site_potential_[i];
  }
  const double drift = std::abs(total - state_.total_potential);
  state_.total_potential = total;
  return drift;
}

bool MhChain::step(RngStream& rng) {
  const auto d = static_cast<std::size_t>(state_.dim);
  const std::size_t n = site_potential_.size();
  ++state_.step_count;
  const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
  const std::size_t particle = std::min(i, n - 1);

  std::array<double, 3> trial{};
  const std::span<double> x(trial.data(), d);
  const double* current = &state_.coords[particle * d];
  for (std::size_t k = 0; k < d; ++k) x[k] = current[k] + proposal_scale_ * rng.normal();
  if (!domain_.contains(x)) return false;

  if (diameter_ > 0.0) {
    const double e2 = diameter_ * diameter_;
    bool blocked = false;
    cells_.for_each_candidate(x, [&](std::size_t j) {
      if (blocked || j == particle) return;
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double dx = state_.coords[j * d + k] - x[k];
        r2 += dx * dx;
      }
      if (r2 < e2) blocked = true;
    });
    if (blocked) return false;
  }

  const double v_new = eval_potential(potential_, x);
  const double delta = v_new - site_potential_[particle];
  const double u = rng.uniform();
  if (!metropolis_accept(delta, u)) return false;

  std::copy(x.begin(), x.end(), state_.coords.begin() + static_cast<std::ptrdiff_t>(particle * d));
  if (diameter_ > 0.0) cells_.relocate(particle, x);
  state_.total_potential += delta;
  site_potential_[particle] = v_new;
  ++state_.accept_count;
  return true;
}

bool MhChain::overlap_free(double tolerance) const {
  ParticleEnsemble view;
  view.dim = state_.dim;
  view.coords = state_.coords;
  CellList workspace(domain_, diameter_, view.size());
  return satisfies_invariants(view, domain_, diameter_, workspace, tolerance);
}

// ---------------------------------------------------------------------------

double default_proposal_scale(const SimConfig& config) {
  if (config.mh.proposal_scale > 0.0) return config.mh.proposal_scale;
  if (config.diameter > 0.0) return config.diameter;
  return 0.05 * config.domain.min_width();
}

std::uint64_t default_burn_in(std::uint64_t steps) { return steps / 10; }

std::uint64_t default_thin(std::uint64_t steps, std::uint64_t burn_in, int particle_count) {
  constexpr double kTargetSamples = 5e6;
  const double sampled_steps = static_cast<double>(steps - burn_in);
  const double thin = sampled_steps * particle_count / kTargetSamples;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(thin));
}

MhResult run_mh(const SimConfig& config, std::uint64_t steps, std::uint64_t burn_in,
                std::uint64_t thin, const GridSpec& histogram_grid, unsigned threads) {
  validate(config);
  if (!(steps > burn_in)) fail(ErrorCode::kConfig, "MH requires steps > burn_in");
  if (thin < 1) fail(ErrorCode::kConfig, "MH requires thin >= 1");
  const auto chains = static_cast<std::size_t>(config.realizations);
  const double scale = default_proposal_scale(config);
  const auto started = std::chrono::steady_clock::now();

  std::vector<HistogramEstimate> histograms(chains, HistogramEstimate(histogram_grid));
  std::vector<std::uint64_t> accepted(chains, 0);
  const std::uint64_t refresh = config.mh.refresh_interval;

  parallel_for(chains, threads, [&](std::size_t c, unsigned) {
    RngStream rng(config.seed, c);
    MhChain chain(sample_initial(UniformInit{}, config, rng), config.potential, config.domain,
                  config.diameter, scale);
    auto& hist = histograms[c];
    for (std::uint64_t s = 1; s <= steps; ++s) {
      chain.step(rng);
      if (refresh > 0 && s % refresh == 0) {
        const double drift = chain.refresh_total_potential();
        if (drift > 1e-9 * std::max(1.0, std::abs(chain.state().total_potential))) {
          fail(ErrorCode::kInvariant,
               fmt::format("MH potential bookkeeping drifted by {} at step {}", drift, s));
        }
      }
      if (s > burn_in && (s - burn_in) % thin == 0) hist.add_all(chain.state().coords);
    }
    accepted[c] = chain.state().accept_count;
  });

  MhResult result;
  result.histogram = HistogramEstimate(histogram_grid);
  std::uint64_t total_accepted = 0;
  for (std::size_t c = 0; c < chains; ++c) {
    result.histogram.merge(histograms[c]);
    total_accepted += accepted[c];
  }
  result.steps = steps;
  result.burn_in = burn_in;
  result.thin = thin;
  result.chains = static_cast<int>(chains);
  result.seed = config.seed;
  result.proposal_scale = scale;
  result.acceptance_rate =
      static_cast<double>(total_accepted) / (static_cast<double>(steps) * static_cast<double>(chains));
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

MhResult run_mh(const SimConfig& config, const GridSpec& histogram_grid, unsigned threads) {
  const std::uint64_t steps = config.mh.steps;
  const std::uint64_t burn_in =
      config.mh.burn_in >= 0 ? static_cast<std::uint64_t>(config.mh.burn_in) : default_burn_in(steps);
  const std::uint64_t thin = config.mh.thin >= 1
                                 ? static_cast<std::uint64_t>(config.mh.thin)
                                 : default_thin(steps, std::min(burn_in, steps), config.particle_count);
  return run_mh(config, steps, burn_in, thin, histogram_grid, threads);
}

}  // namespace cdiff
