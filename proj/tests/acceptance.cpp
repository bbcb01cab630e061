// Acceptance report: one PASS/FAIL line per criterion A1..A10.
//
//   acceptance            run every criterion
//   acceptance A3 A5      run a subset
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cdiff/analysis.hpp"
#include "cdiff/bd.hpp"
#include "cdiff/cell_list.hpp"
#include "cdiff/config.hpp"
#include "cdiff/mh.hpp"
#include "cdiff/pde.hpp"
#include "cdiff/presets.hpp"
#include "cdiff/stationary.hpp"
#include "oracles.hpp"

using namespace cdiff;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr int kCompareCells = 16;

SimConfig preset(const std::string& name, bool desk = false) {
  return build_config(preset_document(name, desk));
}

bool within(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

double origin_concentration(const ScalarField& density, const SimConfig& c) {
  const double origin[3] = {0.0, 0.0, 0.0};
  return concentration_from_density(density.value_at(origin), c.particle_count, c.diameter, c.dim);
}

ScalarField to_compare_grid(const ScalarField& f) {
  return coarsen(f, f.grid().cells[0] / kCompareCells);
}

// Expensive products are computed once per process and shared.
const PdeRun& fig2_pde(bool finite) {
  static std::map<bool, PdeRun> cache;
  auto it = cache.find(finite);
  if (it == cache.end()) {
    const SimConfig c = preset(finite ? "fig2-pde-finite" : "fig2-pde-eps0");
    it = cache.emplace(finite, solve_pde(c, c.sample_times)).first;
  }
  return it->second;
}

const StationarySolution& fig3_stationary(bool finite) {
  static std::map<bool, StationarySolution> cache;
  auto it = cache.find(finite);
  if (it == cache.end()) {
    const SimConfig c = preset(finite ? "fig3-stationary-finite" : "fig3-stationary-eps0");
    const double a = excluded_volume_coefficient(c.particle_count, c.diameter, c.dim);
    it = cache.emplace(finite, solve_stationary(c.potential, a, c.grid())).first;
  }
  return it->second;
}

Outcome a1() {
  const double phi2 = volume_fraction(400, 0.01, 2, 1.0);
  const double phi3 = volume_fraction(1000, 0.01, 2, 1.0);
  // Independent closed form: N pi (eps/2)^2 over a unit area.
  const bool exact = std::abs(phi2 - 400 * pi * 0.25e-4) <= 1e-15 &&
                     std::abs(phi3 - 1000 * pi * 0.25e-4) <= 1e-15;
  const bool printed = std::round(phi2 * 1e4) / 1e4 == 0.0314 && std::round(phi3 * 1e3) / 1e3 == 0.079;
  return {exact && printed, fmt::format("phi(400) = {:.7f}, phi(1000) = {:.7f}", phi2, phi3)};
}

Outcome a2() {
  const SimConfig c = preset("fig2-pde-finite");
  const ScalarField p = init_density(c.init, c.grid());
  const double peak = concentration_field(p, c).max();
  return {within(peak, 0.617, 0.005), fmt::format("peak c(t=0) = {:.5f} (target 0.617 +- 0.5%)", peak)};
}

Outcome a3() {
  const SimConfig finite = preset("fig2-pde-finite");
  // The point-particle value is reported with the finite-size volume so
  // both numbers are on the same concentration scale.
  const double c_finite = origin_concentration(fig2_pde(true).snapshots.back(), finite);
  const double c_point = origin_concentration(fig2_pde(false).snapshots.back(), finite);
  return {within(c_finite, 0.0479, 0.05),
          fmt::format("c(0, 0.05) = {:.5f} finite, {:.5f} point particles (target 0.0479 +- 5%)",
                      c_finite, c_point)};
}

ScalarField eigenmode(const GridSpec& g, double amplitude, double t) {
  ScalarField f(g);
  const double decay = std::exp(-2 * pi * pi * t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.center(i);
    f[i] = 1.0 + amplitude * decay * std::sin(pi * x[0]) * std::sin(pi * x[1]);
  }
  return f;
}

Outcome a4() {
  auto grid = [](int n) { return make_grid(2, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, n); };
  auto run = [&](int n, std::vector<double> times) {
    const GridSpec g = grid(n);
    return integrate(eigenmode(g, 0.1, 0.0), make_pde_params(ZeroPotential{}, g, 0.0, 1.0), times);
  };

  const GridSpec g128 = grid(128);
  const PdeRun r = run(128, {0.01, 0.05});
  auto amplitude = [&](const ScalarField& f) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g128.size(); ++i) {
      const Vec x = g128.center(i);
      const double m = std::sin(pi * x[0]) * std::sin(pi * x[1]);
      num += (f[i] - 1.0) * m;
      den += m * m;
    }
    return num / den;
  };
  const double rate = std::log(amplitude(r.snapshots[0]) / amplitude(r.snapshots[1])) / 0.04;

  std::vector<double> errors;
  for (int n : {32, 64, 128}) {
    const PdeRun rn = run(n, {0.05});
    errors.push_back(linf_distance(rn.snapshots[0], eigenmode(grid(n), 0.1, 0.05)));
  }
  const double order_lo = std::log2(errors[0] / errors[1]);
  const double order_hi = std::log2(errors[1] / errors[2]);

  // Gaussian start against its Neumann cosine series.
  const ScalarField& p = fig2_pde(false).snapshots.back();
  double series_err = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec x = p.grid().center(i);
    series_err = std::max(series_err, std::abs(p[i] - oracle::neumann_gaussian_1d(x[0], 0.05, 0.09) *
                                                          oracle::neumann_gaussian_1d(x[1], 0.05, 0.09)));
  }

  const bool pass = within(rate, 2 * pi * pi, 0.01) && errors[2] <= 1e-3 && series_err <= 1e-3 &&
                    order_lo >= 1.9 && order_hi >= 1.9;
  return {pass, fmt::format("rate/2pi^2 = {:.5f}, Linf mode = {:.2e}, Linf series = {:.2e}, "
                            "order {:.3f} / {:.3f}",
                            rate / (2 * pi * pi), errors[2], series_err, order_lo, order_hi)};
}

Outcome a5() {
  // Histograms at every spreading sample time against the matching snapshot.
  std::map<bool, std::vector<ScalarField>> bd;
  std::string detail;
  const SimConfig scale = preset("fig2-bd-finite", true);
  for (bool finite : {false, true}) {
    const SimConfig c = preset(finite ? "fig2-bd-finite" : "fig2-bd-eps0", true);
    const EnsembleResult r = run_ensemble(c, c.sample_times, c.grid(), 0);
    for (const auto& h : r.histograms) bd[finite].push_back(to_compare_grid(h.density()));
    detail += fmt::format("{}M={} dt={:g} c_bd(0,0.05)={:.5f}", finite ? "; " : "", c.realizations,
                          c.dt, origin_concentration(r.histograms.back().density(), scale));
  }
  const std::vector<double>& times = scale.sample_times;

  bool pass = true;
  for (std::size_t s = 0; s < times.size(); ++s) {
    const ScalarField pde0 = to_compare_grid(fig2_pde(false).snapshots[s]);
    const ScalarField pde1 = to_compare_grid(fig2_pde(true).snapshots[s]);
    const double l1_point = l1_distance(bd[false][s], pde0);
    const double l1_finite = l1_distance(bd[true][s], pde1);
    const double l1_cross = l1_distance(bd[true][s], pde0);
    const bool ok = l1_point <= 0.05 && l1_finite <= 0.05 && l1_finite < l1_cross;
    pass = pass && ok;
    detail += fmt::format("\n     t={:.2f}: L1(eps0) = {:.4f}, L1(eps) = {:.4f}, "
                          "L1(eps vs eps0 PDE) = {:.4f} {}",
                          times[s], l1_point, l1_finite, l1_cross, ok ? "ok" : "FAIL");
  }
  return {pass, detail};
}

Outcome a6() {
  const SimConfig c = preset("fig3-stationary-finite");
  const double c0 = origin_concentration(fig3_stationary(true).density, c);

  const ScalarField& p0 = fig3_stationary(false).density;
  const GridSpec& g = p0.grid();
  std::vector<double> w(g.size());
  double z = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.center(i);
    w[i] = std::exp(-oracle::volcano(x[0], x[1]));
    z += w[i] * g.cell_volume();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(p0[i] - w[i] / z));
  return {within(c0, 0.189, 0.05) && worst <= 1e-10,
          fmt::format("c(0) = {:.5f} (target 0.189 +- 5%), a=0 vs exp(-V)/Z: {:.2e}", c0, worst)};
}

Outcome a7() {
  bool pass = true;
  std::string detail;
  for (bool finite : {false, true}) {
    const SimConfig c = preset(finite ? "fig3-mh-finite" : "fig3-mh-eps0", true);
    const MhResult r = run_mh(c, c.grid(), 0);
    const double l1 = l1_distance(to_compare_grid(r.histogram.density()),
                                  to_compare_grid(fig3_stationary(finite).density));
    pass = pass && l1 <= 0.05;
    detail += fmt::format("{}eps={:g}: {} steps, acceptance {:.3f}, L1 = {:.4f}", finite ? "; " : "",
                          c.diameter, r.steps, r.acceptance_rate, l1);
  }
  return {pass, detail};
}

Outcome a8() {
  // Mass over the full spreading runs.
  double drift = 0.0;
  for (bool finite : {false, true}) drift = std::max(drift, fig2_pde(finite).max_relative_mass_drift);

  // Free energy along relaxations in the volcano, from a flat start.
  bool dissipative = true;
  for (bool finite : {false, true}) {
    const SimConfig c = preset(finite ? "fig3-stationary-finite" : "fig3-stationary-eps0");
    const double a = excluded_volume_coefficient(c.particle_count, c.diameter, c.dim);
    const PdeParams params = make_pde_params(c.potential, c.grid(), a);
    double previous = INFINITY;
    const std::vector<double> times = {0.02};
    integrate(ScalarField(c.grid(), 1.0), params, times, [&](const ScalarField& f) {
      const double e = free_energy(f, c.potential, a);
      dissipative = dissipative && e <= previous + 1e-13;
      previous = e;
    });
  }

  // No overlap after any step: the run audits every step, and the saved
  // snapshots are rechecked with the all-pairs scan.
  SimConfig bdc = preset("fig2-bd-finite", true);
  bdc.realizations = 8;
  bdc.bd.check_interval = 1;
  bdc.bd.trajectory_realizations = 8;
  double min_gap = INFINITY;
  bool audited = true;
  try {
    const EnsembleResult r = run_ensemble(bdc, bdc.sample_times, bdc.grid(), 0);
    for (const auto& snap : r.trajectories) {
      min_gap = std::min(min_gap, oracle::min_pair_distance(snap.coords, 2));
    }
  } catch (const Error&) {
    audited = false;
  }
  const bool no_overlap = audited && min_gap >= bdc.diameter - 1e-12;

  SimConfig free = preset("fig2-bd-eps0", true);
  free.realizations = 200;
  free.dt = 1e-4;
  free.t_final = 0.004;
  free.init = TruncatedGaussianInit{{0, 0, 0}, 0.05};
  const std::vector<double> msd_times = {0.004};
  free.sample_times = msd_times;
  const double slope = msd(free, msd_times, 0)[0] / 0.004;

  const bool pass = drift <= 1e-12 && dissipative && no_overlap && within(slope, 4.0, 0.02);
  return {pass, fmt::format("mass drift {:.2e}, free energy non-increasing: {}, min BD gap {:.6f} "
                            "(audited: {}), MSD slope {:.4f}",
                            drift, dissipative, min_gap, audited, slope)};
}

Outcome a9() {
  std::mt19937_64 gen(909);
  int mismatched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = trial % 4 == 3 ? 3 : 2;
    const int n = std::uniform_int_distribution<int>(2, 200)(gen);
    const double eps = std::uniform_real_distribution<double>(0.005, 0.15)(gen);
    Box box;
    box.dim = dim;
    ParticleEnsemble e;
    e.dim = dim;
    e.coords.resize(static_cast<std::size_t>(n * dim));
    std::uniform_real_distribution<double> ux(-0.5, 0.5);
    for (auto& v : e.coords) v = ux(gen);
    CellList cells(box, eps, e.size());
    cells.rebuild(e.coords);
    const auto found = detect_overlaps(e, cells, eps);
    const auto ref = oracle::all_pairs_overlaps(e.coords, dim, eps);
    bool same = found.size() == ref.size();
    for (std::size_t k = 0; same && k < ref.size(); ++k) {
      same = found[k].first == ref[k].first && found[k].second == ref[k].second;
    }
    mismatched += same ? 0 : 1;
  }

  double pointwise = 0.0;
  std::uniform_real_distribution<double> ur(-20.0, 20.0), ua(0.0, 10.0);
  for (int i = 0; i < 10'000; ++i) {
    const double rhs = ur(gen), a = ua(gen);
    const double ref = oracle::pointwise_bisection(rhs, a);
    pointwise = std::max(pointwise, std::abs(solve_pointwise(rhs, a) - ref) / ref);
  }

  double identity = 0.0;
  std::uniform_real_distribution<double> up(0.0, 100.0), ue(1e-4, 0.05);
  std::uniform_int_distribution<int> un(1, 5000);
  for (int i = 0; i < 10'000; ++i) {
    const int d = i % 2 == 0 ? 2 : 3;
    const double p = up(gen), eps = ue(gen);
    const int n = un(gen);
    const double lhs = 1.0 + 2.0 * alpha(d) * n * std::pow(eps, d) * p;
    const double rhs = collective_diffusivity(concentration_from_density(p, n, eps, d), d);
    identity = std::max(identity, std::abs(lhs - rhs) / lhs);
  }
  return {mismatched == 0 && pointwise <= 1e-12 && identity <= 1e-12,
          fmt::format("cell list mismatches {}/100, pointwise rel err {:.2e}, 1+2ap vs D(c) {:.2e}",
                      mismatched, pointwise, identity)};
}

Outcome a10() {
  const PdeRun& point = fig2_pde(false);
  const PdeRun& finite = fig2_pde(true);
  bool wider = true;
  std::string vars;
  for (std::size_t s = 0; s < point.snapshots.size(); ++s) {
    const double v0 = spatial_variance(point.snapshots[s]);
    const double v1 = spatial_variance(finite.snapshots[s]);
    wider = wider && v1 > v0;
    vars += fmt::format(" {:.4f}>{:.4f}", v1, v0);
  }

  // Well: the cells where the potential is negative.
  const SimConfig c = preset("fig3-stationary-finite");
  const ScalarField v = sample_potential(c.potential, c.grid());
  const ScalarField& p0 = fig3_stationary(false).density;
  const ScalarField& p1 = fig3_stationary(true).density;
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) {
      m0 += p0[i];
      m1 += p1[i];
    }
  }
  m0 *= c.grid().cell_volume();
  m1 *= c.grid().cell_volume();
  const double origin[2] = {0.0, 0.0};
  const bool depleted = m1 < m0 && p1.value_at(origin) < p0.value_at(origin);
  return {wider && depleted, fmt::format("variance finite>point:{}; well mass {:.4f} < {:.4f}", vars,
                                         m1, m0)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}};

  std::vector<std::string> selected(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, fmt::format("error: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-3s %s  [%.1f s] %s\n", id.c_str(), out.pass ? "PASS" : "FAIL", secs,
                out.detail.c_str());
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
