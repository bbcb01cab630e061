#include <doctest.h>

#include <cmath>
#include <random>

#include "cdiff/bd.hpp"
#include "cdiff/cell_list.hpp"
#include "oracles.hpp"

using namespace cdiff;

namespace {

Box unit_box(int dim = 2) {
  Box b;
  b.dim = dim;
  return b;
}

ParticleEnsemble make_ensemble(int dim, std::vector<double> coords) {
  ParticleEnsemble e;
  e.dim = dim;
  e.coords = std::move(coords);
  return e;
}

double distance(const ParticleEnsemble& e, std::size_t i, std::size_t j) {
  double r2 = 0.0;
  for (int k = 0; k < e.dim; ++k) {
    const double dx = e.position(i)[k] - e.position(j)[k];
    r2 += dx * dx;
  }
  return std::sqrt(r2);
}

SimConfig free_config(int n, double eps, int realizations) {
  SimConfig c;
  c.particle_count = n;
  c.diameter = eps;
  c.realizations = realizations;
  c.dt = 1e-4;
  c.t_final = 0.01;
  c.grid_cells = 16;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("free flight with frozen noise") {
  ParticleEnsemble e = make_ensemble(2, {0.1, 0.2, -0.3, 0.0});
  const std::vector<double> noise = {1.0, -2.0, 0.5, 0.25};
  const double dt = 1e-4;
  apply_em_update(e, ZeroPotential{}, dt, noise);
  const double s = std::sqrt(2 * dt);
  CHECK(e.coords[0] == 0.1 + s * 1.0);
  CHECK(e.coords[1] == 0.2 + s * -2.0);
  CHECK(e.coords[2] == -0.3 + s * 0.5);
  CHECK(e.coords[3] == 0.0 + s * 0.25);
  CHECK(e.time == dt);
}

TEST_CASE("free flight adds the drift term") {
  ParticleEnsemble e = make_ensemble(2, {0.1, 0.05});
  const PotentialSpec v = volcano_potential();
  const double x[2] = {0.1, 0.05};
  const Vec f = eval_force(v, x);
  const std::vector<double> noise = {0.0, 0.0};
  apply_em_update(e, v, 1e-5, noise);
  CHECK(e.coords[0] == doctest::Approx(0.1 + 1e-5 * f[0]).epsilon(1e-15));
  CHECK(e.coords[1] == doctest::Approx(0.05 + 1e-5 * f[1]).epsilon(1e-15));
}

TEST_CASE("increment variance is 2 dt per coordinate") {
  RngStream rng(1, 0);
  const double dt = 1e-3;
  ParticleEnsemble e = make_ensemble(2, std::vector<double>(2 * 50'000, 0.0));
  em_step(e, ZeroPotential{}, dt, rng);
  double sum = 0.0, sum2 = 0.0;
  for (double v : e.coords) {
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(e.coords.size());
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(var == doctest::Approx(2 * dt).epsilon(0.03));
}

TEST_CASE("k-step increments have variance 2 k dt within 3 sigma") {
  RngStream rng(2, 0);
  const double dt = 1e-4;
  const int k = 10;
  ParticleEnsemble e = make_ensemble(2, std::vector<double>(2 * 20'000, 0.0));
  for (int s = 0; s < k; ++s) em_step(e, ZeroPotential{}, dt, rng);
  double sum2 = 0.0;
  for (double v : e.coords) sum2 += v * v;
  const double n = static_cast<double>(e.coords.size());
  const double target = 2 * k * dt;
  // Sample variance of n normals has standard deviation sigma^2 sqrt(2/n).
  CHECK(std::abs(sum2 / n - target) <= 3 * target * std::sqrt(2.0 / n));
}

TEST_CASE("same stream reproduces the same flight") {
  ParticleEnsemble a = make_ensemble(2, {0.0, 0.0, 0.1, 0.1});
  ParticleEnsemble b = a;
  RngStream ra(99, 3), rb(99, 3), rc(99, 4);
  em_step(a, ZeroPotential{}, 1e-4, ra);
  em_step(b, ZeroPotential{}, 1e-4, rb);
  CHECK(a.coords == b.coords);
  ParticleEnsemble c = make_ensemble(2, {0.0, 0.0, 0.1, 0.1});
  em_step(c, ZeroPotential{}, 1e-4, rc);
  CHECK(c.coords != a.coords);
}

TEST_CASE("mirror reflection at the walls") {
  const Box box = unit_box();
  double x[2] = {-0.5 - 0.01, 0.2};
  reflect_into(x, box);
  CHECK(x[0] == doctest::Approx(-0.5 + 0.01).epsilon(1e-15));
  CHECK(x[1] == 0.2);

  double inside[2] = {0.3, -0.4};
  reflect_into(inside, box);
  CHECK(inside[0] == 0.3);
  CHECK(inside[1] == -0.4);

  double far[2] = {0.5 + 0.3, 0.0};
  reflect_into(far, box);
  CHECK(far[0] == doctest::Approx(0.5 - 0.3).epsilon(1e-15));

  double huge[2] = {2.7, 0.0};
  CHECK_THROWS_AS(reflect_into(huge, box), Error);
  try {
    reflect_into(huge, box);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStepTooLarge);
  }
}

TEST_CASE("cell list tiles the box with cells no smaller than eps") {
  const Box box = unit_box();
  const CellList cl(box, 0.03, 100);
  CHECK(cl.cells_along(0) == 33);
  CHECK(cl.cell_size(0) >= 0.03);
  CHECK(cl.cell_size(0) * cl.cells_along(0) == doctest::Approx(1.0));
  // Tiny eps is capped so the cell count stays bounded.
  const CellList capped(box, 1e-6, 10);
  CHECK(capped.cell_count() <= std::max<std::size_t>(1u << 14, 80));
  CHECK(capped.cell_size(0) >= 1e-6);
}

TEST_CASE("overlap detection matches the all-pairs scan") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = trial % 4 == 3 ? 3 : 2;
    std::uniform_int_distribution<int> un(2, 200);
    std::uniform_real_distribution<double> ue(0.005, 0.15);
    const int n = un(gen);
    const double eps = ue(gen);
    Box box = unit_box(dim);
    std::uniform_real_distribution<double> ux(-0.5, 0.5);
    ParticleEnsemble e;
    e.dim = dim;
    e.coords.resize(static_cast<std::size_t>(n * dim));
    for (auto& v : e.coords) v = ux(gen);
    CellList cl(box, eps, e.size());
    cl.rebuild(e.coords);
    const auto pairs = detect_overlaps(e, cl, eps);
    const auto expected = oracle::all_pairs_overlaps(e.coords, dim, eps);
    CHECK(pairs == expected);
  }
}

TEST_CASE("overlap detection edge cases") {
  const Box box = unit_box();
  ParticleEnsemble e = make_ensemble(2, {0.0, 0.0, 0.005, 0.0});
  CellList cl(box, 0.01, 2);
  cl.rebuild(e.coords);
  CHECK(detect_overlaps(e, cl, 0.01).size() == 1);

  ParticleEnsemble apart = make_ensemble(2, {0.0, 0.0, 0.02, 0.0, -0.3, 0.4});
  CellList cl2(box, 0.01, 3);
  cl2.rebuild(apart.coords);
  CHECK(detect_overlaps(apart, cl2, 0.01).empty());
}

TEST_CASE("symmetric separation of a pair") {
  const double eps = 0.01;
  ParticleEnsemble e = make_ensemble(2, {-0.4 * eps, 0.0, 0.4 * eps, 0.0});
  const ResolveStats stats = resolve_overlaps(e, unit_box(), eps, 100);
  CHECK(e.coords[0] == doctest::Approx(-0.5 * eps).epsilon(1e-13));
  CHECK(e.coords[2] == doctest::Approx(0.5 * eps).epsilon(1e-13));
  CHECK(e.coords[1] == 0.0);
  CHECK(stats.initial_overlaps == 1);
}

TEST_CASE("isolated pair keeps its center of mass") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::uniform_real_distribution<double> ud(-0.004, 0.004);
  for (int trial = 0; trial < 50; ++trial) {
    const double cx = u(gen), cy = u(gen);
    ParticleEnsemble e = make_ensemble(2, {cx, cy, cx + ud(gen), cy + ud(gen)});
    const double mx = 0.5 * (e.coords[0] + e.coords[2]);
    const double my = 0.5 * (e.coords[1] + e.coords[3]);
    resolve_overlaps(e, unit_box(), 0.01, 100);
    CHECK(0.5 * (e.coords[0] + e.coords[2]) == doctest::Approx(mx).epsilon(1e-14));
    CHECK(0.5 * (e.coords[1] + e.coords[3]) == doctest::Approx(my).epsilon(1e-14));
    CHECK(distance(e, 0, 1) == doctest::Approx(0.01).epsilon(1e-12));
  }
}

TEST_CASE("no overlaps leaves the ensemble unchanged") {
  ParticleEnsemble e = make_ensemble(2, {0.0, 0.0, 0.1, 0.0, 0.0, 0.1});
  const auto before = e.coords;
  const ResolveStats stats = resolve_overlaps(e, unit_box(), 0.01, 100);
  CHECK(e.coords == before);
  CHECK(stats.sweeps == 0);
}

TEST_CASE("three-particle chain resolves within 50 sweeps") {
  const double eps = 0.01;
  ParticleEnsemble e = make_ensemble(2, {0.0, 0.0, 0.9 * eps, 0.0, 1.8 * eps, 0.0});
  const ResolveStats stats = resolve_overlaps(e, unit_box(), eps, 50);
  CHECK(stats.sweeps <= 50);
  CHECK(oracle::min_pair_distance(e.coords, 2) >= eps - 1e-12);
}

TEST_CASE("coincident centers separate along the first axis") {
  ParticleEnsemble e = make_ensemble(2, {0.1, 0.1, 0.1, 0.1});
  resolve_overlaps(e, unit_box(), 0.01, 10);
  CHECK(e.coords[0] == doctest::Approx(0.095));
  CHECK(e.coords[2] == doctest::Approx(0.105));
  CHECK(e.coords[1] == 0.1);
  CHECK(e.coords[3] == 0.1);
}

TEST_CASE("pair pressed against a wall stays inside and at contact") {
  const double eps = 0.01;
  ParticleEnsemble e = make_ensemble(2, {-0.4995, 0.0, -0.497, 0.0});
  resolve_overlaps(e, unit_box(), eps, 100);
  CHECK(e.coords[0] >= -0.5);
  CHECK(distance(e, 0, 1) >= eps - 1e-12);
}

TEST_CASE("impossible resolution reports an unresolved collision") {
  // Far too many overlapping pairs for one sweep.
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  ParticleEnsemble e;
  e.dim = 2;
  for (int i = 0; i < 40; ++i) {
    e.coords.push_back(u(gen));
    e.coords.push_back(u(gen));
  }
  try {
    resolve_overlaps(e, unit_box(), 0.01, 1);
    FAIL("expected an unresolved collision");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kUnresolvedCollision);
  }
}

TEST_CASE("initial sampling") {
  SUBCASE("uniform, point particles: mean at the domain center") {
    SimConfig c = free_config(1000, 0.0, 1);
    double sum[2] = {0, 0};
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
      RngStream rng(5, static_cast<std::uint64_t>(r));
      const ParticleEnsemble e = sample_initial(UniformInit{}, c, rng);
      for (std::size_t i = 0; i < e.size(); ++i) {
        sum[0] += e.position(i)[0];
        sum[1] += e.position(i)[1];
      }
    }
    const double n = 1000.0 * reps;
    const double se = std::sqrt(1.0 / 12.0 / n);
    CHECK(std::abs(sum[0] / n) <= 4 * se);
    CHECK(std::abs(sum[1] / n) <= 4 * se);
  }
  SUBCASE("truncated Gaussian has the requested spread") {
    SimConfig c = free_config(100'000, 0.0, 1);
    c.init = TruncatedGaussianInit{{0, 0, 0}, 0.09};
    RngStream rng(6, 0);
    const ParticleEnsemble e = sample_initial(c.init, c, rng);
    double s2 = 0.0;
    for (double v : e.coords) s2 += v * v;
    CHECK(std::sqrt(s2 / static_cast<double>(e.coords.size())) ==
          doctest::Approx(0.09).epsilon(0.02));
  }
  SUBCASE("finite-size insertion is overlap free") {
    SimConfig c = free_config(400, 0.01, 1);
    c.init = TruncatedGaussianInit{{0, 0, 0}, 0.09};
    RngStream rng(7, 0);
    const ParticleEnsemble e = sample_initial(c.init, c, rng);
    CHECK(e.size() == 400);
    CHECK(oracle::min_pair_distance(e.coords, 2) >= 0.01);
    for (double v : e.coords) CHECK(std::abs(v) <= 0.5);
  }
  SUBCASE("packing failure") {
    // Legal by volume but far beyond what random insertion can place.
    SimConfig c = free_config(1200, 0.03, 1);
    RngStream rng(8, 0);
    try {
      sample_initial(UniformInit{}, c, rng);
      FAIL("expected packing failure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kPackingInfeasible);
    }
  }
}

TEST_CASE("ensemble from uniform stays uniform") {
  SimConfig c = free_config(1000, 0.0, 1600);
  c.dt = 1e-3;
  const std::vector<double> times = {0.01};
  const EnsembleResult r = run_ensemble(c, times, c.grid(), 1);
  REQUIRE(r.histograms.size() == 1);
  CHECK(r.histograms[0].sample_count() == 1'600'000);
  const ScalarField flat(c.grid(), 1.0);
  CHECK(l1_distance(r.histograms[0].density(), flat) <= 0.02);
}

TEST_CASE("ensemble is deterministic and independent of thread count") {
  SimConfig c = free_config(200, 0.01, 6);
  c.init = TruncatedGaussianInit{{0, 0, 0}, 0.09};
  c.t_final = 0.005;
  c.bd.check_interval = 1;
  c.bd.max_sweeps = 10'000;
  const std::vector<double> times = {0.002, 0.005};
  const EnsembleResult a = run_ensemble(c, times, c.grid(), 1);
  const EnsembleResult b = run_ensemble(c, times, c.grid(), 3);
  const EnsembleResult again = run_ensemble(c, times, c.grid(), 1);
  for (std::size_t s = 0; s < times.size(); ++s) {
    CHECK(std::equal(a.histograms[s].counts().begin(), a.histograms[s].counts().end(),
                     b.histograms[s].counts().begin()));
    CHECK(std::equal(a.histograms[s].counts().begin(), a.histograms[s].counts().end(),
                     again.histograms[s].counts().begin()));
  }
  CHECK(a.msd == b.msd);
  CHECK(a.steps == b.steps);
}

TEST_CASE("trajectory snapshots respect the no-overlap invariant") {
  SimConfig c = free_config(300, 0.01, 2);
  c.init = TruncatedGaussianInit{{0, 0, 0}, 0.09};
  c.t_final = 0.003;
  c.bd.trajectory_realizations = 2;
  c.bd.check_interval = 1;
  c.bd.max_sweeps = 10'000;
  const std::vector<double> times = {0.001, 0.002, 0.003};
  const EnsembleResult r = run_ensemble(c, times, c.grid(), 1);
  CHECK(r.trajectories.size() == 6);
  for (const auto& snap : r.trajectories) {
    CHECK(oracle::min_pair_distance(snap.coords, 2) >= 0.01 - 1e-12);
    for (double v : snap.coords) CHECK(std::abs(v) <= 0.5);
  }
}

TEST_CASE("mean-square displacement") {
  SUBCASE("point particles: slope 2 d") {
    SimConfig c = free_config(1000, 0.0, 100);
    c.dt = 1e-4;
    c.t_final = 0.004;
    c.init = TruncatedGaussianInit{{0, 0, 0}, 0.05};
    const std::vector<double> times = {0.0, 0.002, 0.004};
    const auto m = msd(c, times, 1);
    CHECK(m[0] == 0.0);
    CHECK(m[2] / 0.004 == doctest::Approx(4.0).epsilon(0.02));
  }
  SUBCASE("hard disks: self-diffusion does not exceed the free value") {
    SimConfig c = free_config(400, 0.01, 20);
    c.dt = 1e-5;
    c.bd.max_sweeps = 10'000;
    c.t_final = 0.002;
    // A uniform start has no collective spreading to inflate displacements.
    c.init = UniformInit{};
    const std::vector<double> times = {0.002};
    const auto m = msd(c, times, 1);
    CHECK(m[0] / 0.002 <= 4.0);
  }
  SUBCASE("rejects a potential") {
    SimConfig c = free_config(10, 0.0, 1);
    c.potential = volcano_potential();
    const std::vector<double> times = {0.001};
    CHECK_THROWS_AS(msd(c, times, 1), Error);
  }
}
