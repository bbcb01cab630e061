#include "cdiff/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include <fmt/format.h>

#include "cdiff/analysis.hpp"
#include "cdiff/bd.hpp"
#include "cdiff/config.hpp"
#include "cdiff/io.hpp"
#include "cdiff/mh.hpp"
#include "cdiff/parallel.hpp"
#include "cdiff/pde.hpp"
#include "cdiff/presets.hpp"
#include "cdiff/stationary.hpp"

namespace cdiff {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kUnsupportedDimension:
    case ErrorCode::kDomain:
    case ErrorCode::kShape:
    case ErrorCode::kOutOfDomain:
      return kExitConfig;
    case ErrorCode::kPackingInfeasible:
      return kExitPacking;
    case ErrorCode::kInstability:
      return kExitInstability;
    case ErrorCode::kBracketing:
      return kExitBracketing;
    case ErrorCode::kUnresolvedCollision:
      return kExitUnresolvedCollision;
    case ErrorCode::kStepTooLarge:
      return kExitStepTooLarge;
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kInvariant:
      return kExitInvariant;
  }
  return kExitOther;
}

std::string exit_code_help() {
  return "Exit codes:\n"
         "  0  success\n"
         "  1  unexpected failure\n"
         "  2  invalid configuration, domain or shape\n"
         "  3  infeasible packing (particles do not fit)\n"
         "  4  PDE instability (negative density)\n"
         "  5  stationary normalization could not be bracketed\n"
         "  6  overlap resolution did not converge\n"
         "  7  time step too large for wall reflection\n"
         "  8  file input/output failure\n"
         "  9  particle invariant violated\n"
         "On failure error.json in the output directory holds {error, message, exit_code}.\n";
}

unsigned resolve_thread_request(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CROWDED_DIFFUSION_THREADS"); env != nullptr && *env) {
    const auto n = parse_uint(env, "CROWDED_DIFFUSION_THREADS");
    if (n > 0) return static_cast<unsigned>(n);
  }
  return resolve_threads(0);
}

namespace {

ConfigDocument resolve_document(const ExperimentManifest& manifest) {
  ConfigDocument doc;
  if (!manifest.preset.empty()) doc = preset_document(manifest.preset, manifest.desk_scale);
  if (!manifest.config_path.empty()) doc.merge(ConfigDocument::load(manifest.config_path));
  for (const auto& assignment : manifest.overrides) doc.apply_override(assignment);
  if (manifest.seed) doc.set("sim.seed", std::to_string(*manifest.seed));
  return doc;
}

struct Product {
  std::string name;
  ScalarField field;
  Json extra = Json::object();
  std::uint64_t sample_count = 0;
};

struct Computed {
  std::vector<Product> products;
  Json summary = Json::object();
  double wall_time_seconds = 0.0;
  std::vector<EnsembleSnapshot> trajectories;
  int dim = 2;
};

double origin_concentration(const ScalarField& density, const SimConfig& config) {
  const Vec center = config.domain.center();
  const double p0 =
      density.value_at(std::span<const double>(center.data(), static_cast<std::size_t>(config.dim)));
  return concentration_from_density(p0, config.particle_count, config.diameter, config.dim);
}

std::string indexed(const std::string& stem, std::size_t i) { return fmt::format("{}_{:03d}", stem, i); }

Computed compute_pde(const SimConfig& config) {
  Computed out;
  const double a = excluded_volume_coefficient(config.particle_count, config.diameter, config.dim);
  const PdeRun run = solve_pde(config, config.sample_times);
  Json times = Json::array();
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const ScalarField& snap = run.snapshots[i];
    Product p{indexed("pde", i), snap};
    p.extra["c_origin"] = origin_concentration(snap, config);
    p.extra["variance"] = spatial_variance(snap);
    out.products.push_back(std::move(p));
    times.push_back(snap.time());
  }
  out.summary["a"] = a;
  out.summary["steps"] = run.steps;
  out.summary["initial_mass"] = run.initial_mass;
  out.summary["max_relative_mass_drift"] = run.max_relative_mass_drift;
  out.summary["drift_scheme"] =
      config.pde.drift == DriftScheme::kUpwind ? "upwind" : "entropic";
  out.summary["snapshot_times"] = times;
  return out;
}

Computed compute_bd(const SimConfig& config, unsigned threads) {
  Computed out;
  const EnsembleResult result = run_ensemble(config, config.sample_times, config.grid(), threads);
  for (std::size_t i = 0; i < result.histograms.size(); ++i) {
    const auto& h = result.histograms[i];
    ScalarField density = h.density();
    density.set_time(config.sample_times[i]);
    Product p{indexed("bd", i), density};
    p.sample_count = h.sample_count();
    p.extra["sample_count"] = h.sample_count();
    p.extra["msd"] = result.msd[i];
    p.extra["c_origin"] = origin_concentration(density, config);
    out.products.push_back(std::move(p));
  }
  out.summary["realizations"] = config.realizations;
  out.summary["steps"] = result.steps;
  out.summary["overlap_pairs"] = result.overlap_pairs;
  out.summary["mean_overlaps_per_step"] = result.mean_overlaps_per_step();
  out.summary["max_sweeps_used"] = result.max_sweeps_used;
  out.summary["msd"] = result.msd;
  out.trajectories = result.trajectories;
  out.dim = config.dim;
  return out;
}

Computed compute_mh(const SimConfig& config, unsigned threads) {
  Computed out;
  const MhResult result = run_mh(config, config.grid(), threads);
  ScalarField density = result.histogram.density();
  Product p{"mh", density};
  p.sample_count = result.histogram.sample_count();
  p.extra["sample_count"] = p.sample_count;
  p.extra["c_origin"] = origin_concentration(density, config);
  out.products.push_back(std::move(p));
  out.summary["steps"] = result.steps;
  out.summary["burn_in"] = result.burn_in;
  out.summary["thin"] = result.thin;
  out.summary["acceptance_rate"] = result.acceptance_rate;
  out.summary["seed"] = result.seed;
  out.summary["chains"] = result.chains;
  out.summary["proposal_scale"] = result.proposal_scale;
  out.wall_time_seconds = result.wall_time_seconds;
  return out;
}

Computed compute_stationary(const SimConfig& config) {
  Computed out;
  const double a = excluded_volume_coefficient(config.particle_count, config.diameter, config.dim);
  StationarySolution sol = solve_stationary(config.potential, a, config.grid());
  Product p{"stationary", sol.density};
  p.extra["C"] = sol.constant;
  p.extra["residual_norm"] = sol.residual_norm;
  p.extra["c_origin"] = origin_concentration(sol.density, config);
  out.summary["C"] = sol.constant;
  out.summary["residual_norm"] = sol.residual_norm;
  out.summary["c_origin"] = p.extra["c_origin"];
  out.summary["free_energy"] = free_energy(sol.density, config.potential, a);
  out.summary["bisection_evaluations"] = sol.bisection_trace.size();
  out.products.push_back(std::move(p));
  return out;
}

Computed compute(const std::string& kind, const SimConfig& config, unsigned threads) {
  if (kind == "pde") return compute_pde(config);
  if (kind == "bd") return compute_bd(config, threads);
  if (kind == "mh") return compute_mh(config, threads);
  if (kind == "stationary") return compute_stationary(config);
  fail(ErrorCode::kConfig, fmt::format("unknown experiment kind '{}'", kind));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

Json generated_at(double wall_time_seconds) {
  Json g = Json::object();
  g["timestamp"] = utc_timestamp();
  g["wall_time_seconds"] = wall_time_seconds;
  return g;
}

void write_products(const Computed& computed, const SimConfig& config, const fs::path& dir,
                    RunOutcome& outcome, const std::string& title) {
  const double a = excluded_volume_coefficient(config.particle_count, config.diameter, config.dim);
  std::vector<std::string> csv_names;
  for (const auto& product : computed.products) {
    const fs::path csv = dir / (product.name + ".csv");
    write_field(csv, product.field, a, product.extra);
    outcome.files.push_back(csv);
    outcome.files.push_back(metadata_path(csv));
    csv_names.push_back(csv.filename().string());
  }
  if (!computed.trajectories.empty()) {
    const fs::path traj = dir / "trajectories.csv";
    write_trajectories_csv(traj, computed.trajectories, computed.dim);
    outcome.files.push_back(traj);
  }
  if (!csv_names.empty() && config.dim == 2) {
    const fs::path script = dir / "plot.gp";
    write_text(script, gnuplot_script(csv_names, title));
    outcome.files.push_back(script);
  }
}

void run_single(const std::string& kind, const SimConfig& config, const fs::path& dir,
                unsigned threads, RunOutcome& outcome) {
  const auto start = std::chrono::steady_clock::now();
  Computed computed = compute(kind, config, threads);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_products(computed, config, dir, outcome, kind);

  Json summary = Json::object();
  summary["kind"] = kind;
  summary["seed"] = config.seed;
  summary["files"] = Json::array();
  for (const auto& product : computed.products) summary["files"].push_back(product.name + ".csv");
  for (const auto& [key, value] : computed.summary.items()) summary[key] = value;
  summary["generated_at"] =
      generated_at(computed.wall_time_seconds > 0.0 ? computed.wall_time_seconds : elapsed);
  const fs::path path = dir / (kind == "mh" ? "mh_summary.json" : "run.json");
  write_json(path, summary);
  outcome.files.push_back(path);
}

void run_compare(const SimConfig& config, const fs::path& dir, unsigned threads,
                 RunOutcome& outcome) {
  const std::string& kind_a = config.compare_source_a;
  const std::string& kind_b = config.compare_source_b;
  if (kind_a.empty() || kind_b.empty()) {
    fail(ErrorCode::kConfig, "compare needs compare.source_a and compare.source_b");
  }
  if (config.grid_cells % config.compare_cells != 0) {
    fail(ErrorCode::kConfig, fmt::format("compare.cells = {} must divide grid.cells = {}",
                                         config.compare_cells, config.grid_cells));
  }
  const int factor = config.grid_cells / config.compare_cells;
  const auto start = std::chrono::steady_clock::now();
  const Computed a = compute(kind_a, config, threads);
  const Computed b = compute(kind_b, config, threads);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (a.products.empty() || b.products.empty()) {
    fail(ErrorCode::kConfig, "compare needs at least one sample time");
  }
  // The last product of each source: final sample time, or the single
  // stationary/MH field.
  const Product& pa = a.products.back();
  const Product& pb = b.products.back();
  const ScalarField fa = coarsen(pa.field, factor);
  const ScalarField fb = coarsen(pb.field, factor);

  Computed both;
  both.products.push_back({"compare_" + kind_a, fa, pa.extra, pa.sample_count});
  both.products.push_back({"compare_" + kind_b + (kind_a == kind_b ? "_b" : ""), fb, pb.extra,
                           pb.sample_count});
  write_products(both, config, dir, outcome, "compare");

  Json grid = Json::object();
  grid["dim"] = config.dim;
  grid["cells"] = config.compare_cells;
  grid["coarsening_factor"] = factor;
  Json report = Json::object();
  report["l1"] = l1_distance(fa, fb);
  report["linf"] = linf_distance(fa, fb);
  report["grid"] = grid;
  report["sample_count"] = pa.sample_count + pb.sample_count;
  report["source_a"] = kind_a;
  report["source_b"] = kind_b;
  report["time"] = pa.field.time();
  report["generated_at"] = generated_at(elapsed);
  const fs::path path = dir / "compare.json";
  write_json(path, report);
  outcome.files.push_back(path);
}

}  // namespace

SimConfig resolve_config(const ExperimentManifest& manifest) {
  return build_config(resolve_document(manifest));
}

RunOutcome run_experiment(const ExperimentManifest& manifest) {
  RunOutcome outcome;
  ErrorCode code = ErrorCode::kConfig;
  try {
    if (manifest.out_dir.empty()) fail(ErrorCode::kConfig, "output directory is required");
    std::error_code ec;
    fs::create_directories(manifest.out_dir, ec);
    if (ec || !fs::is_directory(manifest.out_dir)) {
      fail(ErrorCode::kIo, fmt::format("cannot create output directory '{}'",
                                       manifest.out_dir.string()));
    }
    fs::remove(manifest.out_dir / "error.json", ec);
    const ConfigDocument doc = resolve_document(manifest);
    const SimConfig config = build_config(doc);
    const unsigned threads = resolve_thread_request(manifest.threads);

    const fs::path resolved = manifest.out_dir / "config.ini";
    write_text(resolved, doc.to_text());
    outcome.files.push_back(resolved);
    if (manifest.kind == "compare") {
      run_compare(config, manifest.out_dir, threads, outcome);
    } else {
      run_single(manifest.kind, config, manifest.out_dir, threads, outcome);
    }
    return outcome;
  } catch (const Error& e) {
    code = e.code();
    outcome.exit_code = exit_code_for(code);
    outcome.error_message = e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = kExitOther;
    outcome.error_message = e.what();
  }
  Json err = Json::object();
  err["error"] = outcome.exit_code == kExitOther ? std::string("internal") : std::string(to_string(code));
  err["message"] = outcome.error_message;
  err["exit_code"] = outcome.exit_code;
  try {
    if (!manifest.out_dir.empty()) write_json(manifest.out_dir / "error.json", err);
  } catch (const Error&) {
    // The error is still reported through the exit code and stderr.
  }
  return outcome;
}

}  // namespace cdiff
