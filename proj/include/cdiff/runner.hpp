#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cdiff/core.hpp"
#include "cdiff/error.hpp"

namespace cdiff {

struct ExperimentManifest {
  std::string kind;  // bd | mh | pde | stationary | compare
  std::filesystem::path config_path;  // may be empty when a preset is given
  std::filesystem::path out_dir;
  std::string preset;
  bool desk_scale = false;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;  // 0: CROWDED_DIFFUSION_THREADS, then all cores
  std::vector<std::string> overrides;  // section.key=value
};

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitPacking = 3,
  kExitInstability = 4,
  kExitBracketing = 5,
  kExitUnresolvedCollision = 6,
  kExitStepTooLarge = 7,
  kExitIo = 8,
  kExitInvariant = 9,
};

int exit_code_for(ErrorCode code);
/// Human-readable exit code table for --help.
std::string exit_code_help();

/// Preset (if any), then config file, then --set overrides, then --seed.
SimConfig resolve_config(const ExperimentManifest& manifest);

unsigned resolve_thread_request(unsigned requested);

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
  std::string error_message;
};

/// Runs the experiment and writes its files. Errors are caught, mapped to an
/// exit code and written to error.json in the output directory.
RunOutcome run_experiment(const ExperimentManifest& manifest);

}  // namespace cdiff
