#include "cdiff/presets.hpp"

#include <fmt/format.h>

namespace cdiff {

namespace {

// Free diffusion of N = 400 particles from a centered Gaussian (sigma 0.09).
std::string fig2_text(const char* eps, const char* source_b_kind) {
  return fmt::format(R"([sim]
d = 2
n = 400
eps = {}
dt = 1e-5
t_final = 0.05
realizations = 10000
seed = 20160101
[domain]
lo = [-0.5, -0.5]
hi = [0.5, 0.5]
[potential]
kind = zero
[init]
kind = gaussian
mean = [0, 0]
sigma = 0.09
[grid]
cells = 128
[output]
sample_times = [0.01, 0.02, 0.03, 0.04, 0.05]
[bd]
max_sweeps = 10000
[compare]
source_a = bd
source_b = {}
cells = 16
)",
                     eps, source_b_kind);
}

// N = 1000 particles in the volcano potential, uniform start.
std::string fig3_text(const char* eps) {
  return fmt::format(R"([sim]
d = 2
n = 1000
eps = {}
realizations = 1
seed = 20160303
[domain]
lo = [-0.5, -0.5]
hi = [0.5, 0.5]
[potential]
kind = gaussian_sum
amplitudes = [-4.77, 3.58]
widths = [100, 50]
[init]
kind = uniform
[grid]
cells = 128
[mh]
steps = 1000000000
[compare]
source_a = mh
source_b = stationary
cells = 16
)",
                     eps);
}

constexpr const char* kFig2BdDesk = "[sim]\nrealizations = 1000\ndt = 1e-4\n";
constexpr const char* kFig3MhDesk = "[mh]\nsteps = 10000000\n";

std::vector<Preset> build() {
  std::vector<Preset> p;
  p.push_back({"fig2-pde-eps0", "pde",
               "Gaussian spreading, point particles, continuum solution at t = 0.01..0.05",
               fig2_text("0", "pde"), ""});
  p.push_back({"fig2-pde-finite", "pde",
               "Gaussian spreading, N = 400, eps = 0.01, continuum solution at t = 0.01..0.05",
               fig2_text("0.01", "pde"), ""});
  p.push_back({"fig2-bd-eps0", "bd",
               "Gaussian spreading, point particles, 1e4 realizations at dt = 1e-5 "
               "(desk: 1e3 at dt = 1e-4)",
               fig2_text("0", "pde"), kFig2BdDesk});
  p.push_back({"fig2-bd-finite", "bd",
               "Gaussian spreading, N = 400, eps = 0.01 hard disks, 1e4 realizations at "
               "dt = 1e-5 (desk: 1e3 at dt = 1e-4)",
               fig2_text("0.01", "pde"), kFig2BdDesk});
  p.push_back({"fig3-stationary-eps0", "stationary",
               "Volcano potential, point particles, stationary density", fig3_text("0"), ""});
  p.push_back({"fig3-stationary-finite", "stationary",
               "Volcano potential, N = 1000, eps = 0.01, stationary density", fig3_text("0.01"),
               ""});
  p.push_back({"fig3-mh-eps0", "mh",
               "Volcano potential, point particles, 1e9 Metropolis steps (desk: 1e7)",
               fig3_text("0"), kFig3MhDesk});
  p.push_back({"fig3-mh-finite", "mh",
               "Volcano potential, N = 1000, eps = 0.01 hard disks, 1e9 Metropolis steps "
               "(desk: 1e7)",
               fig3_text("0.01"), kFig3MhDesk});
  return p;
}

}  // namespace

const std::vector<Preset>& list_presets() {
  static const std::vector<Preset> kPresets = build();
  return kPresets;
}

const Preset& find_preset(const std::string& name) {
  // Short aliases for the finite-size variants.
  const std::string resolved =
      name == "fig3-stationary" || name == "fig3-mh" || name == "fig2-pde" || name == "fig2-bd"
          ? name + "-finite"
          : name;
  for (const auto& preset : list_presets()) {
    if (preset.name == resolved) return preset;
  }
  fail(ErrorCode::kConfig, fmt::format("unknown preset '{}'", name));
}

ConfigDocument preset_document(const std::string& name, bool desk_scale) {
  const Preset& preset = find_preset(name);
  ConfigDocument doc = ConfigDocument::parse(preset.text, "preset " + preset.name);
  if (desk_scale && !preset.desk_text.empty()) {
    doc.merge(ConfigDocument::parse(preset.desk_text, "preset " + preset.name + " (desk)"));
  }
  return doc;
}

}  // namespace cdiff
