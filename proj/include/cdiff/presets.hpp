#pragma once

#include <string>
#include <vector>

#include "cdiff/config.hpp"

namespace cdiff {

struct Preset {
  std::string name;
  std::string kind;  // experiment kind the preset is meant for
  std::string description;
  std::string text;       // config document
  std::string desk_text;  // entries replaced in the --desk-scale variant
};

const std::vector<Preset>& list_presets();

/// Looks up a preset by name; kConfig if unknown.
const Preset& find_preset(const std::string& name);

/// The preset's config document, with the desk-scale overlay if requested.
ConfigDocument preset_document(const std::string& name, bool desk_scale);

}  // namespace cdiff
