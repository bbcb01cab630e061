#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdiff/core.hpp"

namespace cdiff {

/// Sectioned key-value document:
///
///   [sim]
///   d = 2
///   eps = 0.01
///   [domain]
///   lo = [-0.5, -0.5]
///
/// '#' starts a comment. Every section and key is checked against the schema
/// and unknown entries are rejected with kConfig.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text, std::string_view source = "<config>");
  static ConfigDocument load(const std::filesystem::path& path);

  /// Sets "section.key" to a raw value, validating the key.
  void set(std::string_view dotted_key, std::string value);
  /// Parses "section.key=value".
  void apply_override(std::string_view assignment);
  /// Entries of `other` replace entries of this document.
  void merge(const ConfigDocument& other);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string to_text() const;

  /// Directory used to resolve relative file references (tabulated fields).
  std::filesystem::path base_dir;

 private:
  std::map<std::string, std::map<std::string, std::string>> entries_;
};

SimConfig build_config(const ConfigDocument& doc);
SimConfig load_config(const std::filesystem::path& path);

/// Value parsers shared with the command line.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);
std::vector<double> parse_double_list(std::string_view text, std::string_view what);

}  // namespace cdiff
