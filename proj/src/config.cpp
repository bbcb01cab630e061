#include "cdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "cdiff/io.hpp"

namespace cdiff {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"sim", {"d", "n", "eps", "dt", "t_final", "realizations", "seed"}},
      {"domain", {"lo", "hi"}},
      {"potential", {"kind", "amplitudes", "widths", "file"}},
      {"init", {"kind", "mean", "sigma", "file"}},
      {"grid", {"cells"}},
      {"output", {"sample_times", "trajectory_realizations"}},
      {"bd", {"max_sweeps", "check_interval"}},
      {"mh", {"steps", "burn_in", "thin", "proposal_scale", "refresh_interval"}},
      {"pde", {"safety_factor", "drift"}},
      {"compare", {"source_a", "source_b", "cells"}},
  };
  return kSchema;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return std::string(s.substr(1, s.size() - 2));
  }
  return std::string(s);
}

void check_key(const std::string& section, const std::string& key, std::string_view where) {
  const auto it = schema().find(section);
  if (it == schema().end()) {
    fail(ErrorCode::kConfig, fmt::format("{}: unknown section [{}]", where, section));
  }
  if (!it->second.contains(key)) {
    fail(ErrorCode::kConfig, fmt::format("{}: unknown key '{}' in [{}]", where, key, section));
  }
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::kConfig, fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec == std::errc() && ptr == end) return value;
  // Accept integral decimals such as 1e7.
  const double d = parse_double(text, what);
  if (d != static_cast<double>(static_cast<std::int64_t>(d))) {
    fail(ErrorCode::kConfig, fmt::format("{}: '{}' is not an integer", what, text));
  }
  return static_cast<std::int64_t>(d);
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec == std::errc() && ptr == end) return value;
  const std::int64_t v = parse_int(text, what);
  if (v < 0) fail(ErrorCode::kConfig, fmt::format("{}: '{}' must be >= 0", what, text));
  return static_cast<std::uint64_t>(v);
}

std::vector<double> parse_double_list(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    fail(ErrorCode::kConfig, fmt::format("{}: expected a list like [1, 2]", what));
  }
  text = trim(text.substr(1, text.size() - 2));
  std::vector<double> values;
  while (!text.empty()) {
    const auto comma = text.find(',');
    values.push_back(parse_double(text.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    text = trim(text.substr(comma + 1));
  }
  return values;
}

// ---------------------------------------------------------------------------

ConfigDocument ConfigDocument::parse(std::string_view text, std::string_view source) {
  ConfigDocument doc;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::string where = fmt::format("{}:{}", source, line_no);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::kConfig, where + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!schema().contains(section)) {
        fail(ErrorCode::kConfig, fmt::format("{}: unknown section [{}]", where, section));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::kConfig, where + ": expected key = value");
    if (section.empty()) fail(ErrorCode::kConfig, where + ": key outside of any section");
    const std::string key(trim(line.substr(0, eq)));
    check_key(section, key, where);
    doc.entries_[section][key] = std::string(trim(line.substr(eq + 1)));
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  ConfigDocument doc = parse(buffer.str(), path.string());
  doc.base_dir = path.parent_path();
  return doc;
}

void ConfigDocument::set(std::string_view dotted_key, std::string value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string_view::npos) {
    fail(ErrorCode::kConfig, fmt::format("override key '{}' must be section.key", dotted_key));
  }
  const std::string section(trim(dotted_key.substr(0, dot)));
  const std::string key(trim(dotted_key.substr(dot + 1)));
  check_key(section, key, "override");
  entries_[section][key] = std::move(value);
}

void ConfigDocument::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    fail(ErrorCode::kConfig, fmt::format("override '{}' must look like key=value", assignment));
  }
  set(assignment.substr(0, eq), std::string(trim(assignment.substr(eq + 1))));
}

void ConfigDocument::merge(const ConfigDocument& other) {
  for (const auto& [section, keys] : other.entries_) {
    for (const auto& [key, value] : keys) entries_[section][key] = value;
  }
  if (!other.base_dir.empty()) base_dir = other.base_dir;
}

std::optional<std::string> ConfigDocument::get(const std::string& section,
                                               const std::string& key) const {
  const auto s = entries_.find(section);
  if (s == entries_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string ConfigDocument::to_text() const {
  std::string out;
  for (const auto& [section, keys] : entries_) {
    out += fmt::format("[{}]\n", section);
    for (const auto& [key, value] : keys) out += fmt::format("{} = {}\n", key, value);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

class Reader {
 public:
  explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

  std::optional<std::string> raw(const char* section, const char* key) const {
    return doc_.get(section, key);
  }
  std::string name(const char* section, const char* key) const {
    return fmt::format("{}.{}", section, key);
  }

  template <class T, class Parse>
  void read(const char* section, const char* key, T& target, Parse parse) const {
    if (auto v = raw(section, key)) target = static_cast<T>(parse(*v, name(section, key)));
  }
  void read_double(const char* s, const char* k, double& t) const { read(s, k, t, parse_double); }
  template <class T>
  void read_int(const char* s, const char* k, T& t) const { read(s, k, t, parse_int); }
  void read_uint(const char* s, const char* k, std::uint64_t& t) const { read(s, k, t, parse_uint); }
  std::vector<double> list(const char* s, const char* k) const {
    auto v = raw(s, k);
    return v ? parse_double_list(*v, name(s, k)) : std::vector<double>{};
  }
  std::filesystem::path file(const char* s, const char* k) const {
    auto v = raw(s, k);
    if (!v) fail(ErrorCode::kConfig, name(s, k) + " is required for tabulated input");
    std::filesystem::path p = unquote(*v);
    return p.is_relative() && !doc_.base_dir.empty() ? doc_.base_dir / p : p;
  }

 private:
  const ConfigDocument& doc_;
};

Vec to_vec(const std::vector<double>& values, int dim, const std::string& what) {
  if (static_cast<int>(values.size()) != dim) {
    fail(ErrorCode::kConfig, fmt::format("{} needs {} components", what, dim));
  }
  Vec v{0.0, 0.0, 0.0};
  std::copy(values.begin(), values.end(), v.begin());
  return v;
}

}  // namespace

SimConfig build_config(const ConfigDocument& doc) {
  const Reader r(doc);
  SimConfig c;
  r.read_int("sim", "d", c.dim);
  if (c.dim != 2 && c.dim != 3) {
    fail(ErrorCode::kUnsupportedDimension, fmt::format("sim.d = {} not in {{2, 3}}", c.dim));
  }
  r.read_int("sim", "n", c.particle_count);
  r.read_double("sim", "eps", c.diameter);
  r.read_double("sim", "dt", c.dt);
  r.read_double("sim", "t_final", c.t_final);
  r.read_int("sim", "realizations", c.realizations);
  r.read_uint("sim", "seed", c.seed);

  c.domain.dim = c.dim;
  if (r.raw("domain", "lo")) c.domain.lo = to_vec(r.list("domain", "lo"), c.dim, "domain.lo");
  if (r.raw("domain", "hi")) c.domain.hi = to_vec(r.list("domain", "hi"), c.dim, "domain.hi");
  for (int k = c.dim; k < 3; ++k) c.domain.lo[k] = c.domain.hi[k] = 0.0;

  const std::string potential = unquote(r.raw("potential", "kind").value_or("zero"));
  if (potential == "zero") {
    c.potential = ZeroPotential{};
  } else if (potential == "gaussian_sum") {
    const auto amps = r.list("potential", "amplitudes");
    const auto widths = r.list("potential", "widths");
    if (amps.size() != widths.size()) {
      fail(ErrorCode::kConfig, "potential.amplitudes and potential.widths differ in length");
    }
    GaussianSumPotential g;
    for (std::size_t i = 0; i < amps.size(); ++i) g.terms.push_back({amps[i], widths[i]});
    c.potential = g;
  } else if (potential == "tabulated") {
    c.potential = TabulatedPotential{read_field(r.file("potential", "file"))};
  } else {
    fail(ErrorCode::kConfig, fmt::format("unknown potential.kind '{}'", potential));
  }

  const std::string init = unquote(r.raw("init", "kind").value_or("uniform"));
  if (init == "uniform") {
    c.init = UniformInit{};
  } else if (init == "gaussian") {
    TruncatedGaussianInit g;
    if (r.raw("init", "mean")) g.mean = to_vec(r.list("init", "mean"), c.dim, "init.mean");
    r.read_double("init", "sigma", g.sigma);
    c.init = g;
  } else if (init == "tabulated") {
    c.init = TabulatedDensityInit{read_field(r.file("init", "file"))};
  } else {
    fail(ErrorCode::kConfig, fmt::format("unknown init.kind '{}'", init));
  }

  r.read_int("grid", "cells", c.grid_cells);
  if (auto times = r.raw("output", "sample_times")) {
    c.sample_times = parse_double_list(*times, "output.sample_times");
  }
  std::uint64_t traj = 0;
  r.read_uint("output", "trajectory_realizations", traj);
  c.bd.trajectory_realizations = static_cast<std::size_t>(traj);

  r.read_int("bd", "max_sweeps", c.bd.max_sweeps);
  r.read_int("bd", "check_interval", c.bd.check_interval);

  r.read_uint("mh", "steps", c.mh.steps);
  r.read_int("mh", "burn_in", c.mh.burn_in);
  r.read_int("mh", "thin", c.mh.thin);
  r.read_double("mh", "proposal_scale", c.mh.proposal_scale);
  r.read_uint("mh", "refresh_interval", c.mh.refresh_interval);

  r.read_double("pde", "safety_factor", c.pde.safety_factor);
  if (auto drift = r.raw("pde", "drift")) {
    const std::string scheme = unquote(*drift);
    if (scheme == "entropic") {
      c.pde.drift = DriftScheme::kEntropicMean;
    } else if (scheme == "upwind") {
      c.pde.drift = DriftScheme::kUpwind;
    } else {
      fail(ErrorCode::kConfig, fmt::format("unknown pde.drift '{}'", scheme));
    }
  }

  if (auto a = r.raw("compare", "source_a")) c.compare_source_a = unquote(*a);
  if (auto b = r.raw("compare", "source_b")) c.compare_source_b = unquote(*b);
  r.read_int("compare", "cells", c.compare_cells);

  validate(c);
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  return build_config(ConfigDocument::load(path));
}

}  // namespace cdiff
