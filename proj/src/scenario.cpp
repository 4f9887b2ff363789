#include "dcomp/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dcomp/errors.hpp"

namespace dcomp {

double ShifterConfig::rc_at(double frequency) const {
  if (rc) return *rc;
  return frequency > 0.0 ? 1.0 / (2.4 * frequency) : 0.0;
}

std::optional<ShifterPair> ShifterConfig::pair_at(double frequency) const {
  if (kind == ShifterKind::null || frequency == 0.0) return std::nullopt;
  const double second_scale = peak_scale * (1.0 + asymmetry);
  if (kind == ShifterKind::ideal) {
    return ShifterPair{Waveform::ideal(frequency, +1, kTwoPi * peak_scale),
                       Waveform::ideal(frequency, -1, kTwoPi * second_scale), offset};
  }
  const double tau = rc_at(frequency);
  return ShifterPair{Waveform::rc(frequency, duty, gamma * peak_scale, tau, +1),
                     Waveform::rc(frequency, duty, gamma * second_scale, tau, -1), offset};
}

std::string to_string(ShifterKind kind) {
  switch (kind) {
    case ShifterKind::null: return "null";
    case ShifterKind::ideal: return "ideal";
    case ShifterKind::rc: return "rc";
  }
  return "ideal";
}

const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names{"contrast-sweep", "fringe-scan", "polarizability", "mc-validate",
                                              "gyro"};
  return names;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return value;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
  Int value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::optional<double> parse_auto(const std::string& key, const std::string& text) {
  if (text == "auto") return std::nullopt;
  return parse_double(key, text);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

std::string show(double v) { return fmt::format("{}", v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::optional<double>& v) { return v ? show(*v) : "auto"; }
std::string show(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + show(v[i]);
  return out;
}

struct Key {
  std::string name;
  std::function<void(Scenario&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

#define DCOMP_DOUBLE(name, member) \
  Key { name, [](Scenario& s, const std::string& v) { s.member = parse_double(name, v); }, \
        [](const Scenario& s) { return show(s.member); } }
#define DCOMP_AUTO(name, member) \
  Key { name, [](Scenario& s, const std::string& v) { s.member = parse_auto(name, v); }, \
        [](const Scenario& s) { return show(s.member); } }
#define DCOMP_BOOL(name, member) \
  Key { name, [](Scenario& s, const std::string& v) { s.member = parse_bool(name, v); }, \
        [](const Scenario& s) { return show(s.member); } }
#define DCOMP_LIST(name, member) \
  Key { name, [](Scenario& s, const std::string& v) { s.member = parse_list(name, v); }, \
        [](const Scenario& s) { return show(s.member); } }
#define DCOMP_INT(name, member, type) \
  Key { name, [](Scenario& s, const std::string& v) { s.member = parse_integer<type>(name, v); }, \
        [](const Scenario& s) { return std::to_string(s.member); } }

const std::vector<Key>& schema() {
  static const std::vector<Key> keys{
      Key{"experiment", [](Scenario& s, const std::string& v) { s.experiment = v; },
          [](const Scenario& s) { return s.experiment; }},
      DCOMP_DOUBLE("beam.v0_m_s", beam.v0),
      DCOMP_DOUBLE("beam.sigma_over_v0", beam.sigma_over_v0),
      DCOMP_DOUBLE("beam.trunc_k", beam.trunc_k),
      DCOMP_DOUBLE("geometry.l_shifters_m", geometry.l_shifters),
      DCOMP_DOUBLE("geometry.l_g_m", geometry.l_g),
      DCOMP_DOUBLE("geometry.k_g_rad_m", geometry.k_g),
      DCOMP_DOUBLE("interaction.d_m", interaction.d),
      DCOMP_DOUBLE("interaction.l_int_m", interaction.l_int),
      DCOMP_DOUBLE("interaction.alpha_si", interaction.alpha),
      DCOMP_DOUBLE("interaction.v_volt", interaction.voltage),
      Key{"shifters.kind",
          [](Scenario& s, const std::string& v) {
            if (v == "null") s.shifters.kind = ShifterKind::null;
            else if (v == "ideal") s.shifters.kind = ShifterKind::ideal;
            else if (v == "rc") s.shifters.kind = ShifterKind::rc;
            else throw ConfigError("shifters.kind", "expected null, ideal or rc, got '" + v + "'");
          },
          [](const Scenario& s) { return to_string(s.shifters.kind); }},
      DCOMP_DOUBLE("shifters.f_hz", shifters.f),
      DCOMP_DOUBLE("shifters.gamma_rad", shifters.gamma),
      DCOMP_AUTO("shifters.rc_s", shifters.rc),
      DCOMP_DOUBLE("shifters.duty", shifters.duty),
      DCOMP_DOUBLE("shifters.offset_s", shifters.offset),
      DCOMP_DOUBLE("shifters.peak_scale", shifters.peak_scale),
      DCOMP_DOUBLE("shifters.asymmetry", shifters.asymmetry),
      DCOMP_BOOL("shifters.correct_asymmetry", shifters.correct_asymmetry),
      DCOMP_DOUBLE("shifters.cyl_radius_m", shifters.cyl_radius),
      DCOMP_DOUBLE("shifters.cyl_ground_m", shifters.cyl_ground),
      DCOMP_DOUBLE("shifters.path_sep_m", shifters.path_separation),
      DCOMP_DOUBLE("shifters.path_dist_m", shifters.path_distance),
      DCOMP_DOUBLE("shifters.cyl_volt", shifters.cyl_voltage),
      DCOMP_DOUBLE("detection.dwell_s", detection.dwell),
      DCOMP_DOUBLE("detection.flux_hz", detection.flux),
      DCOMP_DOUBLE("detection.contrast0", detection.contrast0),
      DCOMP_INT("detection.n_z", detection.n_z, std::size_t),
      DCOMP_INT("detection.seed", detection.seed, std::uint64_t),
      DCOMP_BOOL("detection.noise", detection.noise),
      DCOMP_LIST("sweep.f_list_hz", sweep.f_list),
      DCOMP_DOUBLE("sweep.phi_min_rad", sweep.phi_min),
      DCOMP_DOUBLE("sweep.phi_max_rad", sweep.phi_max),
      DCOMP_DOUBLE("sweep.phi_step_rad", sweep.phi_step),
      DCOMP_INT("sweep.dispersion_n", sweep.dispersion_n, int),
      DCOMP_INT("polarizability.n_points", polarizability.n_points, std::size_t),
      DCOMP_INT("polarizability.window", polarizability.window, std::size_t),
      DCOMP_DOUBLE("polarizability.phase_step_rad", polarizability.phase_step),
      DCOMP_AUTO("polarizability.v2_center_v2", polarizability.v2_center),
      DCOMP_INT("mc.n_atoms", mc.n_atoms, std::size_t),
      DCOMP_AUTO("mc.phi_int_rad", mc.phi_int),
      DCOMP_DOUBLE("mc.l_shifters_scale", mc.l_shifters_scale),
      DCOMP_INT("mc.runs", mc.runs, std::size_t),
      DCOMP_LIST("gyro.t_s", gyro.times),
      DCOMP_LIST("gyro.omega_rad_s", gyro.rates),
      DCOMP_DOUBLE("gyro.interval_s", gyro.interval),
      DCOMP_AUTO("gyro.gain_hz_per_rad_s", gyro.gain),
      DCOMP_DOUBLE("gyro.f0_hz", gyro.f0),
      DCOMP_BOOL("gyro.noise", gyro.noise),
  };
  return keys;
}

#undef DCOMP_DOUBLE
#undef DCOMP_AUTO
#undef DCOMP_BOOL
#undef DCOMP_LIST
#undef DCOMP_INT

const Key& find_key(const std::string& name) {
  const auto& keys = schema();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == name; });
  if (it == keys.end()) throw ConfigError(name, "unknown key");
  return *it;
}

void require(bool ok, const char* key, const char* reason) {
  if (!ok) throw ConfigError(key, reason);
}

}  // namespace

void validate(const Scenario& s) {
  const auto& names = known_experiments();
  if (!s.experiment.empty() && std::find(names.begin(), names.end(), s.experiment) == names.end()) {
    throw ConfigError("experiment", "unknown experiment '" + s.experiment + "'");
  }
  require(s.beam.v0 > 0.0, "beam.v0_m_s", "must be > 0");
  require(s.beam.sigma_over_v0 > 0.0, "beam.sigma_over_v0", "must be > 0");
  require(s.beam.trunc_k >= 3.0, "beam.trunc_k", "must be >= 3");
  require(1.0 - s.beam.trunc_k * s.beam.sigma_over_v0 > 0.0, "beam.sigma_over_v0",
          "truncated support reaches v <= 0 (need trunc_k * sigma_over_v0 < 1)");

  require(s.geometry.l_shifters > 0.0, "geometry.l_shifters_m", "must be > 0");
  require(s.geometry.l_g > 0.0, "geometry.l_g_m", "must be > 0");
  require(s.geometry.k_g > 0.0, "geometry.k_g_rad_m", "must be > 0");

  require(s.interaction.d > 0.0, "interaction.d_m", "must be > 0");
  require(s.interaction.l_int > 0.0, "interaction.l_int_m", "must be > 0");
  require(s.interaction.alpha > 0.0, "interaction.alpha_si", "must be > 0");
  require(s.interaction.voltage >= 0.0, "interaction.v_volt", "must be >= 0");

  require(s.shifters.f >= 0.0, "shifters.f_hz", "must be >= 0");
  require(s.shifters.gamma > 0.0, "shifters.gamma_rad", "must be > 0");
  require(!s.shifters.rc || *s.shifters.rc > 0.0, "shifters.rc_s", "must be > 0");
  require(s.shifters.duty > 0.0 && s.shifters.duty < 1.0, "shifters.duty", "must be in (0, 1)");
  require(std::isfinite(s.shifters.offset), "shifters.offset_s", "must be finite");
  require(s.shifters.peak_scale > 0.0, "shifters.peak_scale", "must be > 0");
  require(s.shifters.asymmetry > -1.0, "shifters.asymmetry", "must be > -1");
  require(s.shifters.cyl_radius > 0.0 && s.shifters.cyl_radius < s.shifters.cyl_ground, "shifters.cyl_radius_m",
          "need 0 < cyl_radius_m < cyl_ground_m");
  require(s.shifters.path_separation > 0.0, "shifters.path_sep_m", "must be > 0");
  require(s.shifters.path_distance > 0.0, "shifters.path_dist_m", "must be > 0");
  require(s.shifters.cyl_voltage >= 0.0, "shifters.cyl_volt", "must be >= 0");

  require(s.detection.dwell > 0.0, "detection.dwell_s", "must be > 0");
  require(s.detection.flux > 0.0, "detection.flux_hz", "must be > 0");
  require(s.detection.contrast0 > 0.0 && s.detection.contrast0 <= 1.0, "detection.contrast0", "must be in (0, 1]");
  require(s.detection.n_z >= 8, "detection.n_z", "must be >= 8");

  require(!s.sweep.f_list.empty(), "sweep.f_list_hz", "must not be empty");
  require(std::all_of(s.sweep.f_list.begin(), s.sweep.f_list.end(), [](double f) { return f >= 0.0; }),
          "sweep.f_list_hz", "frequencies must be >= 0");
  require(s.sweep.phi_step > 0.0, "sweep.phi_step_rad", "must be > 0");
  require(s.sweep.phi_max > s.sweep.phi_min, "sweep.phi_max_rad", "must exceed sweep.phi_min_rad");
  require(s.sweep.dispersion_n != 0, "sweep.dispersion_n", "must be nonzero");

  require(s.polarizability.window >= 3, "polarizability.window", "must be >= 3");
  require(s.polarizability.n_points >= s.polarizability.window, "polarizability.n_points",
          "must be >= polarizability.window");
  require(s.polarizability.phase_step > 0.0 && s.polarizability.phase_step <= kPi / 2.0,
          "polarizability.phase_step_rad", "must be in (0, pi/2]");
  require(!s.polarizability.v2_center || *s.polarizability.v2_center > 0.0, "polarizability.v2_center_v2",
          "must be > 0");

  require(s.mc.n_atoms >= 10000, "mc.n_atoms", "must be >= 10000");
  require(s.mc.l_shifters_scale > 0.0, "mc.l_shifters_scale", "must be > 0");
  require(s.mc.runs >= 1, "mc.runs", "must be >= 1");

  require(s.gyro.times.size() >= 2, "gyro.t_s", "need at least two samples");
  require(s.gyro.times.size() == s.gyro.rates.size(), "gyro.omega_rad_s", "must have as many samples as gyro.t_s");
  require(std::adjacent_find(s.gyro.times.begin(), s.gyro.times.end(), std::greater_equal<>()) == s.gyro.times.end(),
          "gyro.t_s", "must be strictly increasing");
  require(s.gyro.interval > 0.0, "gyro.interval_s", "must be > 0");
  require(!s.gyro.gain || *s.gyro.gain > 0.0, "gyro.gain_hz_per_rad_s", "must be > 0");
  require(std::isfinite(s.gyro.f0), "gyro.f0_hz", "must be finite");
}

void apply_override(Scenario& scenario, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("", "expected key=value, got '" + std::string(assignment) + "'");
  }
  const auto key = trim(assignment.substr(0, eq));
  const auto value = trim(assignment.substr(eq + 1));
  find_key(key).set(scenario, value);
}

Scenario parse_scenario(std::string_view text) {
  Scenario scenario;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", fmt::format("line {}: expected key = value", number));
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    find_key(key).set(scenario, trim(std::string_view(body).substr(eq + 1)));
  }
  if (!seen.contains("experiment")) throw ConfigError("experiment", "missing required key");
  validate(scenario);
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::vector<std::pair<std::string, std::string>> scenario_entries(const Scenario& scenario) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& key : schema()) out.emplace_back(key.name, key.get(scenario));
  return out;
}

std::string save_scenario(const Scenario& scenario) {
  std::string out;
  for (const auto& [key, value] : scenario_entries(scenario)) out += key + " = " + value + "\n";
  return out;
}

}  // namespace dcomp
