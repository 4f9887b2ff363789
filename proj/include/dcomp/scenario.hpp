#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dcomp/constants.hpp"
#include "dcomp/physics.hpp"
#include "dcomp/waveform.hpp"

namespace dcomp {

inline constexpr std::string_view kToolName = "dcomp";
inline constexpr std::string_view kToolVersion = "1.0.0";

enum class ShifterKind { null, ideal, rc };

struct BeamConfig {
  double v0 = 1722.6;          // beam.v0_m_s
  double sigma_over_v0 = 0.04; // beam.sigma_over_v0
  double trunc_k = 5.0;        // beam.trunc_k

  VelocityDistribution distribution() const { return VelocityDistribution::from_ratio(v0, sigma_over_v0, trunc_k); }
  bool operator==(const BeamConfig&) const = default;
};

struct GeometryConfig {
  double l_shifters = 1.0;                       // geometry.l_shifters_m
  double l_g = 0.66;                             // geometry.l_g_m
  double k_g = kDefaultGratingWavevector;        // geometry.k_g_rad_m

  InterferometerGeometry geometry() const { return {l_shifters, l_g, k_g}; }
  bool operator==(const GeometryConfig&) const = default;
};

struct InteractionConfig {
  double d = 2.0e-3;                     // interaction.d_m
  double l_int = 0.1;                    // interaction.l_int_m
  double alpha = kSodiumPolarizability;  // interaction.alpha_si
  double voltage = 0.0;                  // interaction.v_volt

  InteractionRegion region() const { return {voltage, d, l_int, alpha}; }
  bool operator==(const InteractionConfig&) const = default;
};

struct ShifterConfig {
  ShifterKind kind = ShifterKind::ideal;  // shifters.kind
  double f = 40000.0;                     // shifters.f_hz
  double gamma = 0.83 * kPi;              // shifters.gamma_rad
  std::optional<double> rc;               // shifters.rc_s; unset means 1/(2.4 f)
  double duty = 0.9;                      // shifters.duty
  double offset = 0.0;                    // shifters.offset_s, start delay of the second ramp
  double peak_scale = 1.0;                // shifters.peak_scale, both ramp maxima
  double asymmetry = 0.0;                 // shifters.asymmetry, extra relative peak of the second ramp
  bool correct_asymmetry = true;          // shifters.correct_asymmetry
  // Charged-cylinder phase shifter.
  double cyl_radius = 0.5e-3;             // shifters.cyl_radius_m
  double cyl_ground = 1.5e-3;             // shifters.cyl_ground_m
  double path_separation = 50e-6;         // shifters.path_sep_m
  double path_distance = 1.0e-3;          // shifters.path_dist_m
  double cyl_voltage = 2000.0;            // shifters.cyl_volt

  double rc_at(double frequency) const;
  /// The configured pair at ramp frequency `frequency`; nullopt for a null
  /// kind or f = 0.
  std::optional<ShifterPair> pair_at(double frequency) const;
  std::optional<ShifterPair> pair() const { return pair_at(f); }
  ShifterGeometry cylinder() const { return {cyl_radius, cyl_ground, path_separation, path_distance}; }
  bool operator==(const ShifterConfig&) const = default;
};

struct DetectionConfig {
  double dwell = 0.1;        // detection.dwell_s, per grating position
  double flux = 211.6;       // detection.flux_hz, mean rate N
  double contrast0 = 0.2;    // detection.contrast0, A / N
  std::size_t n_z = 20;      // detection.n_z, positions per fringe period
  std::uint64_t seed = 1;    // detection.seed
  bool noise = true;         // detection.noise

  bool operator==(const DetectionConfig&) const = default;
};

struct ContrastSweepConfig {
  std::vector<double> f_list{0.0, 17000.0, 40000.0};  // sweep.f_list_hz
  double phi_min = -100.0;                            // sweep.phi_min_rad
  double phi_max = 200.0;                             // sweep.phi_max_rad
  double phi_step = 0.25;                             // sweep.phi_step_rad
  int dispersion_n = -1;                              // sweep.dispersion_n

  bool operator==(const ContrastSweepConfig&) const = default;
};

struct PolarizabilityConfig {
  std::size_t n_points = 14;         // polarizability.n_points
  std::size_t window = 10;           // polarizability.window
  double phase_step = 1.0;           // polarizability.phase_step_rad
  std::optional<double> v2_center;   // polarizability.v2_center_v2; unset means predicted from alpha_si

  bool operator==(const PolarizabilityConfig&) const = default;
};

struct MonteCarloConfig {
  std::size_t n_atoms = 1000000;     // mc.n_atoms
  std::optional<double> phi_int;     // mc.phi_int_rad; unset means the revival point (25 rad at f = 0)
  double l_shifters_scale = 1.0;     // mc.l_shifters_scale, fault injection for the Monte Carlo engine
  std::size_t runs = 1;              // mc.runs, seeds seed .. seed + runs - 1

  bool operator==(const MonteCarloConfig&) const = default;
};

struct GyroConfig {
  std::vector<double> times{0.0, 10.0};           // gyro.t_s
  std::vector<double> rates{7.29e-5, 7.29e-5};    // gyro.omega_rad_s
  double interval = 1e-3;                         // gyro.interval_s
  std::optional<double> gain;                     // gyro.gain_hz_per_rad_s; unset means 0.5 / (interval * slope)
  double f0 = 0.0;                                // gyro.f0_hz
  bool noise = false;                             // gyro.noise

  bool operator==(const GyroConfig&) const = default;
};

struct Scenario {
  std::string experiment;
  BeamConfig beam;
  GeometryConfig geometry;
  InteractionConfig interaction;
  ShifterConfig shifters;
  DetectionConfig detection;
  ContrastSweepConfig sweep;
  PolarizabilityConfig polarizability;
  MonteCarloConfig mc;
  GyroConfig gyro;

  bool operator==(const Scenario&) const = default;
};

/// Names accepted by the `experiment` key.
const std::vector<std::string>& known_experiments();

/// Throws ConfigError naming the offending key.
void validate(const Scenario& scenario);

/// Parses `key = value` lines (`#` starts a comment). Every key except
/// `experiment` is optional; the result is validated.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Applies one `key=value` override (as given to --set) without validating.
void apply_override(Scenario& scenario, std::string_view assignment);

/// Every key with its resolved value, in schema order.
std::vector<std::pair<std::string, std::string>> scenario_entries(const Scenario& scenario);

/// Text that parse_scenario reads back into an equal Scenario.
std::string save_scenario(const Scenario& scenario);

std::string to_string(ShifterKind kind);

}  // namespace dcomp
