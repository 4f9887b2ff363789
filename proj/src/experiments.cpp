#include "dcomp/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dcomp/errors.hpp"
#include "dcomp/estimate.hpp"
#include "dcomp/fringe.hpp"
#include "dcomp/gyro.hpp"
#include "dcomp/physics.hpp"
#include "dcomp/waveform.hpp"

namespace dcomp {
namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

// key=value lines for summary files.
class Summary {
 public:
  void add(const std::string& key, const std::string& value) { text_ += key + "=" + value + "\n"; }
  void add(const std::string& key, double value) { add(key, num(value)); }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

double default_mc_phase(const Scenario& s) {
  if (s.mc.phi_int) return *s.mc.phi_int;
  if (s.shifters.pair()) return kTwoPi * s.shifters.f * s.geometry.l_shifters / s.beam.v0;
  return optimal_uncompensated_phase(-1, s.beam.v0, s.beam.v0 * s.beam.sigma_over_v0);
}

}  // namespace

std::string output_header(const Scenario& s) {
  std::string out = fmt::format("# tool = {} {}\n# seed = {}\n", kToolName, kToolVersion, s.detection.seed);
  for (const auto& [key, value] : scenario_entries(s)) out += "# " + key + " = " + value + "\n";
  return out;
}

std::vector<double> stepped_range(double min, double max, double step) {
  if (!(step > 0.0) || !(max >= min)) throw DomainError("stepped_range: need step > 0 and max >= min");
  const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = min + static_cast<double>(i) * step;
  return out;
}

std::vector<ContrastPoint> contrast_curve(const Scenario& s, double frequency, std::span<const double> phi_values) {
  validate(s);
  const auto dist = s.beam.distribution();
  const auto geom = s.geometry.geometry();
  const auto pair = s.shifters.pair_at(frequency);
  const FringeIntegrator integrator(dist, geom, pair);
  const int n = s.sweep.dispersion_n;
  const double counter_f = pair ? frequency : 0.0;

  std::vector<ContrastPoint> curve;
  curve.reserve(phi_values.size());
  for (std::size_t i = 0; i < phi_values.size(); ++i) {
    const double phi0 = phi_values[i];
    const double v0 = dist.v0;
    const PhaseProfile profile = [phi0, v0, n](double v) { return power_law_phase(v, phi0, v0, n); };
    const double reference =
        i == 0 ? gaussian_envelope(phi0, dist.ratio(), counter_f, geom.shifter_separation, v0).phase
               : curve.back().phase;
    const auto amp = integrator.evaluate(profile, reference);
    curve.push_back({frequency, phi0, amp.contrast, amp.phase});
  }
  return curve;
}

CurvePeak locate_peak(std::span<const ContrastPoint> curve) {
  if (curve.empty()) throw DomainError("locate_peak: empty curve");
  const auto it = std::max_element(curve.begin(), curve.end(),
                                   [](const ContrastPoint& a, const ContrastPoint& b) { return a.contrast < b.contrast; });
  const auto i = static_cast<std::size_t>(it - curve.begin());
  CurvePeak peak{it->phi_int, it->contrast};
  if (i == 0 || i + 1 == curve.size()) return peak;
  const double y0 = curve[i - 1].contrast;
  const double y1 = curve[i].contrast;
  const double y2 = curve[i + 1].contrast;
  const double h = curve[i + 1].phi_int - curve[i].phi_int;
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom < 0.0) {
    const double shift = 0.5 * (y0 - y2) / denom;
    peak.phi_int = curve[i].phi_int + shift * h;
    peak.contrast = y1 - 0.25 * (y0 - y2) * shift;
  }
  return peak;
}

double curve_fwhm(std::span<const ContrastPoint> curve) {
  if (curve.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const auto it = std::max_element(curve.begin(), curve.end(),
                                   [](const ContrastPoint& a, const ContrastPoint& b) { return a.contrast < b.contrast; });
  const auto peak = static_cast<std::size_t>(it - curve.begin());
  const double half = 0.5 * it->contrast;
  auto cross = [&](std::size_t a, std::size_t b) {
    const double t = (half - curve[a].contrast) / (curve[b].contrast - curve[a].contrast);
    return curve[a].phi_int + t * (curve[b].phi_int - curve[a].phi_int);
  };
  double left = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = peak; i > 0; --i) {
    if (curve[i - 1].contrast < half) {
      left = cross(i - 1, i);
      break;
    }
  }
  double right = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = peak; i + 1 < curve.size(); ++i) {
    if (curve[i + 1].contrast < half) {
      right = cross(i, i + 1);
      break;
    }
  }
  return right - left;
}

ExperimentOutput run_contrast_sweep(const Scenario& s) {
  const auto phis = stepped_range(s.sweep.phi_min, s.sweep.phi_max, s.sweep.phi_step);
  std::string csv = output_header(s) + "f_hz,phi_int_rad,contrast,phi_prime_rad\n";
  Summary summary;
  for (double f : s.sweep.f_list) {
    const auto curve = contrast_curve(s, f, phis);
    for (const auto& p : curve) csv += fmt::format("{},{},{},{}\n", num(p.frequency), num(p.phi_int), num(p.contrast), num(p.phase));
    const auto peak = locate_peak(curve);
    const double expected = s.shifters.pair_at(f) ? kTwoPi * f * s.geometry.l_shifters / s.beam.v0 : 0.0;
    const std::string tag = fmt::format("f{}", num(f));
    summary.add(tag + ".peak_phi_int_rad", peak.phi_int);
    summary.add(tag + ".peak_contrast", peak.contrast);
    summary.add(tag + ".expected_peak_rad", expected);
    // Largest contrast within half an envelope width of the expected revival;
    // RC ramps leave a second, unshifted peak near zero.
    const double half_width = 0.5 / s.beam.sigma_over_v0;
    const auto lo = std::find_if(curve.begin(), curve.end(),
                                 [&](const ContrastPoint& p) { return p.phi_int >= expected - half_width; });
    const auto hi = std::find_if(lo, curve.end(), [&](const ContrastPoint& p) { return p.phi_int > expected + half_width; });
    if (hi - lo >= 3) {
      const auto revival = locate_peak(std::span<const ContrastPoint>(&*lo, static_cast<std::size_t>(hi - lo)));
      if (revival.phi_int > lo->phi_int && revival.phi_int < (hi - 1)->phi_int) {
        summary.add(tag + ".revival_phi_int_rad", revival.phi_int);
        summary.add(tag + ".revival_contrast", revival.contrast);
      }
    }
    summary.add(tag + ".fwhm_rad", curve_fwhm(curve));
  }
  if (s.shifters.kind == ShifterKind::rc) {
    const double f = s.shifters.f;
    if (f > 0.0) {
      const auto quoted = Waveform::rc(f, s.shifters.duty, s.shifters.gamma, s.shifters.rc_at(f), +1);
      const auto literal = Waveform::rc(f, s.shifters.duty, s.shifters.gamma, 2.4 / f, +1);
      const auto best = optimize_rc_ramp(f, s.shifters.duty);
      summary.add("rc.c1_configured", std::abs(first_harmonic(quoted)));
      summary.add("rc.c1_rc_times_f_2.4", std::abs(first_harmonic(literal)));
      summary.add("rc.optimum_gamma_rad", best.gamma);
      summary.add("rc.optimum_rc_s", best.rc);
      summary.add("rc.optimum_c1", best.first_harmonic);
    }
  }
  ExperimentOutput out;
  out.files.emplace_back("contrast_sweep.csv", csv);
  out.files.emplace_back("summary.txt", output_header(s) + summary.text());
  return out;
}

ExperimentOutput run_fringe_scan(const Scenario& s) {
  validate(s);
  const auto dist = s.beam.distribution();
  const auto geom = s.geometry.geometry();
  const auto pair = s.shifters.pair();
  const double omega = s.interaction.region().angular_frequency();
  const double l_int = s.interaction.l_int;
  const PhaseProfile profile = [omega, l_int](double v) { return omega * l_int / v; };
  const double predicted = gaussian_envelope(omega * l_int / dist.v0, dist.ratio(), pair ? s.shifters.f : 0.0,
                                             geom.shifter_separation, dist.v0)
                               .phase;
  const auto amp = complex_fringe_amplitude(profile, pair, dist, geom, predicted);
  const FringeObservable obs{s.detection.flux, s.detection.contrast0 * s.detection.flux, amp.contrast, amp.phase};
  const auto z = fringe_positions(geom.grating_wavevector, s.detection.n_z);
  const auto scan = synthesize_scan(obs, z, geom.grating_wavevector, s.detection.dwell, s.detection.seed,
                                    s.detection.noise);
  const auto fit = fit_fringe(scan, geom.grating_wavevector, amp.phase);

  std::ostringstream csv;
  csv << output_header(s);
  write_scan_csv(csv, scan);

  Summary summary;
  summary.add("phi_int_v0_rad", omega * l_int / dist.v0);
  summary.add("true_contrast", amp.contrast);
  summary.add("true_phase_rad", amp.phase);
  summary.add("fit_mean_rate_hz", fit.mean_rate);
  summary.add("fit_amplitude_hz", fit.amplitude);
  summary.add("fit_contrast", fit.amplitude / (s.detection.contrast0 * fit.mean_rate));
  summary.add("fit_phase_rad", fit.phase);
  summary.add("fit_phase_sigma_rad", fit.phase_sigma);
  summary.add("cylinder_phase_v0_rad",
              cylinder_phase(s.shifters.cylinder(), s.shifters.cyl_voltage, dist.v0, s.interaction.alpha));

  ExperimentOutput out;
  out.files.emplace_back("scan.csv", csv.str());
  out.files.emplace_back("summary.txt", output_header(s) + summary.text());
  return out;
}

ExperimentOutput run_polarizability(const Scenario& s) {
  validate(s);
  if (!(s.shifters.f > 0.0) || s.shifters.kind == ShifterKind::null) {
    throw ConfigError("shifters.f_hz", "rephasing pipeline requires f > 0 and active shifters");
  }
  const auto run = estimate_polarizability(s);
  std::string csv = output_header(s) + "V2_volt2,phi_rad,dphi_rad,contrast\n";
  for (const auto& p : run.points) {
    csv += fmt::format("{},{},{},{}\n", num(p.v_squared), num(p.phase), num(p.phase_sigma), num(p.contrast));
  }
  const auto& r = run.result;
  Summary summary;
  summary.add("alpha_true_si", s.interaction.alpha);
  summary.add("alpha_si", r.alpha);
  summary.add("alpha_rel_error", r.alpha / s.interaction.alpha - 1.0);
  summary.add("frac_uncertainty", r.frac_uncertainty);
  summary.add("v2_reph_v2", r.v2_reph);
  summary.add("v2_reph_sigma_v2", r.v2_reph_sigma);
  summary.add("dphi_rad", r.phase_sigma);
  summary.add("phi_int_v0_rad", r.phi_int_v0);
  summary.add("phi_error_rad", r.phi_error);
  summary.add("fit_slope_rad_per_v2", run.crossing.slope);
  summary.add("window_first", std::to_string(r.window_first));
  summary.add("window_count", std::to_string(r.window_count));

  ExperimentOutput out;
  out.files.emplace_back("sweep.csv", csv);
  out.files.emplace_back("summary.txt", output_header(s) + summary.text());
  return out;
}

ExperimentOutput run_mc_validate(const Scenario& s) {
  validate(s);
  const auto dist = s.beam.distribution();
  const auto geom = s.geometry.geometry();
  auto mc_geom = geom;
  mc_geom.shifter_separation *= s.mc.l_shifters_scale;
  const auto pair = s.shifters.pair();
  const double phi0 = default_mc_phase(s);
  const double v0 = dist.v0;
  const PhaseProfile profile = [phi0, v0](double v) { return phi0 * v0 / v; };
  const double predicted =
      gaussian_envelope(phi0, dist.ratio(), pair ? s.shifters.f : 0.0, geom.shifter_separation, v0).phase;
  const auto quad = complex_fringe_amplitude(profile, pair, dist, geom, predicted);

  std::string csv = output_header(s) +
                    "run,seed,contrast_quad,contrast_mc,contrast_se,z_contrast,phase_quad_rad,phase_mc_rad,"
                    "phase_se_rad,z_phase\n";
  bool pass = true;
  double worst = 0.0;
  for (std::size_t r = 0; r < s.mc.runs; ++r) {
    const std::uint64_t seed = s.detection.seed + r;
    const auto mc = monte_carlo_amplitude(profile, pair, dist, mc_geom, s.mc.n_atoms, seed, quad.phase);
    // The floor covers the degenerate case where every atom carries the same phase.
    const double err_c = std::hypot(mc.contrast_se, quad.error_estimate, 1e-12);
    const double err_p = std::hypot(mc.phase_se, quad.error_estimate / std::max(quad.contrast, 1e-300), 1e-12);
    const double z_c = (mc.contrast - quad.contrast) / err_c;
    const double z_p = (mc.phase - quad.phase) / err_p;
    worst = std::max({worst, std::abs(z_c), std::abs(z_p)});
    if (!(std::abs(z_c) < 3.0 && std::abs(z_p) < 3.0)) pass = false;
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r, seed, num(quad.contrast), num(mc.contrast),
                       num(mc.contrast_se), num(z_c), num(quad.phase), num(mc.phase), num(mc.phase_se), num(z_p));
  }
  Summary summary;
  summary.add("phi_int_v0_rad", phi0);
  summary.add("n_atoms", std::to_string(s.mc.n_atoms));
  summary.add("runs", std::to_string(s.mc.runs));
  summary.add("max_abs_z", worst);
  summary.add("result", pass ? "PASS" : "FAIL");

  ExperimentOutput out;
  out.files.emplace_back("mc_validate.csv", csv);
  out.files.emplace_back("summary.txt", output_header(s) + summary.text());
  out.passed = pass;
  return out;
}

ExperimentOutput run_gyro(const Scenario& s) {
  validate(s);
  const RotationProfile profile{s.gyro.times, s.gyro.rates};
  ServoState state;
  state.frequency = s.gyro.f0;
  state.interval = s.gyro.interval;
  state.gain = s.gyro.gain ? *s.gyro.gain : default_servo_gain(s.gyro.interval, s.beam.v0, s.geometry.l_shifters);
  const auto samples = run_servo(profile, state, s);

  std::string csv = output_header(s) + "t_s,omega_in_rad_s,f_hz,residual_rad,theta_rad\n";
  for (const auto& p : samples) {
    csv += fmt::format("{},{},{},{},{}\n", num(p.t), num(p.omega), num(p.frequency), num(p.residual), num(p.angle));
  }
  const auto& last = samples.back();
  const auto geom = s.geometry.geometry();
  const double expected_f = rotation_to_frequency(last.omega, geom.grating_wavevector, geom.grating_separation,
                                                  geom.shifter_separation);
  const double true_angle = profile.integral(profile.start(), last.t);
  Summary summary;
  summary.add("gain_hz_per_rad_s", state.gain);
  summary.add("final_t_s", last.t);
  summary.add("final_f_hz", last.frequency);
  summary.add("expected_f_hz", expected_f);
  summary.add("final_residual_rad", last.residual);
  summary.add("theta_rad", last.angle);
  summary.add("theta_true_rad", true_angle);
  summary.add("theta_rel_error", true_angle != 0.0 ? last.angle / true_angle - 1.0 : last.angle);

  ExperimentOutput out;
  out.files.emplace_back("gyro.csv", csv);
  out.files.emplace_back("summary.txt", output_header(s) + summary.text());
  return out;
}

ExperimentOutput run_experiment(const Scenario& s) {
  if (s.experiment == "contrast-sweep") return run_contrast_sweep(s);
  if (s.experiment == "fringe-scan") return run_fringe_scan(s);
  if (s.experiment == "polarizability") return run_polarizability(s);
  if (s.experiment == "mc-validate") return run_mc_validate(s);
  if (s.experiment == "gyro") return run_gyro(s);
  throw ConfigError("experiment", "unknown experiment '" + s.experiment + "'");
}

void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : output.files) {
    std::ofstream file(dir / name, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + (dir / name).string());
    file << content;
  }
}

}  // namespace dcomp
