#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcomp/scenario.hpp"

namespace dcomp {

/// Process exit status of the command-line runner.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  config = 2,
  numerical = 3,
  validation = 4,
};

/// Files produced by one experiment, in the order they are written.
struct ExperimentOutput {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  bool passed = true;  // false when a validation experiment fails
};

/// Comment block that opens every output file: tool version, seed and every
/// resolved scenario key.
std::string output_header(const Scenario& scenario);

struct ContrastPoint {
  double frequency = 0.0;
  double phi_int = 0.0;   // phi_int(v0)
  double contrast = 0.0;
  double phase = 0.0;     // phi', unwrapped along the sweep
};

/// C' and phi' against phi_int(v0) for a v^n interaction (n from
/// sweep.dispersion_n) with the configured shifters running at `frequency`.
std::vector<ContrastPoint> contrast_curve(const Scenario& scenario, double frequency,
                                          std::span<const double> phi_values);

/// min, min + step, ... up to max (inclusive within rounding).
std::vector<double> stepped_range(double min, double max, double step);

struct CurvePeak {
  double phi_int = 0.0;
  double contrast = 0.0;
};

/// Largest sampled contrast refined by a parabola through its neighbours.
CurvePeak locate_peak(std::span<const ContrastPoint> curve);

/// Full width at half of the sampled maximum, by linear interpolation; NaN
/// when either half-maximum crossing lies outside the sweep.
double curve_fwhm(std::span<const ContrastPoint> curve);

ExperimentOutput run_contrast_sweep(const Scenario& scenario);
ExperimentOutput run_fringe_scan(const Scenario& scenario);
ExperimentOutput run_polarizability(const Scenario& scenario);
ExperimentOutput run_mc_validate(const Scenario& scenario);
ExperimentOutput run_gyro(const Scenario& scenario);

/// Dispatches on scenario.experiment.
ExperimentOutput run_experiment(const Scenario& scenario);

/// Writes every file of `output` into `dir`, creating it if needed.
void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir);

}  // namespace dcomp
