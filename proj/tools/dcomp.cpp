// Scenario runner: dcomp <experiment> --config FILE --out DIR [--set key=value ...]
#include <CLI11.hpp>

#include <fmt/format.h>

#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcomp/errors.hpp"
#include "dcomp/experiments.hpp"
#include "dcomp/scenario.hpp"

namespace {

int code(dcomp::ExitCode c) { return static_cast<int>(c); }

int run(const std::string& experiment, const std::string& config, const std::string& out,
        const std::vector<std::string>& overrides) {
  auto scenario = dcomp::load_scenario(config);
  for (const auto& assignment : overrides) dcomp::apply_override(scenario, assignment);
  if (scenario.experiment != experiment) {
    throw dcomp::ConfigError("experiment", fmt::format("config names '{}' but the subcommand is '{}'",
                                                       scenario.experiment, experiment));
  }
  dcomp::validate(scenario);
  const auto output = dcomp::run_experiment(scenario);
  dcomp::write_outputs(output, out);
  for (const auto& [name, content] : output.files) fmt::print("wrote {}/{}\n", out, name);
  if (!output.passed) {
    fmt::print(stderr, "validation failed\n");
    return code(dcomp::ExitCode::validation);
  }
  return code(dcomp::ExitCode::ok);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispersion-compensated atom interferometer simulator"};
  app.set_version_flag("--version", fmt::format("{} {}", dcomp::kToolName, dcomp::kToolVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  for (const auto& name : dcomp::known_experiments()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config, "scenario file (key = value lines)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--set", overrides, "override one key, key=value (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : code(dcomp::ExitCode::config);
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    return run(experiment, config, out, overrides);
  } catch (const dcomp::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return code(dcomp::ExitCode::config);
  } catch (const dcomp::NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return code(dcomp::ExitCode::numerical);
  } catch (const dcomp::FitError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return code(dcomp::ExitCode::numerical);
  } catch (const std::range_error& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return code(dcomp::ExitCode::numerical);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return code(dcomp::ExitCode::failure);
  }
}
