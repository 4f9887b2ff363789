#include "dcomp/estimate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcomp/errors.hpp"

namespace dcomp {

FringeFit fit_fringe(const DetectorScan& scan, double grating_wavevector, double phase_reference) {
  scan.validate(grating_wavevector);
  const auto n = static_cast<Eigen::Index>(scan.z.size());
  if (n < 8) throw FitError("fit_fringe: need at least 8 points");

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd counts(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phase = grating_wavevector * scan.z[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(phase);
    design(i, 2) = std::sin(phase);
    counts(i) = scan.counts[static_cast<std::size_t>(i)];
  }

  Eigen::Matrix3d normal;
  auto solve = [&](const Eigen::VectorXd& weights) -> Eigen::Vector3d {
    normal = design.transpose() * weights.asDiagonal() * design;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) throw FitError("fit_fringe: singular design matrix");
    return normal.ldlt().solve(design.transpose() * weights.cwiseProduct(counts));
  };

  Eigen::Vector3d coeff = solve(Eigen::VectorXd::Ones(n));
  // Re-weight with the predicted Poisson variance; the floor keeps a
  // vanishing prediction from dominating the fit.
  const Eigen::VectorXd predicted = design * coeff;
  const double floor = 1e-6 * std::max(std::abs(coeff(0)), 1e-300);
  const Eigen::VectorXd weights = predicted.unaryExpr([floor](double m) { return 1.0 / std::max(m, floor); });
  coeff = solve(weights);

  const double dwell = scan.dwell > 0.0 ? scan.dwell : 1.0;
  FringeFit fit;
  fit.covariance = normal.inverse() / (dwell * dwell);
  const Eigen::Vector3d rates = coeff / dwell;
  fit.mean_rate = rates(0);
  const double r2 = rates(1) * rates(1) + rates(2) * rates(2);
  fit.amplitude = std::sqrt(r2);
  fit.phase = unwrap_near(std::atan2(-rates(2), rates(1)), phase_reference);
  if (r2 > 0.0) {
    const Eigen::Vector2d grad(rates(2) / r2, -rates(1) / r2);
    fit.phase_sigma = std::sqrt(grad.dot(fit.covariance.block<2, 2>(1, 1) * grad));
  } else {
    fit.phase_sigma = kPi;
  }
  return fit;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(stream + 0x5851f42d4c957f2dULL));
}

double phase_per_volt_squared(const Scenario& s) {
  return 0.5 * s.interaction.alpha / (s.interaction.d * s.interaction.d) / kHbar * s.interaction.l_int / s.beam.v0;
}

std::vector<double> default_sweep_grid(const Scenario& s) {
  double center = 0.0;
  if (s.polarizability.v2_center) {
    center = *s.polarizability.v2_center;
  } else {
    if (!s.shifters.pair()) throw DomainError("rephasing pipeline requires f > 0 and active shifters");
    center = 2.0 * kPlanck * s.shifters.f * s.geometry.l_shifters * s.interaction.d * s.interaction.d /
             (s.interaction.l_int * s.interaction.alpha);
  }
  const double step = s.polarizability.phase_step / phase_per_volt_squared(s);
  const auto n = s.polarizability.n_points;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = center + (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * step;
  }
  if (grid.front() < 0.0) throw DomainError("sweep grid reaches V^2 < 0; reduce phase_step_rad or n_points");
  return grid;
}

std::vector<PhaseSweepPoint> run_voltage_sweep(const Scenario& s, std::span<const double> v_squared) {
  validate(s);
  const auto dist = s.beam.distribution();
  const auto geom = s.geometry.geometry();
  const auto pair = s.shifters.pair();
  const FringeIntegrator integrator(dist, geom, pair);
  const auto z = fringe_positions(geom.grating_wavevector, s.detection.n_z);
  const double counter_f = pair ? s.shifters.f : 0.0;

  std::vector<PhaseSweepPoint> points;
  std::vector<double> predictions;
  points.reserve(v_squared.size());
  for (std::size_t i = 0; i < v_squared.size(); ++i) {
    const double v2 = v_squared[i];
    if (!(v2 >= 0.0)) throw DomainError("run_voltage_sweep: V^2 must be >= 0");
    const double omega = stark_angular_frequency(std::sqrt(v2), s.interaction.d, s.interaction.alpha);
    const double l_int = s.interaction.l_int;
    const PhaseProfile profile = [omega, l_int](double v) { return omega * l_int / v; };

    const double predicted = gaussian_envelope(omega * l_int / dist.v0, dist.ratio(), counter_f,
                                               geom.shifter_separation, dist.v0)
                                 .phase;
    const auto amp = integrator.evaluate(profile, predicted);
    const FringeObservable obs{s.detection.flux, s.detection.contrast0 * s.detection.flux, amp.contrast, amp.phase};
    const auto scan =
        synthesize_scan(obs, z, geom.grating_wavevector, s.detection.dwell, derive_seed(s.detection.seed, i),
                        s.detection.noise);
    const auto fit = fit_fringe(scan, geom.grating_wavevector);

    PhaseSweepPoint p;
    p.v_squared = v2;
    p.phase = fit.phase;
    p.phase_sigma = fit.phase_sigma;
    p.contrast = fit.mean_rate > 0.0 ? fit.amplitude / (s.detection.contrast0 * fit.mean_rate) : 0.0;
    points.push_back(p);
    predictions.push_back(predicted);
  }

  // Sequential unwrapping pass over the ordered sweep. Each point is placed
  // next to its predicted phase shifted by the weighted mean offset of the
  // points already placed, so one noise-dominated fit cannot slip the rest
  // of the sweep by 2 pi.
  double offset_sum = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double offset = weight_sum > 0.0 ? offset_sum / weight_sum : 0.0;
    points[i].phase = unwrap_near(points[i].phase, predictions[i] + offset);
    const double w = 1.0 / (points[i].phase_sigma * points[i].phase_sigma);
    offset_sum += w * (points[i].phase - predictions[i]);
    weight_sum += w;
  }
  return points;
}

ZeroCrossing zero_crossing_fit(std::span<const PhaseSweepPoint> points, std::size_t window) {
  if (window < 3) throw DomainError("zero_crossing_fit: window must be >= 3");
  if (points.size() < window) throw DomainError("zero_crossing_fit: fewer points than the window");

  std::size_t pivot = points.size();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i].phase;
    const double b = points[i + 1].phase;
    if (a == 0.0) {
      pivot = i;
      break;
    }
    if ((a < 0.0) != (b < 0.0) || b == 0.0) {
      pivot = i + 1;
      break;
    }
  }
  if (pivot == points.size()) throw std::range_error("zero_crossing_fit: phase never changes sign");

  const std::size_t half = window / 2;
  std::size_t first = pivot > half ? pivot - half : 0;
  first = std::min(first, points.size() - window);

  double sw = 0.0;
  double swx = 0.0;
  double swy = 0.0;
  for (std::size_t i = first; i < first + window; ++i) {
    const auto& p = points[i];
    if (!(p.phase_sigma > 0.0)) throw FitError("zero_crossing_fit: phase uncertainties must be > 0");
    const double w = 1.0 / (p.phase_sigma * p.phase_sigma);
    sw += w;
    swx += w * p.v_squared;
    swy += w * p.phase;
  }
  const double x_bar = swx / sw;
  const double y_bar = swy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = first; i < first + window; ++i) {
    const auto& p = points[i];
    const double w = 1.0 / (p.phase_sigma * p.phase_sigma);
    sxx += w * (p.v_squared - x_bar) * (p.v_squared - x_bar);
    sxy += w * (p.v_squared - x_bar) * (p.phase - y_bar);
  }
  if (!(sxx > 0.0)) throw FitError("zero_crossing_fit: window has no spread in V^2");
  const double slope = sxy / sxx;
  if (slope == 0.0) throw FitError("zero_crossing_fit: zero slope");

  ZeroCrossing out;
  out.first = first;
  out.count = window;
  out.slope = slope;
  out.slope_sigma = std::sqrt(1.0 / sxx);
  out.v2_reph = x_bar - y_bar / slope;
  const double dx = out.v2_reph - x_bar;
  out.phase_sigma = std::sqrt(1.0 / sw + dx * dx / sxx);
  out.v2_reph_sigma = out.phase_sigma / std::abs(slope);
  return out;
}

double extract_alpha(double frequency, double l_shifters, double plate_gap, double l_int, double v2_reph) {
  if (!(frequency > 0.0)) throw DomainError("extract_alpha: f must be > 0 (no rephasing at f = 0)");
  if (!(v2_reph > 0.0)) throw DomainError("extract_alpha: V_reph^2 must be > 0");
  if (!(l_shifters > 0.0) || !(plate_gap > 0.0) || !(l_int > 0.0)) {
    throw DomainError("extract_alpha: lengths must be > 0");
  }
  return 2.0 * kPlanck * frequency * l_shifters * plate_gap * plate_gap / (l_int * v2_reph);
}

double alpha_fractional_uncertainty(double phase_sigma, double phi_int_v0) {
  if (!(phi_int_v0 > 0.0)) throw DomainError("alpha_fractional_uncertainty: interaction phase must be > 0");
  return phase_sigma / phi_int_v0;
}

PolarizabilityRun estimate_polarizability(const Scenario& s) {
  const auto grid = default_sweep_grid(s);
  return estimate_polarizability(s, grid);
}

PolarizabilityRun estimate_polarizability(const Scenario& s, std::span<const double> v_squared) {
  const auto pair = s.shifters.pair();
  if (!pair || !(s.shifters.f > 0.0)) throw DomainError("rephasing pipeline requires f > 0 and active shifters");

  PolarizabilityRun run;
  run.points = run_voltage_sweep(s, v_squared);

  const double phi_error = s.shifters.correct_asymmetry ? asymmetry_error(pair->first, pair->second) : 0.0;
  std::vector<PhaseSweepPoint> corrected = run.points;
  for (auto& p : corrected) p.phase = correct_asymmetry(p.phase, phi_error);

  run.crossing = zero_crossing_fit(corrected, s.polarizability.window);
  auto& r = run.result;
  r.v2_reph = run.crossing.v2_reph;
  r.v2_reph_sigma = run.crossing.v2_reph_sigma;
  r.phase_sigma = run.crossing.phase_sigma;
  r.phi_error = phi_error;
  r.window_first = run.crossing.first;
  r.window_count = run.crossing.count;
  r.alpha = extract_alpha(s.shifters.f, s.geometry.l_shifters, s.interaction.d, s.interaction.l_int, r.v2_reph);
  r.phi_int_v0 = std::abs(run.crossing.slope) * r.v2_reph;
  r.frac_uncertainty = alpha_fractional_uncertainty(r.phase_sigma, r.phi_int_v0);
  return run;
}

}  // namespace dcomp
