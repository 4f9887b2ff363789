#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dcomp/physics.hpp"
#include "dcomp/waveform.hpp"

namespace dcomp {

/// Interaction phase as a function of atom speed (m/s -> rad).
using PhaseProfile = std::function<double(double)>;

/// Velocity- and time-averaged fringe: I(z) = N + A C' cos(k_g z + phi').
struct FringeObservable {
  double mean_rate = 0.0;       // N, counts/s
  double amplitude_rate = 0.0;  // A, counts/s
  double contrast = 1.0;        // C'
  double phase = 0.0;           // phi', rad, unwrapped

  void validate() const;
};

/// Counts recorded at a list of grating offsets. Counts are Poisson draws,
/// or the expected values when the scan was synthesized without noise.
struct DetectorScan {
  std::vector<double> z;       // m
  std::vector<double> counts;
  double dwell = 0.0;          // s per point
  std::uint64_t seed = 0;

  /// Equal lengths, non-negative counts, coverage of at least one fringe.
  void validate(double grating_wavevector) const;
};

struct FringeAmplitude {
  double contrast = 0.0;
  double phase = 0.0;          // rad, unwrapped against the caller's reference
  double error_estimate = 0.0; // |difference| between the last two node doublings
  std::size_t nodes = 0;
};

struct QuadratureSettings {
  std::size_t base_nodes = 257;
  double tolerance = 1e-6;     // on C'
  int max_doublings = 5;
};

/// Averages exp(i [phi_int(v) + phi_1(t) + phi_2(t + L/v)]) over the
/// truncated Gaussian in v and one ramp period in t.
///
/// The velocity integral is composite Gauss-Legendre, split at speeds where
/// the shifter time average has a kink; node counts double until C' changes
/// by less than the tolerance. The time average for each velocity node does
/// not depend on phi_int and is computed once per integrator, so sweeping
/// the interaction strength through one integrator is cheap.
class FringeIntegrator {
 public:
  FringeIntegrator(const VelocityDistribution& dist, const InterferometerGeometry& geom,
                   std::optional<ShifterPair> pair, QuadratureSettings settings = {});

  /// Throws NumericalError if the node doubling does not converge.
  FringeAmplitude evaluate(const PhaseProfile& phi_int, double phase_reference = 0.0) const;

  /// Speeds (including both ends of the support) separating smooth pieces.
  const std::vector<double>& velocity_breaks() const noexcept { return breaks_; }

 private:
  struct NodeSet {
    std::vector<double> v;
    std::vector<double> weight;
    std::vector<std::complex<double>> shifter;
  };

  NodeSet build(int level) const;
  static std::complex<double> sum(const NodeSet& nodes, const PhaseProfile& phi_int);

  VelocityDistribution dist_;
  InterferometerGeometry geom_;
  std::optional<ShifterPair> pair_;
  QuadratureSettings settings_;
  std::vector<double> breaks_;
  NodeSet coarse_;
  NodeSet fine_;
};

FringeAmplitude complex_fringe_amplitude(const PhaseProfile& phi_int, const std::optional<ShifterPair>& pair,
                                         const VelocityDistribution& dist, const InterferometerGeometry& geom,
                                         double phase_reference = 0.0);

/// Closed form for a linearized interaction phase and a Gaussian beam:
/// phi' = phi_int(v0) - 2 pi f L / v0, C' = exp(-(sigma/v0)^2 phi'^2 / 2).
FringeAmplitude gaussian_envelope(double phi_int_v0, double sigma_ratio, double frequency, double l_shifters,
                                  double v0);

/// Grating offsets covering `periods` fringe periods, endpoint excluded.
std::vector<double> fringe_positions(double grating_wavevector, std::size_t points, double periods = 1.0);

/// Expected counts dwell * (N + A C' cos(k_g z + phi')), Poisson-sampled
/// from a generator seeded with `seed` when `noise` is set.
DetectorScan synthesize_scan(const FringeObservable& obs, std::span<const double> z, double grating_wavevector,
                             double dwell, std::uint64_t seed, bool noise = true);

struct MonteCarloAmplitude {
  double contrast = 0.0;
  double phase = 0.0;
  double contrast_se = 0.0;
  double phase_se = 0.0;
  std::size_t n_atoms = 0;
};

inline constexpr std::size_t kMonteCarloBlocks = 100;

/// Atom-by-atom estimate of the same average as FringeIntegrator. Each atom
/// draws from its own counter-based stream keyed by (seed, atom index), so
/// the result does not depend on the number of workers. Standard errors are
/// block jackknife estimates.
MonteCarloAmplitude monte_carlo_amplitude(const PhaseProfile& phi_int, const std::optional<ShifterPair>& pair,
                                          const VelocityDistribution& dist, const InterferometerGeometry& geom,
                                          std::size_t n_atoms, std::uint64_t seed, double phase_reference = 0.0,
                                          unsigned workers = 0);

/// phase + 2 pi k with k chosen to land nearest the reference.
double unwrap_near(double phase, double reference);

/// `# dwell_s=..`, `# seed=..`, then `z_m,counts` and one row per point.
void write_scan_csv(std::ostream& out, const DetectorScan& scan);
DetectorScan read_scan_csv(std::istream& in);

}  // namespace dcomp
