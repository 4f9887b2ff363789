#include "dcomp/fringe.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "dcomp/errors.hpp"
#include "dcomp/quadrature.hpp"

namespace dcomp {

void FringeObservable::validate() const {
  if (!(mean_rate >= 0.0)) throw DomainError("fringe observable: N must be >= 0");
  if (!(amplitude_rate >= 0.0)) throw DomainError("fringe observable: A must be >= 0");
  if (amplitude_rate > mean_rate) throw DomainError("fringe observable: A must not exceed N");
  if (!(contrast >= 0.0 && contrast <= 1.0 + 1e-12)) throw DomainError("fringe observable: contrast outside [0, 1]");
  if (!std::isfinite(phase)) throw DomainError("fringe observable: phase must be finite");
}

void DetectorScan::validate(double grating_wavevector) const {
  if (z.size() != counts.size()) throw DomainError("detector scan: z and counts differ in length");
  if (z.size() < 2) throw DomainError("detector scan: need at least two points");
  if (std::any_of(counts.begin(), counts.end(), [](double c) { return !(c >= 0.0); })) {
    throw DomainError("detector scan: negative count");
  }
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  const double spacing = (*hi - *lo) / static_cast<double>(z.size() - 1);
  const double fringe = kTwoPi / grating_wavevector;
  if (*hi - *lo + spacing < fringe * (1.0 - 1e-9)) {
    throw DomainError("detector scan: positions cover less than one fringe period");
  }
}

double unwrap_near(double phase, double reference) {
  return phase + kTwoPi * std::round((reference - phase) / kTwoPi);
}

// ---------------------------------------------------------------------------
// Quadrature

FringeIntegrator::FringeIntegrator(const VelocityDistribution& dist, const InterferometerGeometry& geom,
                                   std::optional<ShifterPair> pair, QuadratureSettings settings)
    : dist_(dist), geom_(geom), pair_(std::move(pair)), settings_(settings) {
  dist_.validate();
  geom_.validate();
  if (pair_ && pair_->is_static()) pair_.reset();

  const double vmin = dist_.lower();
  const double vmax = dist_.upper();
  breaks_ = {vmin, vmax};
  if (pair_) {
    const auto lags = pair_kink_lags(*pair_);
    if (!lags.empty()) {
      const double period = pair_->period();
      const double length = geom_.shifter_separation;
      const double tau_min = length / vmax;
      const double tau_max = length / vmin;
      for (double lag : lags) {
        for (double k = std::ceil((tau_min - lag) / period); lag + k * period <= tau_max; k += 1.0) {
          const double v = length / (lag + k * period);
          if (v > vmin && v < vmax) breaks_.push_back(v);
        }
      }
      std::sort(breaks_.begin(), breaks_.end());
      breaks_.erase(std::unique(breaks_.begin(), breaks_.end(),
                                [&](double a, double b) { return b - a <= 1e-12 * vmax; }),
                    breaks_.end());
    }
  }
  coarse_ = build(0);
  fine_ = build(1);
}

FringeIntegrator::NodeSet FringeIntegrator::build(int level) const {
  const std::size_t total = settings_.base_nodes << level;
  const double span = breaks_.back() - breaks_.front();
  const std::size_t floor_nodes = std::size_t{8} << level;

  NodeSet set;
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    const double a = breaks_[i];
    const double b = breaks_[i + 1];
    const auto share = static_cast<std::size_t>(std::ceil(static_cast<double>(total) * (b - a) / span));
    const auto& rule = gauss_legendre(std::max(share, floor_nodes));
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double v = mid + half * rule.nodes[k];
      set.v.push_back(v);
      set.weight.push_back(half * rule.weights[k] * dist_.density(v));
      set.shifter.push_back(pair_ ? pair_time_average(*pair_, geom_.shifter_separation / v)
                                  : std::complex<double>{1.0, 0.0});
    }
  }
  return set;
}

std::complex<double> FringeIntegrator::sum(const NodeSet& nodes, const PhaseProfile& phi_int) {
  std::complex<double> acc{};
  for (std::size_t k = 0; k < nodes.v.size(); ++k) {
    acc += nodes.weight[k] * nodes.shifter[k] * std::polar(1.0, phi_int(nodes.v[k]));
  }
  return acc;
}

FringeAmplitude FringeIntegrator::evaluate(const PhaseProfile& phi_int, double phase_reference) const {
  std::complex<double> previous = sum(coarse_, phi_int);
  std::complex<double> current = sum(fine_, phi_int);
  std::size_t nodes = fine_.v.size();
  int level = 1;
  while (std::abs(std::abs(current) - std::abs(previous)) > settings_.tolerance) {
    if (level >= settings_.max_doublings) {
      throw NumericalError(fmt::format("fringe quadrature did not converge: C' changed by {:.3g} at {} nodes",
                                       std::abs(std::abs(current) - std::abs(previous)), nodes));
    }
    ++level;
    const NodeSet finer = build(level);
    previous = current;
    current = sum(finer, phi_int);
    nodes = finer.v.size();
  }
  FringeAmplitude out;
  out.contrast = std::abs(current);
  out.phase = unwrap_near(std::arg(current), phase_reference);
  out.error_estimate = std::abs(current - previous);
  out.nodes = nodes;
  return out;
}

FringeAmplitude complex_fringe_amplitude(const PhaseProfile& phi_int, const std::optional<ShifterPair>& pair,
                                         const VelocityDistribution& dist, const InterferometerGeometry& geom,
                                         double phase_reference) {
  return FringeIntegrator(dist, geom, pair).evaluate(phi_int, phase_reference);
}

FringeAmplitude gaussian_envelope(double phi_int_v0, double sigma_ratio, double frequency, double l_shifters,
                                  double v0) {
  if (!(sigma_ratio > 0.0)) throw DomainError("gaussian_envelope: sigma ratio must be > 0");
  double total = phi_int_v0;
  if (frequency != 0.0) {
    if (!(v0 > 0.0)) throw DomainError("gaussian_envelope: v0 must be > 0");
    total -= kTwoPi * frequency * l_shifters / v0;
  }
  FringeAmplitude out;
  out.phase = total;
  out.contrast = std::exp(-0.5 * sigma_ratio * sigma_ratio * total * total);
  return out;
}

// ---------------------------------------------------------------------------
// Detector scans

std::vector<double> fringe_positions(double grating_wavevector, std::size_t points, double periods) {
  if (!(grating_wavevector > 0.0)) throw DomainError("fringe_positions: k_g must be > 0");
  if (points == 0) throw DomainError("fringe_positions: need at least one point");
  const double span = periods * kTwoPi / grating_wavevector;
  std::vector<double> z(points);
  for (std::size_t i = 0; i < points; ++i) z[i] = span * static_cast<double>(i) / static_cast<double>(points);
  return z;
}

DetectorScan synthesize_scan(const FringeObservable& obs, std::span<const double> z, double grating_wavevector,
                             double dwell, std::uint64_t seed, bool noise) {
  if (!(dwell > 0.0)) throw DomainError("synthesize_scan: dwell must be > 0");
  if (!(obs.contrast >= 0.0 && obs.contrast <= 1.0 + 1e-12)) {
    throw DomainError("synthesize_scan: contrast outside [0, 1]");
  }
  DetectorScan scan;
  scan.z.assign(z.begin(), z.end());
  scan.dwell = dwell;
  scan.seed = seed;
  scan.counts.reserve(z.size());

  std::mt19937_64 rng(seed);
  for (double zi : z) {
    const double expected =
        dwell * (obs.mean_rate + obs.amplitude_rate * obs.contrast * std::cos(grating_wavevector * zi + obs.phase));
    if (expected < 0.0) throw DomainError("synthesize_scan: negative expected count (A > N)");
    if (!noise) {
      scan.counts.push_back(expected);
    } else if (expected == 0.0) {
      scan.counts.push_back(0.0);
    } else {
      std::poisson_distribution<long long> poisson(expected);
      scan.counts.push_back(static_cast<double>(poisson(rng)));
    }
  }
  return scan;
}

void write_scan_csv(std::ostream& out, const DetectorScan& scan) {
  out << fmt::format("# dwell_s={}\n# seed={}\nz_m,counts\n", scan.dwell, scan.seed);
  for (std::size_t i = 0; i < scan.z.size(); ++i) out << fmt::format("{},{}\n", scan.z[i], scan.counts[i]);
}

DetectorScan read_scan_csv(std::istream& in) {
  DetectorScan scan;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      const auto value = line.substr(eq + 1);
      if (key == "dwell_s") scan.dwell = std::stod(value);
      if (key == "seed") scan.seed = std::stoull(value);
      continue;
    }
    if (!header_seen) {
      if (line != "z_m,counts") throw DomainError("scan csv: expected header z_m,counts");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("scan csv: malformed row '" + line + "'");
    scan.z.push_back(std::stod(line.substr(0, comma)));
    scan.counts.push_back(std::stod(line.substr(comma + 1)));
  }
  if (!header_seen) throw DomainError("scan csv: missing header");
  return scan;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Random stream for one atom: the i-th draw is a hash of (key, i).
class AtomStream {
 public:
  AtomStream(std::uint64_t seed, std::uint64_t atom) : key_(splitmix(seed ^ splitmix(atom))) {}

  // Uniform on (0, 1].
  double uniform() {
    const std::uint64_t bits = splitmix(key_ + 0x632be59bd9b4e019ULL * ++counter_);
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }

  double truncated_normal(double k) {
    for (;;) {
      const double r = std::sqrt(-2.0 * std::log(uniform()));
      const double z = r * std::cos(kTwoPi * uniform());
      if (std::abs(z) <= k) return z;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct BlockSum {
  std::complex<double> sum{};
  std::size_t count = 0;
};

}  // namespace

MonteCarloAmplitude monte_carlo_amplitude(const PhaseProfile& phi_int, const std::optional<ShifterPair>& pair,
                                          const VelocityDistribution& dist, const InterferometerGeometry& geom,
                                          std::size_t n_atoms, std::uint64_t seed, double phase_reference,
                                          unsigned workers) {
  dist.validate();
  geom.validate();
  if (n_atoms < 10000) throw DomainError("monte_carlo_amplitude: need at least 1e4 atoms");

  const bool shifted = pair && !pair->is_static();
  const double period = shifted ? pair->period() : 0.0;
  const double length = geom.shifter_separation;

  std::vector<BlockSum> blocks(kMonteCarloBlocks);
  auto run_block = [&](std::size_t b) {
    const std::size_t begin = n_atoms * b / kMonteCarloBlocks;
    const std::size_t end = n_atoms * (b + 1) / kMonteCarloBlocks;
    BlockSum acc;
    for (std::size_t atom = begin; atom < end; ++atom) {
      AtomStream stream(seed, atom);
      const double v = dist.v0 + dist.sigma_v * stream.truncated_normal(dist.trunc_k);
      double phase = phi_int(v);
      if (shifted) {
        const double t = period * stream.uniform();
        phase += pair->first.phase_at(t) + pair->second.phase_at(t + length / v + pair->offset);
      }
      acc.sum += std::polar(1.0, phase);
    }
    acc.count = end - begin;
    blocks[b] = acc;
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, kMonteCarloBlocks);
  if (workers == 1) {
    for (std::size_t b = 0; b < kMonteCarloBlocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < kMonteCarloBlocks; b += workers) run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::complex<double> total{};
  for (const auto& b : blocks) total += b.sum;
  const std::complex<double> mean = total / static_cast<double>(n_atoms);

  MonteCarloAmplitude out;
  out.n_atoms = n_atoms;
  out.contrast = std::abs(mean);
  out.phase = unwrap_near(std::arg(mean), phase_reference);

  // Leave-one-block-out jackknife.
  const double nb = static_cast<double>(kMonteCarloBlocks);
  std::vector<double> c_loo(kMonteCarloBlocks);
  std::vector<double> p_loo(kMonteCarloBlocks);
  double c_bar = 0.0;
  double p_bar = 0.0;
  for (std::size_t b = 0; b < kMonteCarloBlocks; ++b) {
    const auto z = (total - blocks[b].sum) / static_cast<double>(n_atoms - blocks[b].count);
    c_loo[b] = std::abs(z);
    p_loo[b] = unwrap_near(std::arg(z), out.phase);
    c_bar += c_loo[b] / nb;
    p_bar += p_loo[b] / nb;
  }
  double c_var = 0.0;
  double p_var = 0.0;
  for (std::size_t b = 0; b < kMonteCarloBlocks; ++b) {
    c_var += (c_loo[b] - c_bar) * (c_loo[b] - c_bar);
    p_var += (p_loo[b] - p_bar) * (p_loo[b] - p_bar);
  }
  out.contrast_se = std::sqrt((nb - 1.0) / nb * c_var);
  out.phase_se = std::sqrt((nb - 1.0) / nb * p_var);
  return out;
}

}  // namespace dcomp
