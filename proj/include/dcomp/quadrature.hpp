#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dcomp {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule. Thread safe; the returned reference stays valid for
/// the lifetime of the program.
const GaussLegendreRule& gauss_legendre(std::size_t n);

/// Nodes per smooth piece used by the periodic averages.
inline constexpr std::size_t kPieceOrder = 24;

/// Integrates f over [breaks.front(), breaks.back()] with an n-point rule on
/// every interval between consecutive breaks. f must be smooth inside each
/// interval; it is never evaluated at a break.
template <class Value, class F>
Value integrate_pieces(std::span<const double> breaks, std::size_t n, F&& f) {
  const auto& rule = gauss_legendre(n);
  Value total{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    Value piece{};
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      piece += rule.weights[k] * f(mid + half * rule.nodes[k]);
    }
    total += half * piece;
  }
  return total;
}

/// Sorted, de-duplicated break list for [0, period] built from interior
/// break times (any value, reduced modulo period).
std::vector<double> period_breaks(double period, std::span<const double> times);

/// Mean of f over one period, integrated piecewise between the given breaks.
template <class Value, class F>
Value period_average(double period, std::span<const double> times, F&& f) {
  const auto breaks = period_breaks(period, times);
  return integrate_pieces<Value>(breaks, kPieceOrder, std::forward<F>(f)) / period;
}

}  // namespace dcomp
