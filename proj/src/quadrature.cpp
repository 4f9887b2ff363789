#include "dcomp/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "dcomp/errors.hpp"

namespace dcomp {

const GaussLegendreRule& gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussLegendreRule>> cache;

  if (n == 0) throw DomainError("gauss_legendre: need at least one node");
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    if (table == nullptr) throw NumericalError("gauss_legendre: table allocation failed");
    auto rule = std::make_unique<GaussLegendreRule>();
    rule->nodes.resize(n);
    rule->weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      gsl_integration_glfixed_point(-1.0, 1.0, i, &rule->nodes[i], &rule->weights[i], table);
    }
    gsl_integration_glfixed_table_free(table);
    slot = std::move(rule);
  }
  return *slot;
}

std::vector<double> period_breaks(double period, std::span<const double> times) {
  std::vector<double> breaks{0.0, period};
  const double tol = 1e-12 * period;
  for (double t : times) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    if (r > tol && r < period - tol) breaks.push_back(r);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [tol](double a, double b) { return b - a <= tol; }),
               breaks.end());
  return breaks;
}

}  // namespace dcomp
