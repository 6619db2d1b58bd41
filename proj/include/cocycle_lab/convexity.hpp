#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "cocycle_lab/bundle.hpp"

namespace cocycle_lab {

/// Modulus of uniform convexity of a Hilbert space:
/// δ(ε) = 1 − √(1 − ε²/4), ε ∈ [0, 2].
inline double uniform_convexity_delta(double eps) {
  if (!(eps >= 0.0 && eps <= 2.0)) throw DomainError("uniform convexity needs eps in [0, 2]");
  return 1.0 - std::sqrt(1.0 - 0.25 * eps * eps);
}

/// ‖(u1+u2)/2‖ ≤ 1 − δ(‖u1 − u2‖) for u1, u2 in the closed unit ball.
template <Scalar S>
bool midpoint_check(const Vec<S>& u1, const Vec<S>& u2, double slack = 1e-12) {
  if (u1.size() != u2.size()) throw ShapeMismatch("midpoint_check needs vectors of one fiber");
  if (u1.norm() > 1.0 + slack || u2.norm() > 1.0 + slack)
    throw DomainError("midpoint_check needs vectors in the unit ball");
  const double eps = std::min(2.0, (u1 - u2).norm());
  return (0.5 * (u1 + u2)).norm() <= 1.0 - uniform_convexity_delta(eps) + slack;
}

struct MetricEdge {
  UnitId a = 0;
  UnitId b = 0;
  double weight = 0.0;
};

/// Path metric of an edge-weighted neighbor graph on the units.
struct UnitMetric {
  std::size_t n_units = 0;
  std::vector<MetricEdge> edges;

  /// All-pairs shortest-path distances (infinity between components).
  std::vector<std::vector<double>> distances() const {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(n_units, std::vector<double>(n_units, inf));
    for (std::size_t i = 0; i < n_units; ++i) d[i][i] = 0.0;
    for (const auto& e : edges) {
      if (e.a >= n_units || e.b >= n_units) throw ValidationError("metric edge references an unknown unit");
      if (e.weight < 0.0) throw ValidationError("metric edge weights must be non-negative");
      d[e.a][e.b] = std::min(d[e.a][e.b], e.weight);
      d[e.b][e.a] = std::min(d[e.b][e.a], e.weight);
    }
    for (std::size_t k = 0; k < n_units; ++k)
      for (std::size_t i = 0; i < n_units; ++i)
        for (std::size_t j = 0; j < n_units; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
  }
};

/// ω̂(x; r) = max over d(x, y) ≤ r of ‖f(y) − f(x)‖, comparing fibers of a
/// constant bundle through their common coordinates.
template <Scalar S>
std::vector<double> modulus_of_continuity_estimate(const Section<S>& f, const std::optional<UnitMetric>& metric,
                                                   double r) {
  if (!metric) throw NoMetric("modulus of continuity needs a metric on the units");
  if (metric->n_units != f.values.size()) throw ShapeMismatch("metric and section cover different unit sets");
  for (const auto& v : f.values)
    if (v.size() != f.values.front().size())
      throw ShapeMismatch("modulus of continuity needs a constant bundle");
  const auto d = metric->distances();
  std::vector<double> omega(f.values.size(), 0.0);
  for (std::size_t x = 0; x < f.values.size(); ++x)
    for (std::size_t y = 0; y < f.values.size(); ++y)
      if (d[x][y] <= r) omega[x] = std::max(omega[x], (f.values[y] - f.values[x]).norm());
  return omega;
}

}  // namespace cocycle_lab
