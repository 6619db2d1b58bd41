#pragma once

// Growth of sup ‖c‖ over nested enumeration windows: bounded orbits versus
// linear growth of Birkhoff sums.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/transformation.hpp"

namespace cocycle_lab {

enum class GrowthVerdict { bounded, linear_growth, inconclusive };

inline const char* to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::bounded: return "bounded";
    case GrowthVerdict::linear_growth: return "linear_growth";
    case GrowthVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct GrowthThresholds {
  double stall_eps = 1e-6;
  double slope_eps = 1e-6;
  double max_fit_error = 0.05;
};

struct GrowthClassification {
  GrowthVerdict verdict = GrowthVerdict::inconclusive;
  std::vector<std::pair<long, double>> sup_norm_by_window;
  double slope_estimate = 0.0;
  /// max |fit − sup| / max sup of the least-squares line
  double fit_error = 0.0;
  friend bool operator==(const GrowthClassification&, const GrowthClassification&) = default;
};

/// Classifies a (K, sup) series. Bounded: the sup grows by less than
/// stall_eps (relative) over the last half of the windows. Linear: a
/// least-squares line fits within max_fit_error with slope above slope_eps.
inline GrowthVerdict parse_growth_verdict(const std::string& s) {
  if (s == "bounded") return GrowthVerdict::bounded;
  if (s == "linear_growth") return GrowthVerdict::linear_growth;
  if (s == "inconclusive") return GrowthVerdict::inconclusive;
  throw DomainError("unknown growth verdict `" + s + "`");
}

inline GrowthClassification classify_growth(std::vector<std::pair<long, double>> series,
                                            const GrowthThresholds& th = {}) {
  GrowthClassification out;
  out.sup_norm_by_window = std::move(series);
  const auto& s = out.sup_norm_by_window;
  const std::size_t n = s.size();
  if (n == 0) return out;
  for (std::size_t i = 1; i < n; ++i)
    if (s[i].first <= s[i - 1].first) throw DomainError("window list must be strictly increasing");

  if (n >= 2) {
    double mk = 0.0, ms = 0.0;
    for (const auto& [k, v] : s) {
      mk += static_cast<double>(k);
      ms += v;
    }
    mk /= static_cast<double>(n);
    ms /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [k, v] : s) {
      sxy += (static_cast<double>(k) - mk) * (v - ms);
      sxx += (static_cast<double>(k) - mk) * (static_cast<double>(k) - mk);
    }
    out.slope_estimate = sxx > 0.0 ? sxy / sxx : 0.0;
    const double intercept = ms - out.slope_estimate * mk;
    double worst = 0.0, top = 0.0;
    for (const auto& [k, v] : s) {
      worst = std::max(worst, std::abs(intercept + out.slope_estimate * static_cast<double>(k) - v));
      top = std::max(top, std::abs(v));
    }
    out.fit_error = top > 0.0 ? worst / top : 0.0;
  }

  const double mid = s[n / 2].second;
  const double last = s.back().second;
  double increase = 0.0;
  if (last > mid) increase = mid > 0.0 ? (last - mid) / mid : std::numeric_limits<double>::infinity();
  if (n == 1 || increase < th.stall_eps) {
    out.verdict = GrowthVerdict::bounded;
  } else if (out.fit_error < th.max_fit_error && out.slope_estimate > th.slope_eps) {
    out.verdict = GrowthVerdict::linear_growth;
  }
  return out;
}

namespace detail {

inline long max_window(std::span<const long> windows) {
  if (windows.empty()) throw DomainError("window list is empty");
  for (std::size_t i = 1; i < windows.size(); ++i)
    if (windows[i] <= windows[i - 1]) throw DomainError("window list must be strictly increasing");
  if (windows.front() < 0) throw DomainError("windows must be non-negative");
  return windows.back();
}

template <class Arrows, class NormOf>
std::vector<std::pair<long, double>> sup_series(const WindowedTG& wtg, const Arrows& arrows,
                                                std::span<const long> windows, NormOf&& norm_of) {
  if (windows.back() > wtg.window()) throw DomainError("window list exceeds the enumerated window");
  std::vector<std::pair<long, double>> series;
  for (long k : windows) series.emplace_back(k, 0.0);
  for (ArrowId a : arrows) {
    const long k = std::labs(wtg.triple(a).k);
    const double v = norm_of(a);
    for (auto& [w, sup] : series)
      if (k <= w) sup = std::max(sup, v);
  }
  return series;
}

}  // namespace detail

/// sup |c| over the arrows of one fiber of x within each window.
template <Scalar S>
GrowthClassification boundedness_probe(const WindowedTG& wtg, const Cocycle<S>& c, std::span<const long> windows,
                                       UnitId x, Side side = Side::range, const GrowthThresholds& th = {}) {
  detail::max_window(windows);
  const auto arrows = side == Side::range ? wtg.range_fiber(x) : wtg.source_fiber(x);
  return classify_growth(detail::sup_series(wtg, arrows, windows, [&](ArrowId a) { return c(a).norm(); }), th);
}

/// Probe of the Birkhoff cocycle of f at x, enumerating G(X,T) once at the
/// largest window. Only the arrows of G^x are summed.
template <Scalar S>
GrowthClassification boundedness_probe(const TransformationSystem& sys, std::span<const long> windows,
                                       std::span<const S> f, UnitId x, const GrowthThresholds& th = {}) {
  const auto wtg = build_transformation_groupoid(sys, detail::max_window(windows));
  return boundedness_probe(wtg, windows, f, x, th);
}

template <Scalar S>
GrowthClassification boundedness_probe(const WindowedTG& wtg, std::span<const long> windows, std::span<const S> f,
                                       UnitId x, const GrowthThresholds& th = {}) {
  detail::max_window(windows);
  const auto arrows = wtg.range_fiber(x);
  return classify_growth(detail::sup_series(wtg, arrows, windows,
                                            [&](ArrowId a) {
                                              const auto& t = wtg.triple(a);
                                              return std::abs(birkhoff_sum(wtg.system(), f, t.x, t.m, t.y, t.n));
                                            }),
                         th);
}

/// sup ‖c‖ over every arrow of each window.
template <Scalar S>
GrowthClassification global_growth(const WindowedTG& wtg, const Cocycle<S>& c, std::span<const long> windows,
                                   const GrowthThresholds& th = {}) {
  detail::max_window(windows);
  std::vector<ArrowId> all(wtg.n_arrows());
  for (ArrowId a = 0; a < all.size(); ++a) all[a] = a;
  return classify_growth(detail::sup_series(wtg, all, windows, [&](ArrowId a) { return c(a).norm(); }), th);
}

/// Finite groupoids are bounded: a single window (K = 0) holding sup ‖c(G_x)‖.
template <Groupoid G, Scalar S>
GrowthClassification finite_fiber_growth(const G& g, const Cocycle<S>& c, UnitId x, Side side = Side::source) {
  double sup = 0.0;
  for (ArrowId a : side == Side::source ? g.source_fiber(x) : g.range_fiber(x)) sup = std::max(sup, c(a).norm());
  return classify_growth({{0L, sup}});
}

}  // namespace cocycle_lab
