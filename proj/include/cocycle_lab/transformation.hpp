#pragma once

// The transformation groupoid G(X,T) of a self-map T of a finite set,
// enumerated inside a window |k| ≤ K.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cocycle_lab/groupoid.hpp"

namespace cocycle_lab {

struct TransformationSystem {
  std::vector<UnitId> map;

  TransformationSystem() = default;
  explicit TransformationSystem(std::vector<UnitId> t) : map(std::move(t)) {
    for (std::size_t x = 0; x < map.size(); ++x)
      if (map[x] >= map.size())
        throw ValidationError("T(" + std::to_string(x) + ") = " + std::to_string(map[x]) +
                              " is not a point of X (n_points = " + std::to_string(map.size()) + ")");
  }

  std::size_t n_points() const noexcept { return map.size(); }
  UnitId operator()(UnitId x) const { return map[x]; }

  UnitId iterate(UnitId x, std::size_t m) const {
    for (; m > 0; --m) x = map[x];
    return x;
  }

  bool is_injective() const {
    std::vector<bool> hit(map.size(), false);
    for (UnitId y : map) {
      if (hit[y]) return false;
      hit[y] = true;
    }
    return true;
  }

  /// Cycles of T (a permutation or not), each listed from its smallest point
  /// in the order x, Tx, T²x, ...
  std::vector<std::vector<UnitId>> cycles() const {
    const std::size_t n = map.size();
    std::vector<int> state(n, 0);  // 0 new, 1 on current path, 2 done
    std::vector<std::vector<UnitId>> out;
    for (UnitId start = 0; start < n; ++start) {
      std::vector<UnitId> path;
      UnitId x = start;
      while (state[x] == 0) {
        state[x] = 1;
        path.push_back(x);
        x = map[x];
      }
      if (state[x] == 1) {
        std::vector<UnitId> cyc;
        UnitId y = x;
        do {
          cyc.push_back(y);
          y = map[y];
        } while (y != x);
        std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
        out.push_back(std::move(cyc));
      }
      for (UnitId p : path) state[p] = 2;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool is_single_cycle() const {
    auto c = cycles();
    return c.size() == 1 && c.front().size() == map.size();
  }

  /// The n-cycle 0 → 1 → ... → n−1 → 0.
  static TransformationSystem rotation(std::size_t n) {
    std::vector<UnitId> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = (i + 1) % n;
    return TransformationSystem(std::move(t));
  }
};

struct WindowTriple {
  UnitId x = 0;  // range
  long k = 0;
  UnitId y = 0;  // source
  std::size_t m = 0;
  std::size_t n = 0;
};

class WindowedTG {
public:
  static constexpr bool is_partial = true;

  WindowedTG(TransformationSystem sys, long window, std::size_t m_max, std::vector<WindowTriple> triples)
      : sys_(std::move(sys)), window_(window), m_max_(m_max), triples_(std::move(triples)) {
    const std::size_t nu = sys_.n_points();
    range_fibers_.assign(nu, {});
    source_fibers_.assign(nu, {});
    units_.assign(nu, SIZE_MAX);
    index_.reserve(triples_.size());
    for (ArrowId a = 0; a < triples_.size(); ++a) {
      const auto& t = triples_[a];
      index_.emplace(key(t.x, t.k, t.y), a);
      range_fibers_[t.x].push_back(a);
      source_fibers_[t.y].push_back(a);
      if (t.k == 0 && t.x == t.y) units_[t.x] = a;
    }
  }

  const TransformationSystem& system() const noexcept { return sys_; }
  long window() const noexcept { return window_; }
  std::size_t m_max() const noexcept { return m_max_; }
  bool t_not_injective() const { return !sys_.is_injective(); }

  std::size_t n_units() const noexcept { return sys_.n_points(); }
  std::size_t n_arrows() const noexcept { return triples_.size(); }
  const WindowTriple& triple(ArrowId a) const { return triples_.at(a); }
  std::span<const WindowTriple> triples() const noexcept { return triples_; }

  UnitId src(ArrowId a) const { return triples_[a].y; }
  UnitId rng(ArrowId a) const { return triples_[a].x; }
  ArrowId unit_arrow(UnitId x) const { return units_[x]; }

  ArrowId inverse(ArrowId a) const {
    const auto& t = triples_[a];
    return *find(t.y, -t.k, t.x);
  }

  std::optional<ArrowId> compose(ArrowId a, ArrowId b) const {
    const auto& l = triples_[a];
    const auto& r = triples_[b];
    if (l.y != r.x) return std::nullopt;
    const long k = l.k + r.k;
    if (std::labs(k) > window_) return std::nullopt;
    return find(l.x, k, r.y);
  }

  std::optional<ArrowId> find(UnitId x, long k, UnitId y) const {
    if (std::labs(k) > window_ || x >= n_units() || y >= n_units()) return std::nullopt;
    auto it = index_.find(key(x, k, y));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const ArrowId> range_fiber(UnitId x) const { return range_fibers_[x]; }
  std::span<const ArrowId> source_fiber(UnitId x) const { return source_fibers_[x]; }

  /// Every witness pair (m, n) with m, n ≤ m_max, m − n = k, T^m x = T^n y.
  std::vector<std::pair<std::size_t, std::size_t>> witnesses(ArrowId a) const {
    const auto& t = triples_[a];
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t n = 0; n <= m_max_; ++n) {
      const long m = static_cast<long>(n) + t.k;
      if (m < 0 || static_cast<std::size_t>(m) > m_max_) continue;
      if (sys_.iterate(t.x, static_cast<std::size_t>(m)) == sys_.iterate(t.y, n))
        out.emplace_back(static_cast<std::size_t>(m), n);
    }
    return out;
  }

private:
  std::uint64_t key(UnitId x, long k, UnitId y) const {
    const auto width = static_cast<std::uint64_t>(2 * window_ + 1);
    const auto nu = static_cast<std::uint64_t>(n_units());
    return (static_cast<std::uint64_t>(x) * width + static_cast<std::uint64_t>(k + window_)) * nu + y;
  }

  TransformationSystem sys_;
  long window_ = 0;
  std::size_t m_max_ = 0;
  std::vector<WindowTriple> triples_;
  std::unordered_map<std::uint64_t, ArrowId> index_;
  std::vector<std::vector<ArrowId>> range_fibers_;
  std::vector<std::vector<ArrowId>> source_fibers_;
  std::vector<ArrowId> units_;
};

static_assert(Groupoid<WindowedTG>);

/// Default witness bound: T is eventually periodic within n_points steps, so
/// 2·n_points + K exponents reach every triple with |k| ≤ K.
inline std::size_t default_m_max(std::size_t n_points, long window) {
  return 2 * n_points + static_cast<std::size_t>(window);
}

/// All triples (x, k, y) with |k| ≤ K admitting witnesses m, n ≤ m_max,
/// sorted by (x, k, y); each carries its witness with the smallest n.
inline WindowedTG build_transformation_groupoid(const TransformationSystem& sys, long window,
                                                std::optional<std::size_t> m_max_override = {}) {
  if (window < 0) throw DomainError("window K must be non-negative");
  const std::size_t np = sys.n_points();
  const std::size_t m_max = m_max_override.value_or(default_m_max(np, window));
  const std::size_t width = static_cast<std::size_t>(2 * window + 1);

  // orbit[x][m] = T^m x
  std::vector<std::vector<UnitId>> orbit(np, std::vector<UnitId>(m_max + 1));
  for (UnitId x = 0; x < np; ++x) {
    orbit[x][0] = x;
    for (std::size_t m = 1; m <= m_max; ++m) orbit[x][m] = sys(orbit[x][m - 1]);
  }

  std::vector<WindowTriple> triples;
  std::vector<std::vector<std::size_t>> occ(np);
  constexpr std::size_t none = SIZE_MAX;
  std::vector<std::size_t> witness_n(width);
  for (UnitId x = 0; x < np; ++x) {
    for (auto& o : occ) o.clear();
    for (std::size_t m = 0; m <= m_max; ++m) occ[orbit[x][m]].push_back(m);
    for (UnitId y = 0; y < np; ++y) {
      std::fill(witness_n.begin(), witness_n.end(), none);
      for (std::size_t n = 0; n <= m_max; ++n)
        for (std::size_t m : occ[orbit[y][n]]) {
          const long k = static_cast<long>(m) - static_cast<long>(n);
          if (std::labs(k) > window) continue;
          auto& slot = witness_n[static_cast<std::size_t>(k + window)];
          if (slot == none) slot = n;
        }
      for (std::size_t s = 0; s < width; ++s) {
        if (witness_n[s] == none) continue;
        const long k = static_cast<long>(s) - window;
        const std::size_t n = witness_n[s];
        triples.push_back({x, k, y, static_cast<std::size_t>(static_cast<long>(n) + k), n});
      }
    }
  }
  std::sort(triples.begin(), triples.end(), [](const WindowTriple& a, const WindowTriple& b) {
    return std::tie(a.x, a.k, a.y) < std::tie(b.x, b.k, b.y);
  });
  return WindowedTG(sys, window, m_max, std::move(triples));
}

/// Equivalence-relation groupoid of a partition: arrows (x, y) for x, y in
/// one block, range x and source y. Unit ids are preserved.
inline FiniteGroupoid relation_groupoid(std::size_t n_units,
                                        const std::vector<std::vector<UnitId>>& blocks) {
  std::vector<std::pair<UnitId, UnitId>> sr;
  std::vector<ArrowId> units(n_units, 0);
  std::vector<std::vector<ArrowId>> id(n_units, std::vector<ArrowId>(n_units, SIZE_MAX));
  for (const auto& b : blocks)
    for (UnitId x : b)
      for (UnitId y : b) {
        id[x][y] = sr.size();
        sr.emplace_back(y, x);
        if (x == y) units[x] = id[x][y];
      }
  std::vector<ArrowId> inv(sr.size());
  std::vector<FiniteGroupoid::ComposeEntry> comp;
  for (const auto& b : blocks)
    for (UnitId x : b)
      for (UnitId y : b) {
        inv[id[x][y]] = id[y][x];
        for (UnitId z : b) comp.push_back({id[x][y], id[y][z], id[x][z]});
      }
  return FiniteGroupoid(n_units, std::move(sr), std::move(units), std::move(inv), comp);
}

/// Finite image of a windowed G(X,T) under (x, k, y) ↦ (x, y).
inline FiniteGroupoid orbit_relation_groupoid(const WindowedTG& wtg) {
  return relation_groupoid(wtg.n_units(), orbits(wtg));
}

}  // namespace cocycle_lab
