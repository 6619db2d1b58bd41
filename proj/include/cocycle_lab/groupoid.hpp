#pragma once

// Finite groupoids: storage, the Groupoid concept shared with windowed
// transformation groupoids, axiom validation, orbits and fibers.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocycle_lab/errors.hpp"

namespace cocycle_lab {

using UnitId = std::size_t;
using ArrowId = std::size_t;

struct Arrow {
  ArrowId id = 0;
  UnitId src = 0;
  UnitId rng = 0;
  friend bool operator==(const Arrow&, const Arrow&) = default;
};

enum class Side { source, range };

struct Violation {
  std::string axiom;
  std::vector<ArrowId> arrows;
  double magnitude = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Composable pairs whose product falls outside an enumeration window.
  std::size_t out_of_window = 0;
  /// Violations beyond the storage cap are only counted.
  std::size_t dropped = 0;
  std::vector<std::string> flags;

  static constexpr std::size_t kMaxStored = 10000;

  bool ok() const noexcept { return violations.empty() && dropped == 0; }

  void add(std::string axiom, std::vector<ArrowId> arrows, double magnitude = 0.0) {
    if (violations.size() >= kMaxStored) {
      ++dropped;
      return;
    }
    violations.push_back({std::move(axiom), std::move(arrows), magnitude});
  }

  bool cites(const std::string& axiom) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.axiom == axiom; });
  }

  void merge(const ValidationReport& other) {
    for (const auto& v : other.violations) add(v.axiom, v.arrows, v.magnitude);
    dropped += other.dropped;
    out_of_window += other.out_of_window;
    flags.insert(flags.end(), other.flags.begin(), other.flags.end());
  }
};

/// Anything with units, arrows, and a (possibly partial) composition.
template <class G>
concept Groupoid = requires(const G& g, ArrowId a, UnitId x) {
  { g.n_units() } -> std::convertible_to<std::size_t>;
  { g.n_arrows() } -> std::convertible_to<std::size_t>;
  { g.src(a) } -> std::convertible_to<UnitId>;
  { g.rng(a) } -> std::convertible_to<UnitId>;
  { g.unit_arrow(x) } -> std::convertible_to<ArrowId>;
  { g.inverse(a) } -> std::convertible_to<ArrowId>;
  { g.compose(a, a) } -> std::same_as<std::optional<ArrowId>>;
  { g.range_fiber(x) } -> std::convertible_to<std::span<const ArrowId>>;
  { g.source_fiber(x) } -> std::convertible_to<std::span<const ArrowId>>;
  { G::is_partial } -> std::convertible_to<bool>;
};

class FiniteGroupoid {
public:
  struct ComposeEntry {
    ArrowId left = 0;
    ArrowId right = 0;
    ArrowId result = 0;
  };

  static constexpr bool is_partial = false;

  FiniteGroupoid() = default;

  /// Structural construction. Every id must resolve and every map must be
  /// total on its declared domain; axioms are checked by validate_groupoid.
  FiniteGroupoid(std::size_t n_units, std::vector<std::pair<UnitId, UnitId>> src_rng,
                 std::vector<ArrowId> unit_arrow, std::vector<ArrowId> inverse,
                 const std::vector<ComposeEntry>& compose)
      : n_units_(n_units), unit_arrow_(std::move(unit_arrow)), inverse_(std::move(inverse)) {
    const std::size_t n = src_rng.size();
    arrows_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [s, r] = src_rng[i];
      if (s >= n_units || r >= n_units)
        throw ValidationError("arrow " + std::to_string(i) + " references unit " +
                              std::to_string(std::max(s, r)) + " of " + std::to_string(n_units));
      arrows_.push_back({i, s, r});
    }
    if (unit_arrow_.size() != n_units)
      throw ValidationError("unit_arrow must list one arrow per unit");
    for (UnitId x = 0; x < n_units; ++x)
      check_id(unit_arrow_[x], "unit arrow of unit " + std::to_string(x));
    if (inverse_.size() != n) throw ValidationError("inverse must list one arrow per arrow");
    for (ArrowId a = 0; a < n; ++a) check_id(inverse_[a], "inverse of arrow " + std::to_string(a));

    rows_.assign(n, {});
    for (const auto& e : compose) {
      check_id(e.left, "compose entry");
      check_id(e.right, "compose entry");
      check_id(e.result, "compose entry");
      rows_[e.left].emplace_back(e.right, e.result);
    }
    for (auto& row : rows_) {
      std::sort(row.begin(), row.end());
      auto dup = std::adjacent_find(row.begin(), row.end(), [](const auto& l, const auto& r) {
        return l.first == r.first;
      });
      if (dup != row.end())
        throw ValidationError("compose lists the pair with right arrow " +
                              std::to_string(dup->first) + " twice");
    }

    range_fibers_.assign(n_units, {});
    source_fibers_.assign(n_units, {});
    for (const auto& a : arrows_) {
      range_fibers_[a.rng].push_back(a.id);
      source_fibers_[a.src].push_back(a.id);
    }
  }

  std::size_t n_units() const noexcept { return n_units_; }
  std::size_t n_arrows() const noexcept { return arrows_.size(); }
  const Arrow& arrow(ArrowId a) const { return arrows_.at(a); }
  std::span<const Arrow> arrows() const noexcept { return arrows_; }
  UnitId src(ArrowId a) const { return arrows_[a].src; }
  UnitId rng(ArrowId a) const { return arrows_[a].rng; }
  ArrowId unit_arrow(UnitId x) const { return unit_arrow_[x]; }
  ArrowId inverse(ArrowId a) const { return inverse_[a]; }

  std::optional<ArrowId> compose(ArrowId a, ArrowId b) const {
    const auto& row = rows_[a];
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(b, ArrowId{0}));
    if (it == row.end() || it->first != b) return std::nullopt;
    return it->second;
  }

  std::span<const ArrowId> range_fiber(UnitId x) const { return range_fibers_[x]; }
  std::span<const ArrowId> source_fiber(UnitId x) const { return source_fibers_[x]; }

  /// Every stored (left, right, result) entry, including ill-formed ones.
  std::vector<ComposeEntry> compose_table() const {
    std::vector<ComposeEntry> out;
    for (ArrowId a = 0; a < rows_.size(); ++a)
      for (const auto& [b, ab] : rows_[a]) out.push_back({a, b, ab});
    return out;
  }

  std::span<const ArrowId> unit_arrows() const noexcept { return unit_arrow_; }
  std::span<const ArrowId> inverses() const noexcept { return inverse_; }

private:
  void check_id(ArrowId a, const std::string& what) const {
    if (a >= arrows_.size())
      throw ValidationError(what + " references arrow id " + std::to_string(a) + " of " +
                            std::to_string(arrows_.size()));
  }

  std::size_t n_units_ = 0;
  std::vector<Arrow> arrows_;
  std::vector<ArrowId> unit_arrow_;
  std::vector<ArrowId> inverse_;
  std::vector<std::vector<std::pair<ArrowId, ArrowId>>> rows_;
  std::vector<std::vector<ArrowId>> range_fibers_;
  std::vector<std::vector<ArrowId>> source_fibers_;
};

static_assert(Groupoid<FiniteGroupoid>);

/// Calls fn(a, b, ab) for every composable pair whose product is defined.
template <Groupoid G, class Fn>
void for_each_composition(const G& g, Fn&& fn) {
  for (ArrowId a = 0; a < g.n_arrows(); ++a)
    for (ArrowId b : g.range_fiber(g.src(a)))
      if (auto ab = g.compose(a, b)) fn(a, b, *ab);
}

template <Groupoid G>
std::vector<ArrowId> fiber(const G& g, UnitId x, Side side) {
  if (x >= g.n_units()) throw DomainError("unit " + std::to_string(x) + " out of range");
  auto f = side == Side::source ? g.source_fiber(x) : g.range_fiber(x);
  return {f.begin(), f.end()};
}

template <Groupoid G>
ValidationReport validate_groupoid(const G& g) {
  ValidationReport rep;
  const std::size_t n = g.n_arrows();

  for (UnitId x = 0; x < g.n_units(); ++x) {
    const ArrowId u = g.unit_arrow(x);
    if (g.src(u) != x || g.rng(u) != x) rep.add("unit_arrow_endpoints", {u});
  }

  if constexpr (requires { g.compose_table(); }) {
    for (const auto& e : g.compose_table())
      if (g.src(e.left) != g.rng(e.right))
        rep.add("compose_on_non_composable", {e.left, e.right, e.result});
  }

  for (ArrowId a = 0; a < n; ++a) {
    for (ArrowId b : g.range_fiber(g.src(a))) {
      auto ab = g.compose(a, b);
      if (!ab) {
        if constexpr (G::is_partial) {
          ++rep.out_of_window;
        } else {
          rep.add("compose_undefined", {a, b});
        }
        continue;
      }
      if (g.rng(*ab) != g.rng(a) || g.src(*ab) != g.src(b)) rep.add("compose_endpoints", {a, b, *ab});
      // associativity on (a, b, c)
      for (ArrowId c : g.range_fiber(g.src(b))) {
        auto bc = g.compose(b, c);
        if (!bc) continue;
        auto left = g.compose(*ab, c);
        auto right = g.compose(a, *bc);
        if (left && right && *left != *right) rep.add("associativity", {a, b, c});
      }
    }
  }

  for (ArrowId a = 0; a < n; ++a) {
    const ArrowId inv = g.inverse(a);
    if (g.src(inv) != g.rng(a) || g.rng(inv) != g.src(a)) rep.add("inverse_endpoints", {a, inv});
    if (g.inverse(inv) != a) rep.add("inverse_involution", {a, inv});
    auto right = g.compose(a, inv);
    if (!right || *right != g.unit_arrow(g.rng(a))) rep.add("inverse_right", {a, inv});
    auto left = g.compose(inv, a);
    if (!left || *left != g.unit_arrow(g.src(a))) rep.add("inverse_left", {inv, a});
    auto ul = g.compose(g.unit_arrow(g.rng(a)), a);
    if (!ul || *ul != a) rep.add("unit_left_neutral", {g.unit_arrow(g.rng(a)), a});
    auto ur = g.compose(a, g.unit_arrow(g.src(a)));
    if (!ur || *ur != a) rep.add("unit_right_neutral", {a, g.unit_arrow(g.src(a))});
  }
  return rep;
}

namespace detail {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

/// Orbit partition of the unit space, blocks sorted by smallest member.
template <Groupoid G>
std::vector<std::vector<UnitId>> orbits(const G& g) {
  detail::DisjointSets ds(g.n_units());
  for (ArrowId a = 0; a < g.n_arrows(); ++a) ds.unite(g.src(a), g.rng(a));
  std::vector<std::vector<UnitId>> blocks;
  std::vector<std::size_t> slot(g.n_units(), SIZE_MAX);
  for (UnitId x = 0; x < g.n_units(); ++x) {
    const auto root = ds.find(x);
    if (slot[root] == SIZE_MAX) {
      slot[root] = blocks.size();
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(x);
  }
  return blocks;
}

/// On a finite discrete unit space minimality is transitivity.
template <Groupoid G>
bool is_minimal(const G& g) {
  return g.n_units() > 0 && orbits(g).size() == 1;
}

// Builders for the standard small groupoids.

/// Pair groupoid X×X × cyclic isotropy Z/q. Arrow (i, j, a) has range i,
/// source j and id (i·n + j)·q + a; (i,j,a)(j,k,b) = (i,k,a+b).
inline FiniteGroupoid pair_times_cyclic(std::size_t n, std::size_t q) {
  if (n == 0 || q == 0) throw ParamError("pair_times_cyclic needs n ≥ 1 and q ≥ 1");
  auto id = [n, q](std::size_t i, std::size_t j, std::size_t a) { return (i * n + j) * q + a; };
  std::vector<std::pair<UnitId, UnitId>> sr(n * n * q);
  std::vector<ArrowId> inv(n * n * q);
  std::vector<ArrowId> units(n);
  std::vector<FiniteGroupoid::ComposeEntry> comp;
  comp.reserve(n * n * n * q * q);
  for (std::size_t i = 0; i < n; ++i) {
    units[i] = id(i, i, 0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < q; ++a) {
        sr[id(i, j, a)] = {j, i};
        inv[id(i, j, a)] = id(j, i, (q - a) % q);
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t b = 0; b < q; ++b)
            comp.push_back({id(i, j, a), id(j, k, b), id(i, k, (a + b) % q)});
      }
  }
  return FiniteGroupoid(n, std::move(sr), std::move(units), std::move(inv), comp);
}

inline FiniteGroupoid pair_groupoid(std::size_t n) { return pair_times_cyclic(n, 1); }

/// Z/q as a groupoid over one unit.
inline FiniteGroupoid cyclic_group(std::size_t q) { return pair_times_cyclic(1, q); }

/// Only unit arrows.
inline FiniteGroupoid unit_groupoid(std::size_t n) {
  std::vector<std::pair<UnitId, UnitId>> sr;
  std::vector<ArrowId> ids;
  std::vector<FiniteGroupoid::ComposeEntry> comp;
  for (std::size_t i = 0; i < n; ++i) {
    sr.emplace_back(i, i);
    ids.push_back(i);
    comp.push_back({i, i, i});
  }
  return FiniteGroupoid(n, std::move(sr), ids, ids, comp);
}

/// Disjoint union; arrows and units of `b` are renumbered after those of `a`.
inline FiniteGroupoid disjoint_union(const FiniteGroupoid& a, const FiniteGroupoid& b) {
  const std::size_t ua = a.n_units();
  const std::size_t na = a.n_arrows();
  std::vector<std::pair<UnitId, UnitId>> sr;
  for (const auto& x : a.arrows()) sr.emplace_back(x.src, x.rng);
  for (const auto& x : b.arrows()) sr.emplace_back(x.src + ua, x.rng + ua);
  std::vector<ArrowId> units(a.unit_arrows().begin(), a.unit_arrows().end());
  for (ArrowId u : b.unit_arrows()) units.push_back(u + na);
  std::vector<ArrowId> inv(a.inverses().begin(), a.inverses().end());
  for (ArrowId i : b.inverses()) inv.push_back(i + na);
  auto comp = a.compose_table();
  for (auto e : b.compose_table()) comp.push_back({e.left + na, e.right + na, e.result + na});
  return FiniteGroupoid(ua + b.n_units(), std::move(sr), std::move(units), std::move(inv), comp);
}

}  // namespace cocycle_lab
