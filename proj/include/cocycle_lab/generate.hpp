#pragma once

// Seeded scenario generators. Same (seed, kind, params) gives the same
// Scenario and therefore the same to_text bytes.

#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cocycle_lab/scenario.hpp"

namespace cocycle_lab {

enum class GenKind { minimal_groupoid, transformation, perturbed };

inline const char* to_string(GenKind k) {
  switch (k) {
    case GenKind::minimal_groupoid: return "minimal_groupoid";
    case GenKind::transformation: return "transformation";
    case GenKind::perturbed: return "perturbed";
  }
  return "?";
}

inline GenKind parse_gen_kind(const std::string& s) {
  if (s == "minimal_groupoid") return GenKind::minimal_groupoid;
  if (s == "transformation") return GenKind::transformation;
  if (s == "perturbed") return GenKind::perturbed;
  throw ParamError("unknown generator kind `" + s + "`");
}

inline constexpr std::size_t kMaxGenUnits = 32;
inline constexpr std::size_t kMaxGenDim = 16;

struct GenParams {
  /// number of units (points for transformation scenarios)
  std::size_t units = 4;
  /// isotropy order q of Z/q; drawn from {1,2,3,4} when unset
  std::optional<std::size_t> isotropy;
  std::size_t dim = 2;
  Field field = Field::real;
  /// size of the injected cocycle defect (perturbed)
  double delta = 0.5;
  /// cycle mean added to the potential (transformation)
  double mean = 0.0;
};

namespace detail {

inline void check_params(const GenParams& p) {
  if (p.units == 0 || p.units > kMaxGenUnits)
    throw ParamError("units must be in [1, " + std::to_string(kMaxGenUnits) + "]");
  if (p.dim == 0 || p.dim > kMaxGenDim) throw ParamError("dim must be in [1, " + std::to_string(kMaxGenDim) + "]");
  if (p.isotropy && (*p.isotropy < 1 || *p.isotropy > 4)) throw ParamError("isotropy order must be 1, 2, 3 or 4");
  if (!std::isfinite(p.delta) || !std::isfinite(p.mean)) throw ParamError("delta and mean must be finite");
}

template <Scalar S>
Model<S> gen_groupoid_model(Rng& rng, const FiniteGroupoid& g, const HilbertBundle& e, std::size_t n,
                            std::size_t q, bool perturb, double delta) {
  // arrow (i, j, a) of pair × Z/q has id (i·n + j)·q + a
  auto id = [n, q](std::size_t i, std::size_t j, std::size_t a) { return (i * n + j) * q + a; };
  const auto d = static_cast<Eigen::Index>(e.dim(0));
  Model<S> m;
  m.action_spec.kind = ActionKind::generators;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t parent = rng.below(i);
    m.action_spec.mats.emplace_back(id(i, parent, 0), random_isometry<S>(rng, d));
  }
  if (q > 1) m.action_spec.mats.emplace_back(id(0, 0, 1), random_isometry_of_order<S>(rng, d, q));

  m.cocycle_spec.kind = CocycleKind::coboundary;
  m.cocycle_spec.section = Section<S>::random(e, rng);
  if (perturb) {
    m.cocycle_spec.base = CocycleKind::coboundary;
    m.cocycle_spec.kind = CocycleKind::perturbed;
    // prefer a non-unit arrow when there is one
    ArrowId a = rng.below(g.n_arrows());
    if (g.n_arrows() > g.n_units())
      while (g.unit_arrow(g.rng(a)) == a) a = rng.below(g.n_arrows());
    m.cocycle_spec.arrow = a;
    m.cocycle_spec.coord = rng.below(e.dim(g.rng(a)));
    m.cocycle_spec.delta = delta;
  }
  return m;
}

}  // namespace detail

inline Scenario gen_scenario(std::uint64_t seed, GenKind kind, const GenParams& params = {}) {
  detail::check_params(params);
  Rng rng(seed);
  Scenario sc;
  sc.seed = seed;
  sc.id = std::string(to_string(kind)) + "_" + std::to_string(seed);

  if (kind == GenKind::transformation) {
    const std::size_t n = params.units;
    // single n-cycle through a random ordering of the points
    std::vector<UnitId> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<UnitId> map(n);
    for (std::size_t i = 0; i < n; ++i) map[order[i]] = order[(i + 1) % n];
    const long big = 4 * static_cast<long>(n);
    sc.transformation = TransformationSpec{TransformationSystem(map), big, {big / 4, big / 2, big}};
    sc.groupoid = build_transformation_groupoid(sc.transformation->system, big);
    sc.bundle = HilbertBundle::constant(n, 1, params.field);
    auto fill = [&]<Scalar S>(Model<S> m) {
      std::vector<S> h(n);
      for (auto& v : h) v = rng.scalar<S>();
      m.cocycle_spec.kind = CocycleKind::birkhoff;
      m.cocycle_spec.potential.resize(n);
      for (UnitId x = 0; x < n; ++x) m.cocycle_spec.potential[x] = h[x] - h[map[x]] + S(params.mean);
      resolve_model(m, std::get<WindowedTG>(sc.groupoid), sc.bundle, sc.transformation, sc.tolerances.algebra);
      sc.model = std::move(m);
    };
    if (params.field == Field::real) {
      fill(Model<double>{});
    } else {
      fill(Model<std::complex<double>>{});
    }
    return sc;
  }

  const std::size_t n = params.units;
  const std::size_t q = params.isotropy ? *params.isotropy : 1 + rng.below(4);
  sc.groupoid = pair_times_cyclic(n, q);
  sc.bundle = HilbertBundle::constant(n, params.dim, params.field);
  const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
  const bool perturb = kind == GenKind::perturbed;
  if (params.field == Field::real) {
    auto m = detail::gen_groupoid_model<double>(rng, g, sc.bundle, n, q, perturb, params.delta);
    resolve_model(m, g, sc.bundle, sc.transformation, sc.tolerances.algebra);
    sc.model = std::move(m);
  } else {
    auto m = detail::gen_groupoid_model<std::complex<double>>(rng, g, sc.bundle, n, q, perturb, params.delta);
    resolve_model(m, g, sc.bundle, sc.transformation, sc.tolerances.algebra);
    sc.model = std::move(m);
  }
  return sc;
}

}  // namespace cocycle_lab
