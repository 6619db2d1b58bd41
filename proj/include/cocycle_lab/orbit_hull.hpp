#pragma once

// Fiberwise convex hulls of affine orbits and their invariance under the
// affine action γu = L(γ)u + c(γ).

#include <algorithm>
#include <cstddef>
#include <vector>

#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/hull.hpp"

namespace cocycle_lab {

template <Scalar S>
struct AffineOrbitPoint {
  ArrowId arrow = 0;
  BundleVector<S> point;  // lives over rng(arrow)
};

/// Vertices of conv(A) ∩ E_x for every unit x (empty where A misses E_x),
/// in real coordinates.
struct OrbitHull {
  std::vector<std::vector<Eigen::VectorXd>> vertices;
};

struct HullInvarianceReport {
  /// max distance from an image vertex γv to conv(A_{r(γ)})
  double defect = 0.0;
  double cocycle_defect = 0.0;
  OrbitHull hull;
  std::size_t orbit_size = 0;
};

/// A = {γu : s(γ) = u.unit}, split by fiber.
template <Groupoid G, Scalar S>
std::vector<std::vector<Eigen::VectorXd>> affine_orbit(const G& g, const BundleVector<S>& u,
                                                       const IsometricAction<S>& l, const Cocycle<S>& c) {
  std::vector<std::vector<Eigen::VectorXd>> per_fiber(g.n_units());
  for (ArrowId a : g.source_fiber(u.unit)) {
    const auto img = affine_apply(g, a, u, l, c);
    per_fiber[img.unit].push_back(to_real<S>(img.coords));
  }
  return per_fiber;
}

/// Forms the fiberwise hull of the seed's orbit, pushes every hull vertex
/// through every arrow and measures how far the images land from the hull
/// of the target fiber. Zero (up to roundoff) for cocycles; a failing
/// cocycle identity is reported alongside, or thrown as CocycleDefect when
/// `require_cocycle` is set.
template <Groupoid G, Scalar S>
HullInvarianceReport orbit_hull_invariance_check(const G& g, const IsometricAction<S>& l, const Cocycle<S>& c,
                                                 const AffineOrbitPoint<S>& seed, double tol = kDefaultTol,
                                                 bool require_cocycle = false) {
  if (seed.point.unit != g.rng(seed.arrow))
    throw FiberMismatch("seed point must lie over the range of its arrow");
  HullInvarianceReport rep;
  const auto check = check_cocycle(g, l, c, tol);
  rep.cocycle_defect = check.max_defect;
  if (require_cocycle && !check.passed) throw CocycleDefect(check.max_defect, tol);

  auto orbit = affine_orbit(g, seed.point, l, c);
  rep.hull.vertices.resize(g.n_units());
  for (UnitId x = 0; x < g.n_units(); ++x) {
    rep.orbit_size += orbit[x].size();
    rep.hull.vertices[x] = hull_vertices(std::move(orbit[x]));
  }

  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    const auto& from = rep.hull.vertices[g.src(a)];
    const auto& to = rep.hull.vertices[g.rng(a)];
    if (from.empty()) continue;
    for (const auto& v : from) {
      const Vec<S> img = l(a) * from_real<S>(v) + c(a);
      const Eigen::VectorXd r = to_real<S>(img);
      const double d = to.empty() ? r.norm() : distance_to_hull(to, r);
      rep.defect = std::max(rep.defect, d);
    }
  }
  return rep;
}

}  // namespace cocycle_lab
