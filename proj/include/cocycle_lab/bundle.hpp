#pragma once

// Finite-dimensional Hilbert bundles over a groupoid's unit space, isometric
// actions, cocycles and the affine action they define.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocycle_lab/groupoid.hpp"
#include "cocycle_lab/linalg.hpp"
#include "cocycle_lab/transformation.hpp"

namespace cocycle_lab {

inline constexpr double kDefaultTol = 1e-9;

struct HilbertBundle {
  std::vector<std::size_t> dims;
  Field field = Field::real;

  static HilbertBundle constant(std::size_t n_units, std::size_t dim, Field field = Field::real) {
    return {std::vector<std::size_t>(n_units, dim), field};
  }

  std::size_t n_units() const noexcept { return dims.size(); }
  Eigen::Index dim(UnitId x) const { return static_cast<Eigen::Index>(dims.at(x)); }
  bool is_constant() const {
    return std::adjacent_find(dims.begin(), dims.end(), std::not_equal_to<>()) == dims.end();
  }
};

template <Scalar S>
struct BundleVector {
  UnitId unit = 0;
  Vec<S> coords;
};

template <Scalar S>
struct Section {
  using scalar_type = S;
  std::vector<Vec<S>> values;

  static Section zero(const HilbertBundle& e) {
    Section f;
    for (std::size_t d : e.dims) f.values.push_back(Vec<S>::Zero(static_cast<Eigen::Index>(d)));
    return f;
  }

  static Section random(const HilbertBundle& e, Rng& rng) {
    Section f;
    for (std::size_t d : e.dims) f.values.push_back(rng.vector<S>(static_cast<Eigen::Index>(d)));
    return f;
  }

  const Vec<S>& operator()(UnitId x) const { return values.at(x); }
  BundleVector<S> at(UnitId x) const { return {x, values.at(x)}; }
};

template <Scalar S>
struct IsometricAction {
  using scalar_type = S;
  std::vector<Mat<S>> mats;

  template <Groupoid G>
  static IsometricAction trivial(const G& g, const HilbertBundle& e) {
    IsometricAction l;
    l.mats.reserve(g.n_arrows());
    for (ArrowId a = 0; a < g.n_arrows(); ++a)
      l.mats.push_back(Mat<S>::Identity(e.dim(g.rng(a)), e.dim(g.src(a))));
    return l;
  }

  const Mat<S>& operator()(ArrowId a) const { return mats.at(a); }
};

template <Scalar S>
struct Cocycle {
  using scalar_type = S;
  std::vector<Vec<S>> values;

  template <Groupoid G>
  static Cocycle zero(const G& g, const HilbertBundle& e) {
    Cocycle c;
    c.values.reserve(g.n_arrows());
    for (ArrowId a = 0; a < g.n_arrows(); ++a) c.values.push_back(Vec<S>::Zero(e.dim(g.rng(a))));
    return c;
  }

  const Vec<S>& operator()(ArrowId a) const { return values.at(a); }
};

namespace detail {

inline double isometry_defect(const auto& m) {
  if (m.rows() != m.cols()) return 1.0;
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<std::decay_t<decltype(m.eval())>> svd(m);
  const auto& sv = svd.singularValues();
  return std::max(std::abs(sv.maxCoeff() - 1.0), std::abs(sv.minCoeff() - 1.0));
}

template <Groupoid G>
void check_shapes(const G& g, const HilbertBundle& e, std::size_t n_values, const char* what) {
  if (e.n_units() != g.n_units())
    throw ShapeMismatch("bundle declares " + std::to_string(e.n_units()) + " fibers for " +
                        std::to_string(g.n_units()) + " units");
  if (n_values != g.n_arrows())
    throw ShapeMismatch(std::string(what) + " has " + std::to_string(n_values) + " entries for " +
                        std::to_string(g.n_arrows()) + " arrows");
}

}  // namespace detail

/// Checks that L is a functorial family of surjective isometries within tol
/// (operator norm). Shapes are preconditions and throw ShapeMismatch.
template <Groupoid G, Scalar S>
ValidationReport validate_action(const G& g, const HilbertBundle& e, const IsometricAction<S>& l,
                                 double tol = kDefaultTol) {
  detail::check_shapes(g, e, l.mats.size(), "action");
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    const auto& m = l(a);
    if (m.rows() != e.dim(g.rng(a)) || m.cols() != e.dim(g.src(a)))
      throw ShapeMismatch("L(" + std::to_string(a) + ") is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", fibers need " + std::to_string(e.dim(g.rng(a))) +
                          "x" + std::to_string(e.dim(g.src(a))));
  }

  ValidationReport rep;
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    if (e.dim(g.rng(a)) != e.dim(g.src(a))) {
      rep.add("orbit_dimension_mismatch", {a});
      continue;
    }
    const double iso = detail::isometry_defect(l(a));
    if (iso > tol) rep.add("isometry", {a}, iso);
    const double inv = operator_norm(l(g.inverse(a)) - l(a).adjoint());
    if (inv > tol) rep.add("inverse_adjoint", {a, g.inverse(a)}, inv);
  }
  for (UnitId x = 0; x < g.n_units(); ++x) {
    const ArrowId u = g.unit_arrow(x);
    const double d = operator_norm(l(u) - Mat<S>::Identity(e.dim(x), e.dim(x)));
    if (d > tol) rep.add("unit_identity", {u}, d);
  }
  for_each_composition(g, [&](ArrowId a, ArrowId b, ArrowId ab) {
    if (l(a).cols() != l(b).rows()) return;
    const double d = operator_norm(l(ab) - l(a) * l(b));
    if (d > tol) rep.add("functoriality", {a, b, ab}, d);
  });
  return rep;
}

/// Completes an action from matrices given on a generating set of arrows
/// (e.g. a spanning tree plus isotropy generators) by closing under
/// composition and adjoints. Throws ValidationError when the generators do
/// not reach every arrow or imply inconsistent values.
template <Scalar S, Groupoid G>
IsometricAction<S> complete_action(const G& g, const HilbertBundle& e,
                                   const std::vector<std::pair<ArrowId, Mat<S>>>& generators,
                                   double tol = kDefaultTol) {
  std::vector<std::optional<Mat<S>>> known(g.n_arrows());
  std::vector<ArrowId> frontier;
  auto assign = [&](ArrowId a, Mat<S> m) {
    if (known[a]) {
      const double d = operator_norm(*known[a] - m);
      if (d > tol)
        throw ValidationError("action completion is inconsistent at arrow " + std::to_string(a) +
                              " (defect " + std::to_string(d) + ")");
      return;
    }
    known[a] = std::move(m);
    frontier.push_back(a);
  };
  for (UnitId x = 0; x < g.n_units(); ++x) assign(g.unit_arrow(x), Mat<S>::Identity(e.dim(x), e.dim(x)));
  for (const auto& [a, m] : generators) {
    if (a >= g.n_arrows()) throw ValidationError("generator references arrow id " + std::to_string(a));
    if (m.rows() != e.dim(g.rng(a)) || m.cols() != e.dim(g.src(a)))
      throw ShapeMismatch("generator for arrow " + std::to_string(a) + " has the wrong shape");
    assign(a, m);
  }

  // Every new arrow is combined with all known arrows on both sides, so each
  // defined product of known arrows is formed (and cross-checked) once.
  while (!frontier.empty()) {
    const ArrowId a = frontier.back();
    frontier.pop_back();
    const Mat<S> la = *known[a];
    assign(g.inverse(a), la.adjoint());
    for (ArrowId b : g.range_fiber(g.src(a)))
      if (known[b])
        if (auto ab = g.compose(a, b)) assign(*ab, la * *known[b]);
    for (ArrowId b : g.source_fiber(g.rng(a)))
      if (known[b])
        if (auto ba = g.compose(b, a)) assign(*ba, *known[b] * la);
  }

  IsometricAction<S> l;
  l.mats.reserve(g.n_arrows());
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    if (!known[a])
      throw ValidationError("action generators do not reach arrow " + std::to_string(a));
    l.mats.push_back(std::move(*known[a]));
  }
  return l;
}

struct CocycleCheck {
  /// max over composable pairs of ‖c(γγ') − c(γ) − L(γ)c(γ')‖
  double max_defect = 0.0;
  /// max over units of ‖c(unit)‖
  double unit_defect = 0.0;
  /// max over arrows of ‖c(γ⁻¹) + L(γ⁻¹)c(γ)‖
  double inverse_defect = 0.0;
  std::optional<std::pair<ArrowId, ArrowId>> worst_pair;
  bool passed = true;
};

template <Groupoid G, Scalar S>
CocycleCheck check_cocycle(const G& g, const IsometricAction<S>& l, const Cocycle<S>& c,
                           double tol = kDefaultTol) {
  if (c.values.size() != g.n_arrows() || l.mats.size() != g.n_arrows())
    throw ShapeMismatch("cocycle/action must have one entry per arrow");
  CocycleCheck out;
  for_each_composition(g, [&](ArrowId a, ArrowId b, ArrowId ab) {
    const double d = (c(ab) - c(a) - l(a) * c(b)).norm();
    if (!out.worst_pair || d > out.max_defect) {
      out.max_defect = d;
      out.worst_pair = {a, b};
    }
  });
  for (UnitId x = 0; x < g.n_units(); ++x) out.unit_defect = std::max(out.unit_defect, c(g.unit_arrow(x)).norm());
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    const ArrowId inv = g.inverse(a);
    out.inverse_defect = std::max(out.inverse_defect, (c(inv) + l(inv) * c(a)).norm());
  }
  out.passed = out.max_defect <= tol;
  return out;
}

/// δf(γ) = f(r(γ)) − L(γ) f(s(γ)).
template <Groupoid G, Scalar S>
Cocycle<S> coboundary(const G& g, const IsometricAction<S>& l, const Section<S>& f) {
  if (f.values.size() != g.n_units()) throw ShapeMismatch("section must have one value per unit");
  Cocycle<S> c;
  c.values.reserve(g.n_arrows());
  for (ArrowId a = 0; a < g.n_arrows(); ++a) c.values.push_back(f(g.rng(a)) - l(a) * f(g.src(a)));
  return c;
}

/// max over arrows of ‖c(γ) − δf(γ)‖.
template <Groupoid G, Scalar S>
double coboundary_residual(const G& g, const IsometricAction<S>& l, const Cocycle<S>& c,
                           const Section<S>& f) {
  double r = 0.0;
  for (ArrowId a = 0; a < g.n_arrows(); ++a)
    r = std::max(r, (c(a) - f(g.rng(a)) + l(a) * f(g.src(a))).norm());
  return r;
}

/// γu = L(γ)u + c(γ), a point of the fiber over r(γ).
template <Groupoid G, Scalar S>
BundleVector<S> affine_apply(const G& g, ArrowId a, const BundleVector<S>& u,
                             const IsometricAction<S>& l, const Cocycle<S>& c) {
  if (u.unit != g.src(a))
    throw FiberMismatch("vector lives over unit " + std::to_string(u.unit) + " but arrow " +
                        std::to_string(a) + " has source " + std::to_string(g.src(a)));
  return {g.rng(a), l(a) * u.coords + c(a)};
}

/// W(γ, u) = (γ⁻¹, γu).
template <Groupoid G, Scalar S>
std::pair<ArrowId, BundleVector<S>> involution_W(const G& g, ArrowId a, const BundleVector<S>& u,
                                                 const IsometricAction<S>& l, const Cocycle<S>& c) {
  return {g.inverse(a), affine_apply(g, a, u, l, c)};
}

/// Σ_{i<m} f(T^i x) − Σ_{j<n} f(T^j y). Throws BadWitness unless T^m x = T^n y.
template <Scalar S>
S birkhoff_sum(const TransformationSystem& sys, std::span<const S> f, UnitId x, std::size_t m, UnitId y,
               std::size_t n) {
  if (f.size() != sys.n_points()) throw ShapeMismatch("potential must have one value per point");
  if (sys.iterate(x, m) != sys.iterate(y, n))
    throw BadWitness("T^" + std::to_string(m) + "(" + std::to_string(x) + ") != T^" + std::to_string(n) +
                     "(" + std::to_string(y) + ")");
  S total{};
  for (std::size_t i = 0; i < m; ++i, x = sys(x)) total += f[x];
  for (std::size_t j = 0; j < n; ++j, y = sys(y)) total -= f[y];
  return total;
}

template <Scalar S>
struct BirkhoffValue {
  S value{};
  /// max |value(witness) − value| over every witness with m, n ≤ m_max
  double witness_discrepancy = 0.0;
  std::size_t witnesses_checked = 0;
};

/// c_f on one windowed arrow, cross-checked over all of its witnesses.
template <Scalar S>
BirkhoffValue<S> birkhoff_cocycle(const WindowedTG& wtg, std::span<const S> f, ArrowId a) {
  const auto& t = wtg.triple(a);
  BirkhoffValue<S> out;
  out.value = birkhoff_sum(wtg.system(), f, t.x, t.m, t.y, t.n);
  for (const auto& [m, n] : wtg.witnesses(a)) {
    out.witness_discrepancy =
        std::max(out.witness_discrepancy, std::abs(birkhoff_sum(wtg.system(), f, t.x, m, t.y, n) - out.value));
    ++out.witnesses_checked;
  }
  return out;
}

/// c_f on every windowed arrow (stored witnesses), as a cocycle of the
/// trivial action on the constant 1-dimensional bundle.
template <Scalar S>
Cocycle<S> birkhoff_cocycle_field(const WindowedTG& wtg, std::span<const S> f) {
  Cocycle<S> c;
  c.values.reserve(wtg.n_arrows());
  for (const auto& t : wtg.triples()) {
    Vec<S> v(1);
    v(0) = birkhoff_sum(wtg.system(), f, t.x, t.m, t.y, t.n);
    c.values.push_back(std::move(v));
  }
  return c;
}

template <Scalar S>
double psi(const Cocycle<S>& c, ArrowId a) {
  return c(a).squaredNorm();
}

/// Largest positive eigenvalue of K_ij = ψ(γᵢ⁻¹γⱼ), γᵢ ranging over G^x,
/// restricted to zero-sum coefficient vectors (0 when negative semidefinite).
template <Groupoid G>
double check_cnd(const G& g, const std::function<double(ArrowId)>& psi_fn, UnitId x) {
  const auto gx = g.range_fiber(x);
  const auto p = static_cast<Eigen::Index>(gx.size());
  if (p < 2) return 0.0;
  Eigen::MatrixXd k(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      auto prod = g.compose(g.inverse(gx[static_cast<std::size_t>(i)]), gx[static_cast<std::size_t>(j)]);
      if (!prod) throw DomainError("check_cnd needs γᵢ⁻¹γⱼ defined for every pair in the fiber");
      k(i, j) = psi_fn(*prod);
    }
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::VectorXd::Ones(p));
  const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).rightCols(p - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q.transpose() * sym * q, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().maxCoeff());
}

template <Groupoid G, Scalar S>
double check_cnd(const G& g, const Cocycle<S>& c, UnitId x) {
  return check_cnd(g, [&c](ArrowId a) { return psi(c, a); }, x);
}

}  // namespace cocycle_lab
