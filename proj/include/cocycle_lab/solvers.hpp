#pragma once

// Three independent routes to a section f with δf = c:
//   - solve_by_center: f(x) is the Chebyshev center of c(G^x). Composing
//     with γ maps c(G^{s(γ)}) onto c(G^{r(γ)}) by u ↦ L(γ)u + c(γ), an affine
//     isometry, which carries center to center.
//   - solve_least_squares: minimum-norm solution of the normal equations of
//     the linear coboundary operator.
//   - solve_transfer_function: scalar f = g − g∘T by partial sums along the
//     cycles of T.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/meb.hpp"

namespace cocycle_lab {

enum class SolveMethod { center, least_squares, transfer };

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::center: return "center";
    case SolveMethod::least_squares: return "lsq";
    case SolveMethod::transfer: return "transfer";
  }
  return "?";
}

template <Scalar S>
struct SolveReport {
  Section<S> section;
  double max_residual = 0.0;
  SolveMethod method = SolveMethod::center;
  /// max over G^x of ‖c(γ) − section(x)‖
  std::vector<double> per_fiber_radii;
  /// Dimension of the space of invariant sections (kernel of δ); filled by
  /// the least-squares solver.
  std::size_t gauge_dim = 0;
  bool not_minimal = false;
};

namespace detail {

template <Groupoid G, Scalar S>
std::vector<double> fiber_radii(const G& g, const Cocycle<S>& c, const Section<S>& f) {
  std::vector<double> radii(g.n_units(), 0.0);
  for (UnitId x = 0; x < g.n_units(); ++x)
    for (ArrowId a : g.range_fiber(x)) radii[x] = std::max(radii[x], (c(a) - f(x)).norm());
  return radii;
}

template <Groupoid G, Scalar S>
void finish(SolveReport<S>& rep, const G& g, const IsometricAction<S>& l, const Cocycle<S>& c) {
  rep.max_residual = coboundary_residual(g, l, c, rep.section);
  rep.per_fiber_radii = fiber_radii(g, c, rep.section);
  rep.not_minimal = !is_minimal(g);
}

}  // namespace detail

/// Throws CocycleDefect when c fails the cocycle identity at `cocycle_tol`.
/// Non-minimal groupoids are solved orbit by orbit and flagged.
template <Groupoid G, Scalar S>
SolveReport<S> solve_by_center(const G& g, const HilbertBundle& e, const IsometricAction<S>& l,
                               const Cocycle<S>& c, double cocycle_tol = kDefaultTol) {
  const auto check = check_cocycle(g, l, c, cocycle_tol);
  if (!check.passed) throw CocycleDefect(check.max_defect, cocycle_tol);

  SolveReport<S> rep;
  rep.method = SolveMethod::center;
  rep.section = Section<S>::zero(e);
  std::vector<Vec<S>> pts;
  for (UnitId x = 0; x < g.n_units(); ++x) {
    pts.clear();
    for (ArrowId a : g.range_fiber(x)) pts.push_back(c(a));
    if (pts.empty()) continue;
    rep.section.values[x] = min_enclosing_ball(pts, x, cocycle_tol).center.coords;
  }
  detail::finish(rep, g, l, c);
  return rep;
}

template <Groupoid G, Scalar S>
SolveReport<S> solve_least_squares(const G& g, const HilbertBundle& e, const IsometricAction<S>& l,
                                   const Cocycle<S>& c) {
  detail::check_shapes(g, e, c.values.size(), "cocycle");
  std::vector<Eigen::Index> offset(g.n_units() + 1, 0);
  for (UnitId x = 0; x < g.n_units(); ++x) offset[x + 1] = offset[x] + e.dim(x);
  const Eigen::Index n = offset.back();

  Mat<S> normal = Mat<S>::Zero(n, n);
  Vec<S> rhs = Vec<S>::Zero(n);
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    const UnitId r = g.rng(a);
    const UnitId s = g.src(a);
    const Eigen::Index dr = e.dim(r);
    const Eigen::Index ds = e.dim(s);
    const Mat<S>& m = l(a);
    normal.block(offset[r], offset[r], dr, dr) += Mat<S>::Identity(dr, dr);
    normal.block(offset[s], offset[s], ds, ds) += m.adjoint() * m;
    normal.block(offset[r], offset[s], dr, ds) -= m;
    normal.block(offset[s], offset[r], ds, dr) -= m.adjoint();
    rhs.segment(offset[r], dr) += c(a);
    rhs.segment(offset[s], ds) -= m.adjoint() * c(a);
  }

  SolveReport<S> rep;
  rep.method = SolveMethod::least_squares;
  rep.section = Section<S>::zero(e);
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Mat<S>> eig(normal);
    const auto& lambda = eig.eigenvalues();
    const double cutoff = 1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
    Vec<S> coef = eig.eigenvectors().adjoint() * rhs;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (lambda(i) <= cutoff) {
        coef(i) = S(0);
        ++rep.gauge_dim;
      } else {
        coef(i) /= lambda(i);
      }
    }
    const Vec<S> f = eig.eigenvectors() * coef;
    for (UnitId x = 0; x < g.n_units(); ++x) rep.section.values[x] = f.segment(offset[x], e.dim(x));
  }
  detail::finish(rep, g, l, c);
  return rep;
}

namespace detail {

template <class T>
bool near_zero(const T& v, double tol) {
  if constexpr (std::is_arithmetic_v<T> || is_complex_v<T>) {
    return std::abs(v) <= tol;
  } else {
    return v == T(0);
  }
}

template <class T>
double as_double(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return static_cast<double>(v);
  } else if constexpr (is_complex_v<T>) {
    return std::abs(v);
  } else {
    return static_cast<double>(v.numerator()) / static_cast<double>(v.denominator());
  }
}

}  // namespace detail

/// g with f(x) = g(x) − g(Tx) for every x. On each cycle x₀ → x₁ → ... the
/// values are partial sums g(x_{i+1}) = g(x_i) − f(x_i) from g(x₀) = 0 at the
/// cycle's smallest point; off the cycles g(x) = f(x) + g(Tx). Works for any
/// field-like T (double, complex, exact rationals); a cycle sum that is not
/// zero (|sum| ≤ tol for floating types) throws NotACoboundary.
template <class T>
std::vector<T> solve_transfer_function(const TransformationSystem& sys, std::span<const T> f, double tol = 1e-10) {
  const std::size_t np = sys.n_points();
  if (f.size() != np) throw ShapeMismatch("potential must have one value per point");
  std::vector<T> g(np, T(0));
  std::vector<bool> done(np, false);
  for (const auto& cyc : sys.cycles()) {
    T sum(0);
    for (UnitId x : cyc) sum += f[x];
    if (!detail::near_zero(sum, tol)) throw NotACoboundary(detail::as_double(sum), cyc.front());
    g[cyc.front()] = T(0);
    done[cyc.front()] = true;
    for (std::size_t i = 0; i + 1 < cyc.size(); ++i) {
      g[cyc[i + 1]] = g[cyc[i]] - f[cyc[i]];
      done[cyc[i + 1]] = true;
    }
  }
  std::vector<UnitId> path;
  for (UnitId start = 0; start < np; ++start) {
    path.clear();
    for (UnitId x = start; !done[x]; x = sys(x)) path.push_back(x);
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      g[*it] = f[*it] + g[sys(*it)];
      done[*it] = true;
    }
  }
  return g;
}

/// Transfer solve packaged as a SolveReport over the constant 1-dimensional
/// bundle; max_residual is max |f(x) − g(x) + g(Tx)|.
template <Scalar S>
SolveReport<S> solve_transfer_report(const TransformationSystem& sys, std::span<const S> f, double tol = 1e-10) {
  const auto g = solve_transfer_function<S>(sys, f, tol);
  SolveReport<S> rep;
  rep.method = SolveMethod::transfer;
  for (S v : g) {
    Vec<S> col(1);
    col(0) = v;
    rep.section.values.push_back(col);
  }
  for (UnitId x = 0; x < sys.n_points(); ++x)
    rep.max_residual = std::max(rep.max_residual, std::abs(f[x] - g[x] + g[sys(x)]));
  rep.not_minimal = sys.cycles().size() != 1;
  return rep;
}

}  // namespace cocycle_lab
