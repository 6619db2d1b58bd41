#pragma once

// Minimum enclosing ball (Chebyshev center) of a finite point set in one
// fiber. A few rounds of farthest-point averaging give a starting center;
// the exact ball is then found by support-set pivoting: keep the center
// equidistant from an affinely independent support set T with every point
// inside, walk toward the circumcenter of T inside aff(T) until another
// point reaches the sphere (add it), and once at the circumcenter drop the
// support point with negative barycentric weight. The center is optimal when
// it lies in conv(T).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cocycle_lab/bundle.hpp"
#include "cocycle_lab/errors.hpp"
#include "cocycle_lab/linalg.hpp"

namespace cocycle_lab {

template <Scalar S>
struct Ball {
  BundleVector<S> center;
  double radius = 0.0;
};

struct RealBall {
  Eigen::VectorXd center;
  double radius = 0.0;
  std::size_t pivots = 0;
};

struct MebOptions {
  double tol = kDefaultTol;
  /// Farthest-point averaging rounds before pivoting.
  std::size_t warm_iterations = 64;
};

namespace detail {

struct AffineCircumcenter {
  Eigen::VectorXd center;
  Eigen::VectorXd weights;  // barycentric, one per support point
};

inline AffineCircumcenter affine_circumcenter(const std::vector<Eigen::VectorXd>& pts,
                                              const std::vector<std::size_t>& support) {
  const auto& t0 = pts[support[0]];
  const auto k = static_cast<Eigen::Index>(support.size()) - 1;
  AffineCircumcenter out;
  out.weights = Eigen::VectorXd::Zero(k + 1);
  if (k == 0) {
    out.center = t0;
    out.weights(0) = 1.0;
    return out;
  }
  Eigen::MatrixXd a(t0.size(), k);
  for (Eigen::Index j = 0; j < k; ++j) a.col(j) = pts[support[static_cast<std::size_t>(j + 1)]] - t0;
  const Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd rhs = 0.5 * gram.diagonal();
  const Eigen::VectorXd alpha = gram.colPivHouseholderQr().solve(rhs);
  out.center = t0 + a * alpha;
  out.weights(0) = 1.0 - alpha.sum();
  out.weights.tail(k) = alpha;
  return out;
}

/// Distance from p − t0 to span{t_j − t0}, relative to ‖p − t0‖.
inline double relative_affine_residual(const std::vector<Eigen::VectorXd>& pts,
                                       const std::vector<std::size_t>& support, const Eigen::VectorXd& p) {
  const auto& t0 = pts[support[0]];
  const Eigen::VectorXd w = p - t0;
  const double wn = w.norm();
  if (wn == 0.0) return 0.0;
  const auto k = static_cast<Eigen::Index>(support.size()) - 1;
  if (k == 0) return 1.0;
  if (k >= t0.size()) return 0.0;
  Eigen::MatrixXd a(t0.size(), k);
  for (Eigen::Index j = 0; j < k; ++j) a.col(j) = pts[support[static_cast<std::size_t>(j + 1)]] - t0;
  const Eigen::VectorXd proj = a * a.colPivHouseholderQr().solve(w);
  return (w - proj).norm() / wn;
}

}  // namespace detail

inline RealBall min_enclosing_ball_real(const std::vector<Eigen::VectorXd>& pts, const MebOptions& opt = {}) {
  if (pts.empty()) throw EmptyInput("minimum enclosing ball of an empty point set");
  const Eigen::Index dim = pts.front().size();
  for (const auto& p : pts)
    if (p.size() != dim) throw FiberMismatch("points of different dimensions");
  const std::size_t n = pts.size();

  auto farthest = [&](const Eigen::VectorXd& c) {
    std::size_t best = 0;
    double bd = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (pts[i] - c).squaredNorm();
      if (d > bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  };

  Eigen::VectorXd c = pts.front();
  for (std::size_t k = 1; k <= opt.warm_iterations; ++k) {
    const auto& p = pts[farthest(c)];
    c += (p - c) / static_cast<double>(k + 1);
  }

  RealBall out;
  std::vector<std::size_t> support{farthest(c)};
  std::vector<bool> in_support(n, false);
  in_support[support[0]] = true;
  std::vector<bool> parked(n, false);
  const double scale = std::max((pts[support[0]] - c).norm(), 1e-300);

  const std::size_t max_pivots = 50 * (n + static_cast<std::size_t>(dim)) + 100;
  for (; out.pivots < max_pivots; ++out.pivots) {
    const auto target = detail::affine_circumcenter(pts, support);
    const Eigen::VectorXd v = target.center - c;
    const double vn = v.norm();
    const auto& t0 = pts[support[0]];
    const double r2 = (c - t0).squaredNorm();

    double step = 1.0;
    std::size_t stopper = n;
    if (vn > 1e-15 * scale) {
      for (std::size_t i = 0; i < n; ++i) {
        if (in_support[i] || parked[i]) continue;
        const double denom = 2.0 * v.dot(t0 - pts[i]);
        if (denom <= 1e-13 * vn * scale) continue;
        const double t = std::max(0.0, (r2 - (c - pts[i]).squaredNorm()) / denom);
        if (t < step) {
          step = t;
          stopper = i;
        }
      }
    }
    c += step * v;

    if (stopper < n) {
      if (detail::relative_affine_residual(pts, support, pts[stopper]) > 1e-10) {
        support.push_back(stopper);
        in_support[stopper] = true;
        continue;
      }
      // A dependent point on the sphere cannot tighten the ball further.
      parked[stopper] = true;
      continue;
    }

    Eigen::Index worst = 0;
    const double wmin = target.weights.minCoeff(&worst);
    if (wmin >= -1e-12 || support.size() == 1) break;
    in_support[support[static_cast<std::size_t>(worst)]] = false;
    support.erase(support.begin() + worst);
    std::fill(parked.begin(), parked.end(), false);
  }

  out.center = c;
  for (const auto& p : pts) out.radius = std::max(out.radius, (p - c).norm());
  return out;
}

template <Scalar S>
Ball<S> min_enclosing_ball(std::span<const BundleVector<S>> points, double tol = kDefaultTol) {
  if (points.empty()) throw EmptyInput("minimum enclosing ball of an empty point set");
  const UnitId unit = points.front().unit;
  std::vector<Eigen::VectorXd> real;
  real.reserve(points.size());
  for (const auto& p : points) {
    if (p.unit != unit) throw FiberMismatch("points of a ball must share one fiber");
    real.push_back(to_real<S>(p.coords));
  }
  const auto rb = min_enclosing_ball_real(real, MebOptions{tol});
  return {{unit, from_real<S>(rb.center)}, rb.radius};
}

/// Same-fiber coordinates without unit tags.
template <Scalar S>
Ball<S> min_enclosing_ball(const std::vector<Vec<S>>& points, UnitId unit, double tol = kDefaultTol) {
  if (points.empty()) throw EmptyInput("minimum enclosing ball of an empty point set");
  std::vector<Eigen::VectorXd> real;
  real.reserve(points.size());
  for (const auto& p : points) real.push_back(to_real<S>(p));
  const auto rb = min_enclosing_ball_real(real, MebOptions{tol});
  return {{unit, from_real<S>(rb.center)}, rb.radius};
}

}  // namespace cocycle_lab
