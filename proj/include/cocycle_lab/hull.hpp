#pragma once

// Convex hulls of small point sets kept as vertex lists (V-polytopes), with
// exact projection onto the hull by Wolfe's minimum-norm-point method.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cocycle_lab/errors.hpp"

namespace cocycle_lab {

struct HullProjection {
  Eigen::VectorXd point;
  double distance = 0.0;
};

/// Nearest point of conv(vertices) to q.
inline HullProjection project_onto_hull(const std::vector<Eigen::VectorXd>& vertices, const Eigen::VectorXd& q) {
  if (vertices.empty()) throw EmptyInput("projection onto the hull of no points");
  const std::size_t n = vertices.size();
  std::vector<Eigen::VectorXd> p;
  p.reserve(n);
  double scale = 0.0;
  for (const auto& v : vertices) {
    p.push_back(v - q);
    scale = std::max(scale, p.back().squaredNorm());
  }
  if (scale == 0.0) return {q, 0.0};
  const double eps = 1e-13 * scale;

  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (p[i].squaredNorm() < p[first].squaredNorm()) first = i;
  std::vector<std::size_t> s{first};
  std::vector<double> w{1.0};
  Eigen::VectorXd x = p[first];

  auto combine = [&] {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < s.size(); ++i) out += w[i] * p[s[i]];
    return out;
  };

  for (std::size_t major = 0; major < 20 * (n + static_cast<std::size_t>(x.size())) + 50; ++major) {
    std::size_t j = 0;
    double best = x.dot(p[0]);
    for (std::size_t i = 1; i < n; ++i)
      if (const double d = x.dot(p[i]); d < best) {
        best = d;
        j = i;
      }
    if (x.squaredNorm() - best <= eps) break;
    if (std::find(s.begin(), s.end(), j) != s.end()) break;
    s.push_back(j);
    w.push_back(0.0);

    for (std::size_t minor = 0; minor < 4 * n + 10; ++minor) {
      const auto k = static_cast<Eigen::Index>(s.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b)
          kkt(a, b) = p[s[static_cast<std::size_t>(a)]].dot(p[s[static_cast<std::size_t>(b)]]);
        kkt(a, k) = 1.0;
        kkt(k, a) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      rhs(k) = 1.0;
      const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      const Eigen::VectorXd alpha = sol.head(k);

      if (alpha.minCoeff() > 1e-14) {
        for (Eigen::Index a = 0; a < k; ++a) w[static_cast<std::size_t>(a)] = alpha(a);
        break;
      }
      double theta = 1.0;
      for (Eigen::Index a = 0; a < k; ++a) {
        const double wa = w[static_cast<std::size_t>(a)];
        if (alpha(a) <= 1e-14 && wa - alpha(a) > 0.0) theta = std::min(theta, wa / (wa - alpha(a)));
      }
      for (Eigen::Index a = 0; a < k; ++a) {
        auto& wa = w[static_cast<std::size_t>(a)];
        wa = (1.0 - theta) * wa + theta * alpha(a);
      }
      // drop vanished weights, always at least the smallest
      const auto smallest = static_cast<std::size_t>(std::min_element(w.begin(), w.end()) - w.begin());
      std::vector<std::size_t> s2;
      std::vector<double> w2;
      for (std::size_t a = 0; a < s.size(); ++a)
        if (a != smallest && w[a] > 1e-14) {
          s2.push_back(s[a]);
          w2.push_back(w[a]);
        }
      if (s2.empty()) {
        s2.push_back(s[smallest]);
        w2.push_back(1.0);
      }
      const double total = [&] {
        double t = 0.0;
        for (double v : w2) t += v;
        return t;
      }();
      for (double& v : w2) v /= total;
      s = std::move(s2);
      w = std::move(w2);
    }
    x = combine();
  }
  return {x + q, x.norm()};
}

inline double distance_to_hull(const std::vector<Eigen::VectorXd>& vertices, const Eigen::VectorXd& q) {
  return project_onto_hull(vertices, q).distance;
}

/// Extreme points of a finite set: duplicates and points inside the hull of
/// the others are removed (relative tolerance `rel_tol` of the set's extent).
inline std::vector<Eigen::VectorXd> hull_vertices(std::vector<Eigen::VectorXd> pts, double rel_tol = 1e-12) {
  if (pts.size() <= 1) return pts;
  double extent = 0.0;
  for (const auto& a : pts) extent = std::max(extent, (a - pts.front()).norm());
  const double tol = rel_tol * std::max(extent, 1.0);
  for (std::size_t i = 0; i < pts.size() && pts.size() > 1;) {
    std::vector<Eigen::VectorXd> others;
    others.reserve(pts.size() - 1);
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) others.push_back(pts[j]);
    if (distance_to_hull(others, pts[i]) <= tol) {
      pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return pts;
}

}  // namespace cocycle_lab
