#pragma once

#include "hglab/common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace hglab {

// Planar convex hull (monotone chain) that keeps collinear boundary points:
// maximal segments in hull boundaries are detected downstream as collinear
// vertex runs, so interior-of-edge samples must survive.
struct Hull2D {
  std::vector<Eigen::Vector2d> vertices;  // ccw order, collinear points kept
  struct Edge {
    Eigen::Vector2d normal;  // inside satisfies normal . x <= offset
    double offset;
    int from, to;  // vertex indices
  };
  std::vector<Edge> edges;
};

namespace detail {
inline double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                     const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}
}  // namespace detail

inline Hull2D convex_hull_2d(std::vector<Eigen::Vector2d> pts, double eps = 1e-12) {
  require(pts.size() >= 3, Err::DegenerateDomain, "hull needs at least 3 points");
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&](const auto& a, const auto& b) { return (a - b).norm() <= eps; }),
            pts.end());
  require(pts.size() >= 3, Err::DegenerateDomain, "hull needs at least 3 distinct points");

  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  double tol = 1e-12 * std::max(1.0, scale * scale);

  // Strictly clockwise turns only are popped, so collinear boundary points
  // survive on both chains.
  std::vector<Eigen::Vector2d> lower, upper;
  {
    std::vector<Eigen::Vector2d> chain;
    for (const auto& p : pts) {
      while (chain.size() >= 2 &&
             detail::cross2(chain[chain.size() - 2], chain.back(), p) <= -tol)
        chain.pop_back();
      chain.push_back(p);
    }
    lower = std::move(chain);
  }
  {
    std::vector<Eigen::Vector2d> chain;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      while (chain.size() >= 2 &&
             detail::cross2(chain[chain.size() - 2], chain.back(), *it) <= -tol)
        chain.pop_back();
      chain.push_back(*it);
    }
    upper = std::move(chain);
  }

  Hull2D hull;
  hull.vertices.assign(lower.begin(), lower.end() - 1);
  hull.vertices.insert(hull.vertices.end(), upper.begin(), upper.end() - 1);
  int n = static_cast<int>(hull.vertices.size());
  require(n >= 3, Err::DegenerateDomain, "degenerate hull");

  for (int i = 0; i < n; ++i) {
    const auto& a = hull.vertices[i];
    const auto& b = hull.vertices[(i + 1) % n];
    Eigen::Vector2d dir = b - a;
    if (dir.norm() <= eps) continue;
    Eigen::Vector2d normal(dir.y(), -dir.x());  // outward for ccw order
    normal.normalize();
    hull.edges.push_back({normal, normal.dot(a), i, (i + 1) % n});
  }
  return hull;
}

}  // namespace hglab
