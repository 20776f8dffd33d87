#pragma once

#include "hglab/domains.hpp"
#include "hglab/projective.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <vector>

namespace hglab {

// Standard projective k-simplex spanned by [e_1] ... [e_{k+1}], as a
// polytope inside its projective span of P(R^d).
inline ConvexDomain build_simplex(int k, int d) {
  require(2 <= k + 1 && k + 1 <= d, Err::BadDimensions, "need 2 <= k+1 <= d");
  int n = k + 1;
  std::vector<Vec> covs;
  for (int i = 0; i < n; ++i) {
    Vec c = Vec::Zero(n);
    c[i] = 1.0;
    covs.push_back(c);
  }
  ConvexDomain dom = ConvexDomain::make_polytope(n, covs, Vec::Ones(n));
  if (n < d) {
    Mat embed = Mat::Zero(d, n);
    embed.topRows(n) = Mat::Identity(n, n);
    dom.set_ambient_embedding(embed);
  }
  return dom;
}

// Beltrami-Klein model: ellipsoid x_1^2 + ... + x_{d-1}^2 - x_d^2 < 0.
inline ConvexDomain build_klein_ball(int d) {
  require(d >= 2, Err::BadDimensions, "Klein ball needs d >= 2");
  Mat q = Mat::Identity(d, d);
  q(d - 1, d - 1) = -1.0;
  Vec w = Vec::Zero(d);
  w[d - 1] = 1.0;
  return ConvexDomain::make_ellipsoid(q, w);
}

// Hyperbolic boost of rapidity t along the first chart axis of the Klein
// ball in P(R^d): translation length t on the axis geodesic.
inline ProjectiveMap klein_boost(int d, double t) {
  Mat m = Mat::Identity(d, d);
  m(0, 0) = std::cosh(t);
  m(0, d - 1) = std::sinh(t);
  m(d - 1, 0) = std::sinh(t);
  m(d - 1, d - 1) = std::cosh(t);
  return ProjectiveMap(m);
}

inline ProjectiveMap klein_rotation(int d, int i, int j, double angle) {
  Mat m = Mat::Identity(d, d);
  m(i, i) = std::cos(angle);
  m(i, j) = -std::sin(angle);
  m(j, i) = std::sin(angle);
  m(j, j) = std::cos(angle);
  return ProjectiveMap(m);
}

// Convex hull of the Klein disk and the dual point of the horizontal axis
// geodesic: both axis endpoints land in the closure of the two tangent
// segments through the dual point.
inline ConvexDomain build_example_5_1(int arc_samples = 512, int tangent_samples = 24) {
  std::vector<ProjectivePoint> pts;
  // Lower circle arc between the tangency points (1,0) and (-1,0),
  // passing through (0,-1); the upper arc is swallowed by the hull.
  for (int i = 0; i <= arc_samples; ++i) {
    double th = -M_PI * i / arc_samples;  // 0 .. -pi
    Vec v(3);
    v << std::cos(th), std::sin(th), 1.0;
    pts.emplace_back(v);
  }
  // The dual point: intersection of the tangents x = 1 and x = -1, i.e. the
  // vertical infinity of this chart.
  Vec dual(3);
  dual << 0.0, 1.0, 0.0;
  pts.emplace_back(dual);
  // Points along the two tangent segments so collinear runs are detectable.
  for (int side : {-1, 1}) {
    for (int i = 1; i < tangent_samples; ++i) {
      // Projective segment from (side, 0, 1) to (0, 1, 0): lifts interpolate.
      double s = static_cast<double>(i) / tangent_samples;
      Vec v(3);
      v << (1.0 - s) * side, s, (1.0 - s);
      pts.emplace_back(v);
    }
  }
  Vec anchor(3);
  anchor << 0.0, 1.0, 2.0;  // positive on the lower arc, the dual point, and the tangents
  return ConvexDomain::make_hull(pts, 3, anchor);
}

// Graph domain in P(R^3): chart region above y = |x|^p, capped by the
// chords from (+-1, 1) to the apex (0, cap_height).
inline ConvexDomain build_graph_domain(double p, double cap_height = 2.0) {
  return ConvexDomain::make_graph(p, cap_height);
}

struct CoxeterHull {
  ConvexDomain domain;
  std::vector<ProjectiveMap> generators;
  std::vector<ProjectivePoint> limit_points;
};

namespace detail {
struct EigenGaps {
  bool top_simple = false, bottom_simple = false;
  double top_gap = 0.0, bottom_gap = 0.0;  // relative modulus gaps
  Vec top_vector, bottom_vector;           // real eigenvectors when simple
  std::vector<double> moduli;              // sorted nonincreasing
};

inline EigenGaps eigen_gaps(const Mat& m) {
  Eigen::EigenSolver<Mat> es(m);
  int d = static_cast<int>(m.rows());
  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  auto mod = [&](int i) { return std::abs(es.eigenvalues()[i]); };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return mod(a) > mod(b); });
  EigenGaps out;
  for (int i : order) out.moduli.push_back(mod(i));
  out.top_gap = (out.moduli[0] - out.moduli[1]) / out.moduli[0];
  out.bottom_gap = (out.moduli[d - 2] - out.moduli[d - 1]) / std::max(out.moduli[d - 2], 1e-300);
  out.top_simple = out.top_gap > 0.0 && std::abs(es.eigenvalues()[order[0]].imag()) <
                                            1e-12 * std::abs(es.eigenvalues()[order[0]]);
  out.bottom_simple = out.bottom_gap > 0.0 && std::abs(es.eigenvalues()[order[d - 1]].imag()) <
                                                  1e-12 * std::abs(es.eigenvalues()[order[d - 1]]);
  if (out.top_simple) out.top_vector = es.eigenvectors().col(order[0]).real();
  if (out.bottom_simple) out.bottom_vector = es.eigenvectors().col(order[d - 1]).real();
  return out;
}

// Attracting fixed point of a proximal matrix to machine precision: repeated
// squaring drives the normalized power to rank one; a residual check rejects
// words whose top eigenvalue dominates too weakly for the point to be
// reliable (those would pollute the sampled limit set with noise).
inline bool attracting_fixed_point(const Mat& m, Vec* out) {
  Mat p = m / m.cwiseAbs().maxCoeff();
  for (int i = 0; i < 12; ++i) {
    p = p * p;
    double s = p.cwiseAbs().maxCoeff();
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    p /= s;
  }
  Vec seed(m.rows());
  for (int i = 0; i < seed.size(); ++i) seed[i] = 1.0 / (1.0 + i);
  Vec v = p * seed;
  if (v.norm() < 1e-8) return false;
  v.normalize();
  Vec mv = m * v;
  double lambda = v.dot(mv);
  double resid = (mv - lambda * v).norm() / m.cwiseAbs().maxCoeff();
  if (resid > 1e-13) return false;
  *out = v;
  return true;
}
}  // namespace detail

// Rank-3 projective reflection group from a Cartan matrix: generators
// sigma_j = Id - v_j (x) e_j^* with v_j the j-th column of C. The domain is
// the chart hull of attracting fixed points of proximal words up to `depth`,
// closed under the generator action, and is flagged sampled.
inline CoxeterHull build_coxeter_hull(const std::array<int, 3>& orders,
                                      const std::array<double, 6>& offdiag, int depth) {
  const double m12 = orders[0], m13 = orders[1], m23 = orders[2];
  require(1.0 / m12 + 1.0 / m13 + 1.0 / m23 < 1.0, Err::BadCartanData,
          "orders must admit a hyperbolic triangle group");
  Mat c = 2.0 * Mat::Identity(3, 3);
  c(0, 1) = offdiag[0];
  c(1, 0) = offdiag[1];
  c(0, 2) = offdiag[2];
  c(2, 0) = offdiag[3];
  c(1, 2) = offdiag[4];
  c(2, 1) = offdiag[5];
  auto check_pair = [&](int i, int j, double m) {
    require(c(i, j) < 0 && c(j, i) < 0, Err::BadCartanData, "off-diagonal entries must be < 0");
    double target = 4.0 * sqr(std::cos(M_PI / m));
    require(std::abs(c(i, j) * c(j, i) - target) < 1e-9, Err::BadCartanData,
            "c_ij c_ji must equal 4 cos^2(pi/m_ij)");
  };
  check_pair(0, 1, m12);
  check_pair(0, 2, m13);
  check_pair(1, 2, m23);

  std::vector<ProjectiveMap> gens;
  for (int j = 0; j < 3; ++j) {
    Mat r = Mat::Identity(3, 3) - c.col(j) * Vec::Unit(3, j).transpose();
    gens.push_back(ProjectiveMap(r, /*normalize_det=*/false));
  }

  // All reduced words (no immediate repetition; generators are involutions).
  std::vector<ProjectivePoint> pts;
  struct Node {
    Mat m;
    int last;
  };
  std::vector<Node> frontier{{Mat::Identity(3, 3), -1}};
  for (int len = 1; len <= depth; ++len) {
    std::vector<Node> next;
    for (const auto& node : frontier) {
      for (int j = 0; j < 3; ++j) {
        if (j == node.last) continue;
        Node child{node.m * gens[j].matrix(), j};
        auto gaps = detail::eigen_gaps(child.m);
        if (gaps.top_simple && gaps.moduli[0] / gaps.moduli[1] > 1.0 + tol::proximal_gap) {
          Vec fp;
          if (detail::attracting_fixed_point(child.m, &fp)) pts.emplace_back(fp);
        }
        next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  require(pts.size() >= 10, Err::NotProximalEnough, "too few proximal words at this depth");

  // Deduplicate via lexicographic sort plus a local window scan.
  auto dedup = [](std::vector<ProjectivePoint> in) {
    std::sort(in.begin(), in.end(), [](const ProjectivePoint& a, const ProjectivePoint& b) {
      for (int i = 0; i < 3; ++i)
        if (a.coords()[i] != b.coords()[i]) return a.coords()[i] < b.coords()[i];
      return false;
    });
    std::vector<ProjectivePoint> out;
    for (const auto& q : in) {
      bool found = false;
      for (auto it = out.rbegin(); it != out.rend(); ++it) {
        if (q.coords()[0] - it->coords()[0] > 1e-11) break;
        if (q.approx_equal(*it, 1e-12)) {
          found = true;
          break;
        }
      }
      if (!found) out.push_back(q);
    }
    return out;
  };
  auto closure_round = [&](const std::vector<ProjectivePoint>& in) {
    std::vector<ProjectivePoint> grown = in;
    for (const auto& q : in)
      for (const auto& g : gens) grown.push_back(g.apply(q));
    return dedup(std::move(grown));
  };

  // The limit set is generator-invariant but a finite sample cannot be, so
  // the domain hull is built from one closure round and a second round is
  // kept as the reference list: the generator image of every hull point is
  // present there exactly.
  std::vector<ProjectivePoint> s1 = closure_round(dedup(std::move(pts)));
  std::vector<ProjectivePoint> s2 = closure_round(s1);

  // Dual chamber covector: positive on the whole Tits cone, hence on the
  // limit set (pairing of the dual fundamental chamber with the Tits cone).
  Vec anchor = c.transpose().fullPivLu().solve(Vec::Ones(3));
  CoxeterHull out{ConvexDomain::make_hull(s1, 3, anchor), gens, std::move(s2)};
  return out;
}

// Half-disk with the open segment ([e_2],[e_3]) in its boundary and [e_1] on
// the curved arc: the domain of the simplex-rescaling experiment.
inline ConvexDomain build_example_3_6_domain(int arc_samples = 512, int chord_samples = 64) {
  // Chart with coordinates (u, v) -> [1-u-v : u : v]; the circle through
  // (0,0), (1,0), (0,1) has the chord from (1,0) to (0,1) as a diameter.
  Mat frame(3, 3);
  frame.col(0) << -1, 1, 0;  // d/du
  frame.col(1) << -1, 0, 1;  // d/dv
  frame.col(2) << 1, 0, 0;   // origin [1:0:0]
  Vec inf(3);
  inf << 1, 1, 1;
  AffineChart chart(ProjectiveHyperplane(inf), frame);

  std::vector<ProjectivePoint> pts;
  for (int i = 0; i <= arc_samples; ++i) {
    // Lower branch from (1,0) (angle -45) through (0,0) (225) to (0,1) (135).
    double phi = -M_PI / 4.0 - (M_PI)*i / arc_samples;
    double r = std::sqrt(0.5);
    Vec x(2);
    x << 0.5 + r * std::cos(phi), 0.5 + r * std::sin(phi);
    pts.push_back(chart.from_chart(x));
  }
  for (int i = 0; i <= chord_samples; ++i) {
    double s = static_cast<double>(i) / chord_samples;
    Vec x(2);
    x << 1.0 - s, s;
    pts.push_back(chart.from_chart(x));
  }
  Vec anchor(3);
  anchor << 1.0, 1.0, 1.0;  // coordinate sum is 1 on every chart lift
  return ConvexDomain::make_hull(pts, 3, anchor);
}

}  // namespace hglab
