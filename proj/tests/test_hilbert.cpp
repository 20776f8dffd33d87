#include "hglab/hilbert.hpp"

#include <gtest/gtest.h>

#include <memory>

#include "hglab/domain_builders.hpp"
#include "oracles.hpp"

using namespace hglab;

namespace {

ProjectivePoint P3(double a, double b, double c) { return point_from({a, b, c}); }

std::shared_ptr<const ConvexDomain> disk_ptr() {
  return std::make_shared<const ConvexDomain>(build_klein_ball(3));
}
std::shared_ptr<const ConvexDomain> simplex_ptr() {
  return std::make_shared<const ConvexDomain>(build_simplex(2, 3));
}

TEST(HilbertDistance, KleinRadialClosedForm) {
  auto disk = disk_ptr();
  EXPECT_NEAR(hilbert_distance(*disk, P3(0, 0, 1), P3(0.5, 0, 1)), oracle::klein_radial(0.5),
              1e-12);
  EXPECT_NEAR(hilbert_distance(*disk, P3(0, 0, 1), P3(0.5, 0, 1)), 0.5493061443340549, 1e-9);
  Rng rng(101);
  for (int i = 0; i < 1000; ++i) {
    double r = rng.uniform(0.0, 0.95);
    double th = rng.uniform(0.0, 2 * M_PI);
    ProjectivePoint y = P3(r * std::cos(th), r * std::sin(th), 1);
    EXPECT_NEAR(hilbert_distance(*disk, P3(0, 0, 1), y), oracle::klein_radial(r), 1e-9);
  }
}

TEST(HilbertDistance, KleinGeneralPairsMatchCayleyKlein) {
  auto disk = disk_ptr();
  Rng rng(102);
  for (int i = 0; i < 1000; ++i) {
    Vec u(2), v(2);
    u << rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9);
    v << rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9);
    if (u.norm() >= 0.97 || v.norm() >= 0.97 || (u - v).norm() < 1e-6) continue;
    EXPECT_NEAR(hilbert_distance(*disk, P3(u[0], u[1], 1), P3(v[0], v[1], 1)),
                oracle::klein_distance(u, v), 1e-9);
  }
}

TEST(HilbertDistance, SimplexFormulaOracle) {
  auto simplex = simplex_ptr();
  // [1:1:1] to [2:1:1/2] has distance log 2.
  EXPECT_NEAR(hilbert_distance(*simplex, P3(1, 1, 1), P3(2, 1, 0.5)), std::log(2.0), 1e-12);
  Rng rng(103);
  for (int i = 0; i < 1000; ++i) {
    Vec x(3), y(3);
    for (int k = 0; k < 3; ++k) {
      x[k] = std::exp(rng.uniform(-2.0, 2.0));
      y[k] = std::exp(rng.uniform(-2.0, 2.0));
    }
    EXPECT_NEAR(hilbert_distance(*simplex, ProjectivePoint(x), ProjectivePoint(y)),
                oracle::simplex_distance(x, y), 1e-9);
  }
}

TEST(HilbertDistance, IdenticalPointsAndErrors) {
  auto disk = disk_ptr();
  EXPECT_EQ(hilbert_distance(*disk, P3(0.1, 0.2, 1), P3(0.1, 0.2, 1)), 0.0);
  EXPECT_THROW(hilbert_distance(*disk, P3(1, 0, 1), P3(0, 0, 1)), Error);
}

TEST(HilbertDistance, MetricAxiomsOnBuiltInDomains) {
  Rng rng(104);
  auto disk = disk_ptr();
  auto simplex = simplex_ptr();
  auto interior_disk = [&]() {
    double r = std::sqrt(rng.uniform(0.0, 0.9));
    double th = rng.uniform(0.0, 2 * M_PI);
    return P3(r * std::cos(th), r * std::sin(th), 1);
  };
  auto interior_simplex = [&]() {
    Vec x(3);
    for (int k = 0; k < 3; ++k) x[k] = std::exp(rng.uniform(-2.0, 2.0));
    return ProjectivePoint(x);
  };
  for (int i = 0; i < 1000; ++i) {
    for (int which = 0; which < 2; ++which) {
      const ConvexDomain& dom = which ? *simplex : *disk;
      ProjectivePoint a = which ? interior_simplex() : interior_disk();
      ProjectivePoint b = which ? interior_simplex() : interior_disk();
      ProjectivePoint c = which ? interior_simplex() : interior_disk();
      if (a.approx_equal(b, 1e-6) || b.approx_equal(c, 1e-6) || a.approx_equal(c, 1e-6)) continue;
      double ab = hilbert_distance(dom, a, b);
      double ba = hilbert_distance(dom, b, a);
      double ac = hilbert_distance(dom, a, c);
      double cb = hilbert_distance(dom, c, b);
      EXPECT_NEAR(ab, ba, 1e-12);
      EXPECT_LE(ab, ac + cb + 1e-9);
    }
  }
}

TEST(HilbertDistance, IsometryInvariance) {
  Rng rng(105);
  auto disk = disk_ptr();
  auto simplex = simplex_ptr();
  std::vector<ProjectiveMap> disk_isoms = {klein_boost(3, 0.8), klein_rotation(3, 0, 1, 1.1),
                                           klein_boost(3, -1.5)};
  Mat diag = Mat::Zero(3, 3);
  diag.diagonal() << 2.0, 1.0, 0.5;
  std::vector<ProjectiveMap> simplex_isoms = {ProjectiveMap(diag)};
  for (int i = 0; i < 300; ++i) {
    ProjectivePoint x = P3(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), 1);
    ProjectivePoint y = P3(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), 1);
    if (x.approx_equal(y, 1e-6)) continue;
    for (const auto& g : disk_isoms) {
      EXPECT_NEAR(hilbert_distance(*disk, x, y),
                  hilbert_distance(*disk, g.apply(x), g.apply(y)), 1e-8);
    }
    Vec sx(3), sy(3);
    for (int k = 0; k < 3; ++k) {
      sx[k] = std::exp(rng.uniform(-1.5, 1.5));
      sy[k] = std::exp(rng.uniform(-1.5, 1.5));
    }
    for (const auto& g : simplex_isoms) {
      EXPECT_NEAR(hilbert_distance(*simplex, ProjectivePoint(sx), ProjectivePoint(sy)),
                  hilbert_distance(*simplex, g.apply(ProjectivePoint(sx)),
                                   g.apply(ProjectivePoint(sy))),
                  1e-8);
    }
  }
  // Coxeter generators act by isometries of the sampled hull metric.
  double c13 = -1.0, c23 = -std::sqrt(2.0);
  auto cox = build_coxeter_hull({3, 3, 4}, {-2.0, -0.5, c13, c13, c23, c23}, 10);
  const ConvexDomain& dom = cox.domain;
  ProjectivePoint w = dom.interior_witness();
  Rng rng2(106);
  for (int i = 0; i < 40; ++i) {
    Vec d1(2), d2(2);
    double t1 = rng2.uniform(0, 2 * M_PI), t2 = rng2.uniform(0, 2 * M_PI);
    d1 << std::cos(t1), std::sin(t1);
    d2 << std::cos(t2), std::sin(t2);
    ProjectivePoint x = point_at_distance(dom, w, d1, rng2.uniform(0.1, 2.0));
    ProjectivePoint y = point_at_distance(dom, w, d2, rng2.uniform(0.1, 2.0));
    if (x.approx_equal(y, 1e-6)) continue;
    for (const auto& g : cox.generators) {
      ProjectivePoint gx = g.apply(x), gy = g.apply(y);
      if (dom.contains(gx) != Location::Interior || dom.contains(gy) != Location::Interior)
        continue;
      // The polygonal approximation carries facet sagitta error, so the
      // sampled-domain tolerance is far wider than the exact-domain 1e-8.
      EXPECT_NEAR(hilbert_distance(dom, x, y), hilbert_distance(dom, gx, gy), 5e-3);
    }
  }
}

TEST(Geodesic, UnitSpeedDefinitionalChecks) {
  auto disk = disk_ptr();
  Geodesic axis = Geodesic::line(disk, P3(-1, 0, 1), P3(1, 0, 1));
  EXPECT_TRUE(axis.at(0.0).approx_equal(P3(0, 0, 1), 1e-9));
  EXPECT_TRUE(axis.at(1.0).approx_equal(P3(std::tanh(1.0), 0, 1), 1e-10));
  Rng rng(107);
  for (int i = 0; i < 200; ++i) {
    double s = rng.uniform(-3.0, 3.0), t = rng.uniform(-3.0, 3.0);
    EXPECT_NEAR(hilbert_distance(*disk, axis.at(s), axis.at(t)), std::abs(s - t), 1e-8);
  }
  EXPECT_THROW(axis.at(301.0), Error);

  Geodesic seg = Geodesic::segment(disk, P3(0, 0, 1), P3(0.5, 0, 1));
  EXPECT_NEAR(seg.t_hi(), oracle::klein_radial(0.5), 1e-10);
  EXPECT_THROW(seg.at(seg.t_hi() + 0.5), Error);

  // Unit-speed parameterization also holds away from the origin and on
  // non-symmetric domains.
  auto simplex = simplex_ptr();
  Geodesic sgeo = Geodesic::segment(simplex, P3(1, 1, 1), P3(5, 2, 1));
  for (int i = 0; i < 100; ++i) {
    double s = rng.uniform(sgeo.t_lo(), sgeo.t_hi());
    double t = rng.uniform(sgeo.t_lo(), sgeo.t_hi());
    EXPECT_NEAR(hilbert_distance(*simplex, sgeo.at(s), sgeo.at(t)), std::abs(s - t), 1e-8);
  }
}

TEST(Projection, PointOnGeodesicAndPerpendicularFoot) {
  auto disk = disk_ptr();
  Geodesic axis = Geodesic::line(disk, P3(-1, 0, 1), P3(1, 0, 1));
  auto on = nearest_point_projection(*disk, axis, axis.at(0.7), 0.05, -10, 10);
  EXPECT_NEAR(on.distance, 0.0, 1e-7);
  EXPECT_LE(on.t_lo, 0.7 + 1e-4);
  EXPECT_GE(on.t_hi, 0.7 - 1e-4);

  auto foot = nearest_point_projection(*disk, axis, P3(0, 0.5, 1), 0.05, -10, 10);
  EXPECT_NEAR(0.5 * (foot.t_lo + foot.t_hi), 0.0, 1e-3);
  EXPECT_NEAR(foot.distance, oracle::klein_radial(0.5), 1e-6);
}

TEST(Projection, SimplexPlateauMatchesHexOracle) {
  auto simplex = simplex_ptr();
  // Geodesic through [1:1:1] towards [1:0:0], i.e. u = log(x1/x3) varies,
  // v = log(x2/x3) = 0. Query at log coords (1, 2): hex oracle gives a
  // minimizing plateau u in [-1, 1] (unit-speed parameter [-1/2, 1/2]) at
  // distance 1.
  Geodesic geo = Geodesic::line(simplex_ptr(), P3(0, 1, 1), P3(1, 0, 0));
  ProjectivePoint x = ProjectivePoint(Vec(Eigen::Vector3d(std::exp(1.0), std::exp(2.0), 1.0)));
  auto pr = nearest_point_projection(*simplex, geo, x, 0.02, -10, 10);
  EXPECT_NEAR(pr.distance, 1.0, 1e-6);
  EXPECT_GT(pr.t_hi - pr.t_lo, 0.5);  // genuine plateau

  // Grid oracle at 10x finer resolution agrees on the plateau ends.
  auto dist = [&](double t) { return hilbert_distance(*simplex, x, geo.at(t)); };
  double lo = 10, hi = -10;
  for (double t = -5; t <= 5; t += 0.002) {
    if (dist(t) <= pr.distance + 1e-6) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  EXPECT_NEAR(pr.t_lo, lo, 0.01);
  EXPECT_NEAR(pr.t_hi, hi, 0.01);

  // Connectedness at grid resolution: no gaps inside the plateau.
  for (double t = pr.t_lo + 0.01; t < pr.t_hi; t += 0.05) {
    EXPECT_LE(dist(t), pr.distance + 1e-5);
  }
}

TEST(Projection, ConnectednessOnRandomSegments) {
  auto simplex = simplex_ptr();
  Rng rng(108);
  for (int trial = 0; trial < 200; ++trial) {
    Vec a(3), b(3);
    for (int k = 0; k < 3; ++k) {
      a[k] = std::exp(rng.uniform(-1.5, 1.5));
      b[k] = std::exp(rng.uniform(-1.5, 1.5));
    }
    ProjectivePoint pa(a), pb(b);
    if (pa.approx_equal(pb, 1e-6)) continue;
    Geodesic target = Geodesic::line(simplex_ptr(), P3(0, 1, 1), P3(1, 0, 0));
    Geodesic seg = Geodesic::segment(simplex_ptr(), pa, pb);
    // Projected parameter set of the segment: union over samples of
    // minimizing intervals; must form one interval (no gaps) at resolution.
    std::vector<std::pair<double, double>> intervals;
    for (int i = 0; i <= 20; ++i) {
      double t = seg.t_lo() + (seg.t_hi() - seg.t_lo()) * i / 20;
      auto pr = nearest_point_projection(*simplex, target, seg.at(t), 0.05, -12, 12);
      intervals.push_back({pr.t_lo, pr.t_hi});
    }
    std::sort(intervals.begin(), intervals.end());
    for (size_t i = 1; i < intervals.size(); ++i) {
      // Allow gaps up to the sampling resolution of the segment itself.
      double gap = intervals[i].first - intervals[i - 1].second;
      double seg_step = (seg.t_hi() - seg.t_lo()) / 20.0;
      EXPECT_LE(gap, seg_step + 0.2);
    }
  }
}

TEST(Hausdorff, IdenticalAndAsymptoticRays)
{
  auto disk = disk_ptr();
  Geodesic g1 = Geodesic::ray(disk, P3(0, 0, 1), P3(1, 0, 1));
  EXPECT_NEAR(hausdorff_distance_geodesics(*disk, g1, g1, 40, 0, 8), 0.0, 1e-6);

  // Rays from different basepoints to the same boundary point: bounded
  // Hausdorff distance with decreasing tail (windows stay inside the
  // numeric range of both rays).
  Geodesic g2 = Geodesic::ray(disk, P3(0, 0.4, 1), P3(1, 0, 1));
  double early = 0, late = 0;
  for (int i = 0; i <= 10; ++i) {
    double t = 0.2 * i;
    early = std::max(early, distance_to_geodesic(*disk, g2, g1.at(t), 0.05, 0, 30));
  }
  for (int i = 0; i <= 10; ++i) {
    double t = 4.0 + 0.2 * i;
    late = std::max(late, distance_to_geodesic(*disk, g2, g1.at(t), 0.05, 0, 30));
  }
  EXPECT_LT(late, early);
  EXPECT_LT(late, 0.1);
}

TEST(Hausdorff, SimplexRaysToSameEdgeFaceMetricBound) {
  auto simplex = simplex_ptr();
  // Rays from the barycenter to two points in the open edge x3 = 0.
  ProjectivePoint z1 = P3(1, 1, 0), z2 = P3(2, 1, 0);
  Geodesic r1 = Geodesic::ray(simplex_ptr(), P3(1, 1, 1), z1);
  Geodesic r2 = Geodesic::ray(simplex_ptr(), P3(1, 1, 1), z2);
  double haus = hausdorff_distance_geodesics(*simplex, r1, r2, 30, 0.0, 12.0);
  // Face Hilbert metric on the open edge spanned by e1, e2: the edge is a
  // 1-dimensional simplex, distance = (1/2) |log((x1 y2)/(x2 y1))|.
  double face = 0.5 * std::abs(std::log((1.0 * 1.0) / (1.0 * 2.0)));
  EXPECT_LE(haus, face + 0.1);
}

TEST(Contraction, KleinBoundedUnderRadiusDoubling) {
  auto disk = disk_ptr();
  Geodesic axis = Geodesic::line(disk, P3(-1, 0, 1), P3(1, 0, 1));
  ContractionSpec spec;
  spec.seed = 2024;
  spec.ball_count = 100;
  spec.radius = 0.75;
  auto small = contraction_profile(*disk, axis, spec);
  spec.radius = 1.5;
  auto big = contraction_profile(*disk, axis, spec);
  EXPECT_LE(big.max_projection_diameter, 5.0);
  EXPECT_LE(small.max_projection_diameter, 5.0);
  EXPECT_LT(big.max_projection_diameter / small.max_projection_diameter, 1.5);
}

TEST(Contraction, SimplexEdgeParallelGrowsWithRadius) {
  auto simplex = simplex_ptr();
  // Geodesic with both endpoints in open edges: [0:1:1] and [1:0:0]-side is
  // a vertex; use endpoints in the interiors of two edges instead.
  Geodesic geo = Geodesic::line(simplex_ptr(), P3(1, 2, 0), P3(0, 2, 1));
  ContractionSpec spec;
  spec.seed = 77;
  spec.ball_count = 60;
  double prev = 0.0;
  bool grew = true;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    spec.radius = r;
    auto prof = contraction_profile(*simplex, geo, spec);
    if (prof.max_projection_diameter <= prev) grew = false;
    prev = prof.max_projection_diameter;
  }
  EXPECT_TRUE(grew);
  EXPECT_GT(prev, 2.0);
}

TEST(Contraction, ZeroRadiusBallProjectsToAPoint) {
  auto disk = disk_ptr();
  Geodesic axis = Geodesic::line(disk, P3(-1, 0, 1), P3(1, 0, 1));
  ContractionSpec spec;
  spec.seed = 5;
  spec.ball_count = 10;
  spec.radius = 0.0;
  spec.extra_distance = 2.0;
  auto prof = contraction_profile(*disk, axis, spec);
  EXPECT_LT(prof.max_projection_diameter, 1e-3);  // point projection, interval slack only
}

TEST(Slimness, DegenerateTriangleIsZero) {
  auto disk = disk_ptr();
  Geodesic axis = Geodesic::line(disk, P3(-1, 0, 1), P3(1, 0, 1));
  // z on [x, y] gives r = 0: check directly.
  ProjectivePoint x = axis.at(-1.0), y = axis.at(1.0), z = axis.at(0.3);
  Geodesic xz = Geodesic::segment(disk, x, z);
  Geodesic zy = Geodesic::segment(disk, z, y);
  double r = 0;
  Geodesic xy = Geodesic::segment(disk, x, y);
  for (int i = 0; i <= 30; ++i) {
    double t = xy.t_lo() + (xy.t_hi() - xy.t_lo()) * i / 30;
    ProjectivePoint w = xy.at(t);
    double d1 = distance_to_geodesic(*disk, xz, w, 0.02, xz.t_lo(), xz.t_hi());
    double d2 = distance_to_geodesic(*disk, zy, w, 0.02, zy.t_lo(), zy.t_hi());
    r = std::max(r, std::min(d1, d2));
  }
  EXPECT_NEAR(r, 0.0, 1e-5);
}

TEST(Slimness, KleinThinSimplexFat) {
  auto disk = disk_ptr();
  Geodesic axis = Geodesic::line(disk, P3(-1, 0, 1), P3(1, 0, 1));
  SlimnessSpec spec;
  spec.seed = 31;
  spec.triangle_count = 200;
  auto prof = slimness_profile(*disk, axis, spec);
  // Hyperbolic thin-triangle constant log(1 + sqrt 2) plus sampling slack.
  EXPECT_LE(prof.max_required_r, std::log(1.0 + std::sqrt(2.0)) + 0.15);

  // Long edge-parallel configurations in the simplex: the required r grows
  // with the sampler reach, beyond the hyperbolic ceiling.
  auto simplex = simplex_ptr();
  Geodesic flat = Geodesic::line(simplex_ptr(), P3(0, 1, 1), P3(1, 0, 0));
  SlimnessSpec small_spec;
  small_spec.seed = 32;
  small_spec.triangle_count = 80;
  small_spec.t_span = 3.0;
  small_spec.z_offset_max = 4.0;
  auto small_prof = slimness_profile(*simplex, flat, small_spec);
  SlimnessSpec big_spec = small_spec;
  big_spec.t_span = 6.0;
  big_spec.z_offset_max = 8.0;
  auto big_prof = slimness_profile(*simplex, flat, big_spec);
  EXPECT_GT(big_prof.max_required_r, prof.max_required_r);
  EXPECT_GT(big_prof.max_required_r, small_prof.max_required_r + 0.5);
}

TEST(MaximumPrinciple, SegmentVsBallDistance) {
  auto disk = disk_ptr();
  auto simplex = simplex_ptr();
  Rng rng(109);
  for (int trial = 0; trial < 100; ++trial) {
    for (int which = 0; which < 2; ++which) {
      const ConvexDomain& dom = which ? *simplex : *disk;
      auto sample = [&]() {
        if (which == 0) {
          double r = std::sqrt(rng.uniform(0.0, 0.8));
          double th = rng.uniform(0.0, 2 * M_PI);
          return P3(r * std::cos(th), r * std::sin(th), 1);
        }
        Vec x(3);
        for (int k = 0; k < 3; ++k) x[k] = std::exp(rng.uniform(-1.0, 1.0));
        return ProjectivePoint(x);
      };
      ProjectivePoint u = sample(), v = sample(), c0 = sample();
      if (u.approx_equal(v, 1e-6)) continue;
      double rad = rng.uniform(0.1, 1.0);
      // Distance to a closed ball in a geodesic space: max(0, d(., c0) - rad).
      auto ball_dist = [&](const ProjectivePoint& p) {
        return std::max(0.0, hilbert_distance(dom, p, c0) - rad);
      };
      double cap = std::max(ball_dist(u), ball_dist(v));
      Geodesic seg = Geodesic::segment(which ? simplex_ptr() : disk_ptr(), u, v);
      for (int i = 1; i < 100; ++i) {
        double t = seg.t_lo() + (seg.t_hi() - seg.t_lo()) * i / 100;
        EXPECT_LE(ball_dist(seg.at(t)), cap + 1e-6);
      }
    }
  }
}

TEST(Collinearity, Fact24Directions) {
  auto disk = disk_ptr();
  auto simplex = simplex_ptr();
  // Collinear ordered triple: additivity holds.
  EXPECT_TRUE(
      geodesic_collinearity_check(*disk, P3(-0.5, 0, 1), P3(0.5, 0, 1), P3(0.2, 0, 1)));
  // Strictly convex domain, non-collinear: fails.
  EXPECT_FALSE(
      geodesic_collinearity_check(*disk, P3(-0.5, 0, 1), P3(0.5, 0, 1), P3(0, 0.3, 1)));
  // Simplex: non-collinear triple aligned with boundary segments satisfies
  // the additivity (non-uniqueness of Hilbert geodesics).
  EXPECT_TRUE(geodesic_collinearity_check(*simplex, P3(1, 1, 1), P3(4, 2, 1), P3(2, 2, 1)));
  // Sanity: that triple is really non-collinear.
  Mat m(3, 3);
  m.row(0) = P3(1, 1, 1).coords();
  m.row(1) = P3(4, 2, 1).coords();
  m.row(2) = P3(2, 2, 1).coords();
  EXPECT_GT(std::abs(m.determinant()), 1e-3);
}

TEST(SlimContracting, CouplingOnTestedGeodesics) {
  // Slim implies 24 delta contracting: with delta = 2 r_max the projection
  // diameter stays below 24 * delta plus sampling slack.
  auto disk = disk_ptr();
  Geodesic axis = Geodesic::line(disk, P3(-1, 0, 1), P3(1, 0, 1));
  SlimnessSpec sspec;
  sspec.seed = 41;
  sspec.triangle_count = 100;
  auto slim = slimness_profile(*disk, axis, sspec);
  ContractionSpec cspec;
  cspec.seed = 42;
  cspec.ball_count = 100;
  cspec.radius = 1.0;
  auto contr = contraction_profile(*disk, axis, cspec);
  EXPECT_LE(contr.max_projection_diameter, 24.0 * (2.0 * slim.max_required_r) + 0.5);
}

}  // namespace
