#include "hglab/domain_builders.hpp"
#include "hglab/domains.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace hglab;

namespace {

ProjectivePoint P3(double a, double b, double c) { return point_from({a, b, c}); }

TEST(Contains, SimplexBarycenterVertexAndDisk) {
  ConvexDomain simplex = build_simplex(2, 3);
  EXPECT_EQ(simplex.contains(P3(1, 1, 1)), Location::Interior);
  EXPECT_EQ(simplex.contains(P3(1, 0, 0)), Location::Boundary);
  EXPECT_EQ(simplex.contains(P3(1, -1, 1)), Location::Exterior);

  ConvexDomain disk = build_klein_ball(3);
  EXPECT_EQ(disk.contains(P3(2, 0, 1)), Location::Exterior);
  EXPECT_EQ(disk.contains(P3(1, 0, 1)), Location::Boundary);
  EXPECT_EQ(disk.contains(P3(0.3, -0.2, 1)), Location::Interior);
}

TEST(Chord, UnitDiskHorizontal) {
  ConvexDomain disk = build_klein_ball(3);
  auto [a, b] = disk.chord(P3(0, 0, 1), P3(0.5, 0, 1));
  EXPECT_TRUE(a.approx_equal(P3(-1, 0, 1), 1e-10));
  EXPECT_TRUE(b.approx_equal(P3(1, 0, 1), 1e-10));
}

TEST(Chord, SimplexMinRatioHitsActiveConstraint) {
  ConvexDomain simplex = build_simplex(2, 3);
  // Chart points (1/3,1/3) and (1/2,1/4) in the x+y<1 chart equal
  // projective points [1/3 : 1/3 : 1/3] and [1/2 : 1/4 : 1/4].
  ProjectivePoint x = P3(1, 1, 1);
  ProjectivePoint y = P3(2, 1, 1);
  auto [a, b] = simplex.chord(x, y);
  EXPECT_EQ(simplex.contains(a), Location::Boundary);
  EXPECT_EQ(simplex.contains(b), Location::Boundary);
  // Each endpoint saturates at least one facet exactly.
  auto active_count = [&](const ProjectivePoint& z) {
    int n = 0;
    Vec lift = z.coords();
    for (const auto& c : simplex.polytope().covectors)
      if (std::abs(c.dot(lift)) < 1e-12) ++n;
    return n;
  };
  EXPECT_GE(active_count(a), 1);
  EXPECT_GE(active_count(b), 1);
}

TEST(Chord, SwapSymmetryAndErrors) {
  ConvexDomain disk = build_klein_ball(3);
  auto [a1, b1] = disk.chord(P3(0.1, 0.2, 1), P3(-0.3, 0.4, 1));
  auto [a2, b2] = disk.chord(P3(-0.3, 0.4, 1), P3(0.1, 0.2, 1));
  EXPECT_TRUE(a1.approx_equal(b2, 1e-9));
  EXPECT_TRUE(b1.approx_equal(a2, 1e-9));
  EXPECT_THROW(disk.chord(P3(2, 0, 1), P3(0, 0, 1)), Error);
  EXPECT_THROW(disk.chord(P3(0.1, 0, 1), P3(0.1, 0, 1)), Error);
}

TEST(Chord, ProjectiveEquivariance) {
  Rng rng(321);
  auto disk = build_klein_ball(3);
  for (int t = 0; t < 50; ++t) {
    ProjectivePoint x = P3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 1);
    ProjectivePoint y = P3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 1);
    if (x.approx_equal(y, 1e-3)) continue;
    ProjectiveMap g(Mat(rng.gaussian_matrix(3, 3) + 3.0 * Mat::Identity(3, 3)));
    ConvexDomain gdisk = disk.transformed(g);
    auto [a, b] = disk.chord(x, y);
    auto [ga, gb] = gdisk.chord(g.apply(x), g.apply(y));
    EXPECT_TRUE(ga.approx_equal(g.apply(a), 1e-8));
    EXPECT_TRUE(gb.approx_equal(g.apply(b), 1e-8));
  }
}

TEST(Supports, CountsAtSimplexAndEllipsoid) {
  ConvexDomain simplex = build_simplex(2, 3);
  EXPECT_EQ(simplex.supporting_hyperplanes(P3(1, 0, 0)).size(), 2u);
  EXPECT_EQ(simplex.supporting_hyperplanes(P3(1, 1, 0)).size(), 1u);
  ConvexDomain disk = build_klein_ball(3);
  auto sups = disk.supporting_hyperplanes(P3(1, 0, 1));
  ASSERT_EQ(sups.size(), 1u);
  EXPECT_NEAR(sups[0].eval(P3(1, 0, 1)), 0.0, 1e-10);
  EXPECT_THROW(simplex.supporting_hyperplanes(P3(1, 1, 1)), Error);
}

TEST(Supports, ValidityOnSampledInteriorPoints) {
  Rng rng(5150);
  ConvexDomain simplex = build_simplex(2, 3);
  ConvexDomain disk = build_klein_ball(3);
  std::vector<std::pair<const ConvexDomain*, ProjectivePoint>> cases = {
      {&simplex, P3(1, 0, 0)}, {&simplex, P3(1, 1, 0)}, {&disk, P3(1, 0, 1)},
      {&disk, P3(0, -1, 1)}};
  for (auto& [dom, z] : cases) {
    for (const auto& h : dom->supporting_hyperplanes(z)) {
      for (int i = 0; i < 1000; ++i) {
        Vec dir = rng.gaussian_vector(2).normalized();
        double r = rng.uniform(0.0, 0.999);
        Vec w = dom->chart().to_chart(dom->interior_witness());
        // Sample along the chord towards the boundary.
        Vec x = w + r * (dom->chart().to_chart(dom->boundary_in_direction(dir)) - w);
        ProjectivePoint p = dom->chart().from_chart(x);
        if (dom->contains(p) != Location::Interior) continue;
        Vec lift = p.coords();
        if (lift.dot(dom->interior_witness().coords()) < 0) lift = -lift;
        EXPECT_GE(h.covector().dot(lift), -1e-10);
      }
    }
  }
}

TEST(FaceOf, SimplexLatticeAndEllipsoid) {
  ConvexDomain simplex = build_simplex(2, 3);
  EXPECT_EQ(simplex.face_of(P3(1, 1, 0)).dimension, 1);
  EXPECT_EQ(simplex.face_of(P3(1, 0, 0)).dimension, 0);
  ConvexDomain disk = build_klein_ball(3);
  EXPECT_EQ(disk.face_of(P3(0, 1, 1)).dimension, 0);
  // dimension = d - 1 - rank(active covectors)
  auto fd = simplex.face_of(P3(1, 1, 0));
  EXPECT_EQ(fd.dimension, 3 - 1 - static_cast<int>(fd.active.size()));
}

TEST(BuildSimplex, FacetsVerticesAndEmbedding) {
  ConvexDomain s = build_simplex(2, 3);
  EXPECT_EQ(s.polytope().covectors.size(), 3u);
  EXPECT_EQ(s.contains(P3(1, 1, 1)), Location::Interior);
  EXPECT_EQ(s.contains(P3(0, 1, 0)), Location::Boundary);

  ConvexDomain embedded = build_simplex(2, 4);
  EXPECT_EQ(embedded.contains(point_from({1, 1, 1, 0})), Location::Interior);
  EXPECT_EQ(embedded.contains(point_from({1, 1, 1, 0.1})), Location::Exterior);
  EXPECT_EQ(embedded.contains(point_from({1, 0, 0, 0})), Location::Boundary);
}

TEST(BuildKleinBall, CenterBoundaryStrictness) {
  ConvexDomain ball = build_klein_ball(4);
  EXPECT_EQ(ball.contains(point_from({0, 0, 0, 1})), Location::Interior);
  EXPECT_EQ(ball.contains(point_from({1, 0, 0, 1})), Location::Boundary);
  EXPECT_TRUE(ball.strictly_convex());
  EXPECT_EQ(ball.face_of(point_from({0, 1, 0, 1})).dimension, 0);
  EXPECT_TRUE(ball.boundary_segments().empty());
}

TEST(BoundarySegments, SimplexHasThreeMaximalSegments) {
  ConvexDomain simplex = build_simplex(2, 3);
  auto segs = simplex.boundary_segments();
  EXPECT_EQ(segs.size(), 3u);
  for (const auto& s : segs) {
    EXPECT_EQ(simplex.contains(s.a), Location::Boundary);
    EXPECT_EQ(simplex.contains(s.b), Location::Boundary);
  }
}

TEST(Example51, SegmentsSupportsAndClassification) {
  ConvexDomain dom = build_example_5_1();
  auto segs = dom.boundary_segments();
  ASSERT_EQ(segs.size(), 2u);

  // The axis endpoints (+-1, 0) lie in the closure of the tangent segments.
  auto cls = dom.classify_boundary_point(P3(1, 0, 1));
  EXPECT_EQ(cls.classification, BoundaryClass::InSegmentClosure);
  auto cls2 = dom.classify_boundary_point(P3(-1, 0, 1));
  EXPECT_EQ(cls2.classification, BoundaryClass::InSegmentClosure);

  // Klein-disk interior points are interior.
  EXPECT_EQ(dom.contains(P3(0, 0, 1)), Location::Interior);
  EXPECT_EQ(dom.contains(P3(0.3, 0.6, 1)), Location::Interior);

  // The dual point has exactly two incident hull facets.
  auto sups = dom.supporting_hyperplanes(P3(0, 1, 0));
  EXPECT_EQ(sups.size(), 2u);
}

TEST(GraphDomain, ParabolaSupportsAndMembership) {
  ConvexDomain g2 = build_graph_domain(2.0);
  EXPECT_EQ(g2.contains(P3(0, 0.5, 1)), Location::Interior);
  EXPECT_EQ(g2.contains(P3(0, 0, 1)), Location::Boundary);
  EXPECT_EQ(g2.contains(P3(0.5, 0.1, 1)), Location::Exterior);
  // Boundary near the origin is the parabola arc.
  for (double u : {-0.3, 0.1, 0.25}) {
    EXPECT_EQ(g2.contains(P3(u, u * u, 1)), Location::Boundary);
  }
  auto sups = g2.supporting_hyperplanes(P3(0, 0, 1));
  ASSERT_EQ(sups.size(), 1u);
  // Unique support at the origin is y = 0.
  EXPECT_NEAR(std::abs(sups[0].covector().dot(Vec(P3(1, 0, 1).coords()))), 0.0, 1e-9);
  EXPECT_THROW(build_graph_domain(1.0), Error);
  EXPECT_THROW(build_graph_domain(0.5), Error);
}

TEST(CoxeterHull, SymmetricCartanGivesConic) {
  double c12 = -2.0 * std::cos(M_PI / 3), c13 = -2.0 * std::cos(M_PI / 3),
         c23 = -2.0 * std::cos(M_PI / 4);
  auto res = build_coxeter_hull({3, 3, 4}, {c12, c12, c13, c13, c23, c23}, 12);
  std::vector<Eigen::Vector2d> pts;
  for (const auto& v : res.domain.hull().chart_vertices) pts.emplace_back(v[0], v[1]);
  double resid = oracle::max_conic_residual(pts);
  EXPECT_LT(resid, 1e-3);
}

TEST(CoxeterHull, AsymmetricCartanIsNotConic) {
  double c13 = -1.0, c23 = -std::sqrt(2.0);
  auto res = build_coxeter_hull({3, 3, 4}, {-2.0, -0.5, c13, c13, c23, c23}, 12);
  std::vector<Eigen::Vector2d> pts;
  for (const auto& v : res.domain.hull().chart_vertices) pts.emplace_back(v[0], v[1]);
  double resid = oracle::max_conic_residual(pts);
  EXPECT_GT(resid, 1e-2);
}

TEST(CoxeterHull, GeneratorsPreserveHullVertices) {
  double c13 = -1.0, c23 = -std::sqrt(2.0);
  auto res = build_coxeter_hull({3, 3, 4}, {-2.0, -0.5, c13, c13, c23, c23}, 10);
  const auto& verts = res.domain.hull().chart_vertices;
  std::vector<ProjectivePoint> vpts;
  for (const auto& v : verts) vpts.push_back(res.domain.chart().from_chart(v));
  // Hull vertices are sampled limit points, and each generator image of a
  // hull vertex is again a sampled limit point (the finite-sample face of
  // limit-set invariance; the sample itself cannot be literally closed).
  for (const auto& g : res.generators) {
    for (size_t i = 0; i < vpts.size(); i += 7) {
      ProjectivePoint img = g.apply(vpts[i]);
      double best = 1e9;
      for (const auto& q : res.limit_points) best = std::min(best, img.chordal_to(q));
      EXPECT_LT(best, 1e-9);
    }
  }
  for (size_t i = 0; i < vpts.size(); i += 13) {
    double best = 1e9;
    for (const auto& q : res.limit_points) best = std::min(best, vpts[i].chordal_to(q));
    EXPECT_LT(best, 1e-9);
  }
  EXPECT_THROW(build_coxeter_hull({3, 3, 4}, {-2.0, -0.4, c13, c13, c23, c23}, 8), Error);
  EXPECT_THROW(build_coxeter_hull({2, 4, 4}, {-1.0, -1.0, c13, c13, c23, c23}, 8), Error);
}

TEST(Example36Domain, HalfDiskShape) {
  ConvexDomain dom = build_example_3_6_domain();
  // [e2], [e3] on the boundary, the segment between them too, [e1] on the arc.
  EXPECT_EQ(dom.contains(P3(0, 1, 0)), Location::Boundary);
  EXPECT_EQ(dom.contains(P3(0, 0, 1)), Location::Boundary);
  EXPECT_EQ(dom.contains(P3(1, 0, 0)), Location::Boundary);
  EXPECT_EQ(dom.contains(P3(0, 1, 1)), Location::Boundary);  // midpoint m of the segment
  // ([e1], [m]) inside.
  EXPECT_EQ(dom.contains(P3(2, 1, 1)), Location::Interior);
  auto segs = dom.boundary_segments();
  ASSERT_EQ(segs.size(), 1u);
}

}  // namespace
