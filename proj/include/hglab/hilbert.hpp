#pragma once

#include "hglab/common.hpp"
#include "hglab/domains.hpp"
#include "hglab/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

namespace hglab {

// hil(x, y) = (1/2) log [a, b; x, y] with a, x, y, b ordered on the chord.
inline double hilbert_distance(const ConvexDomain& dom, const ProjectivePoint& x,
                               const ProjectivePoint& y) {
  require(dom.contains(x) == Location::Interior, Err::NotInterior, "hilbert_distance x");
  require(dom.contains(y) == Location::Interior, Err::NotInterior, "hilbert_distance y");
  // Below chordal 1e-13 the chord direction is pure rounding noise; the
  // chordal tolerance must stay this tight because a coarser cutoff would
  // flatten genuinely positive distances near the boundary, where Hilbert
  // balls are chordally tiny.
  if (x.approx_equal(y, 1e-13)) return 0.0;
  auto [a, b] = dom.chord(x, y);
  return 0.5 * std::log(cross_ratio(a, b, x, y));
}

// Unit-speed projective geodesic c(t) = [e^t v_b + e^{-t} v_a]; the lifts are
// scaled so that c(0) is the stored origin. Covers segments, rays, and
// bi-infinite lines through the parameter range.
class Geodesic {
 public:
  static Geodesic segment(std::shared_ptr<const ConvexDomain> dom, const ProjectivePoint& x,
                          const ProjectivePoint& y) {
    require(dom->contains(x) == Location::Interior, Err::NotInterior, "segment endpoint");
    require(dom->contains(y) == Location::Interior, Err::NotInterior, "segment endpoint");
    require(!x.approx_equal(y), Err::CoincidentPoints, "segment endpoints coincide");
    auto [a, b] = dom->chord(x, y);
    Geodesic g;
    g.dom_ = std::move(dom);
    g.x_minus_ = x;
    g.x_plus_ = y;
    g.setup(a, b, x);
    g.t_lo_ = 0.0;
    g.t_hi_ = hilbert_distance(*g.dom_, x, y);
    return g;
  }

  // Ray from interior x0 towards boundary point z.
  static Geodesic ray(std::shared_ptr<const ConvexDomain> dom, const ProjectivePoint& x0,
                      const ProjectivePoint& z) {
    require(dom->contains(x0) == Location::Interior, Err::NotInterior, "ray base");
    require(dom->contains(z) == Location::Boundary, Err::EndpointNotBoundary, "ray endpoint");
    Vec cx = dom->chart().to_chart(x0);
    Vec cz = dom->chart().to_chart(z);
    auto [a, b] = dom->line_boundary(x0, Vec(cz - cx));
    Geodesic g;
    g.dom_ = std::move(dom);
    g.x_minus_ = x0;
    g.x_plus_ = z;
    g.setup(a, b, x0);
    g.t_lo_ = 0.0;
    g.t_hi_ = std::numeric_limits<double>::infinity();
    return g;
  }

  // Bi-infinite line between two boundary points whose open chord is inside.
  static Geodesic line(std::shared_ptr<const ConvexDomain> dom, const ProjectivePoint& a,
                       const ProjectivePoint& b) {
    require(dom->contains(a) == Location::Boundary, Err::EndpointNotBoundary, "line endpoint");
    require(dom->contains(b) == Location::Boundary, Err::EndpointNotBoundary, "line endpoint");
    // Midpoint lift: align signs so the sum lands on the inner chord.
    Vec va = a.coords(), vb = b.coords();
    Vec mid = va + vb;
    ProjectivePoint origin(mid);
    if (dom->contains(origin) != Location::Interior) {
      origin = ProjectivePoint(Vec(va - vb));
      require(dom->contains(origin) == Location::Interior, Err::DegenerateDomain,
              "no interior point between line endpoints");
    }
    Geodesic g;
    g.dom_ = std::move(dom);
    g.x_minus_ = a;
    g.x_plus_ = b;
    g.setup(a, b, origin);
    g.t_lo_ = -std::numeric_limits<double>::infinity();
    g.t_hi_ = std::numeric_limits<double>::infinity();
    return g;
  }

  const ConvexDomain& domain() const { return *dom_; }
  std::shared_ptr<const ConvexDomain> domain_ptr() const { return dom_; }
  const ProjectivePoint& backward_boundary() const { return a_; }
  const ProjectivePoint& forward_boundary() const { return b_; }
  const ProjectivePoint& origin() const { return origin_; }
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }

  // Largest parameter range on which c(t) stays numerically separated from
  // the chord endpoints (boundary collisions raise in the metric, so
  // samplers must not step past this).
  std::pair<double, double> numeric_range(double separation = 1e-7) const {
    double rb = va_.norm() / vb_.norm();
    double ra = vb_.norm() / va_.norm();
    double hi = 0.5 * std::log(rb / separation);
    double lo = -0.5 * std::log(ra / separation);
    return {std::max(t_lo_, lo), std::min(t_hi_, hi)};
  }

  ProjectivePoint at(double t) const {
    require(t >= t_lo_ - 1e-12 && t <= t_hi_ + 1e-12, Err::OutOfRange, "geodesic parameter");
    require(std::abs(t) < 300.0, Err::OutOfRange, "parameter beyond numerical range");
    if (t >= 0.0) return ProjectivePoint(Vec(vb_ + std::exp(-2.0 * t) * va_));
    return ProjectivePoint(Vec(std::exp(2.0 * t) * vb_ + va_));
  }

  // Image of c(t) under the map m, evaluated as [m vb + e^{-2t} m va] so the
  // backward component survives even when c(t) itself would round onto the
  // forward endpoint (tracking pulls deep ray points back to the basepoint).
  ProjectivePoint pulled(const Mat& m, double t) const {
    require(std::abs(t) < 300.0, Err::OutOfRange, "parameter beyond numerical range");
    if (t >= 0.0) return ProjectivePoint(Vec(m * vb_ + std::exp(-2.0 * t) * (m * va_)));
    return ProjectivePoint(Vec(std::exp(2.0 * t) * (m * vb_) + m * va_));
  }

  const Vec& lift_backward() const { return va_; }
  const Vec& lift_forward() const { return vb_; }

 private:
  void setup(const ProjectivePoint& a, const ProjectivePoint& b, const ProjectivePoint& origin) {
    a_ = a;
    b_ = b;
    origin_ = origin;
    // Solve origin = mu v_b + nu v_a in the plane spanned by the chord.
    Mat basis(a.dim(), 2);
    basis.col(0) = b.coords();
    basis.col(1) = a.coords();
    Vec coeffs = basis.colPivHouseholderQr().solve(origin.coords());
    require(std::abs(coeffs[0]) > 1e-13 && std::abs(coeffs[1]) > 1e-13, Err::DegenerateDomain,
            "origin collinear with a single endpoint");
    vb_ = coeffs[0] * b.coords();
    va_ = coeffs[1] * a.coords();
  }

  std::shared_ptr<const ConvexDomain> dom_;
  ProjectivePoint x_minus_, x_plus_;
  ProjectivePoint a_, b_;  // backward / forward chord boundary points
  ProjectivePoint origin_;
  Vec va_, vb_;
  double t_lo_ = 0.0, t_hi_ = 0.0;
};

inline ProjectivePoint unit_speed(const Geodesic& geo, double t) { return geo.at(t); }

struct ProjectionResult {
  double t_lo = 0.0, t_hi = 0.0;  // minimizing parameter interval
  double distance = 0.0;
};

namespace detail {
// Golden-section refinement on a quasi-convex function (Hilbert balls are
// convex, so sublevel sets along a geodesic are intervals).
template <typename F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iters = 80) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && (b - a) > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)); ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  double t = 0.5 * (a + b);
  return {t, f(t)};
}
}  // namespace detail

// Set-valued nearest-point projection onto a geodesic, restricted to
// [range_lo, range_hi]: uniform grid at `resolution` plus local refinement.
// Returns the whole minimizing plateau (Hilbert minimizer sets are connected
// but not single points in general).
inline ProjectionResult nearest_point_projection(const ConvexDomain& dom, const Geodesic& geo,
                                                 const ProjectivePoint& x, double resolution,
                                                 double range_lo, double range_hi) {
  require(dom.contains(x) == Location::Interior, Err::NotInterior, "projection query");
  auto safe = geo.numeric_range();
  range_lo = std::max(range_lo, safe.first);
  range_hi = std::min(range_hi, safe.second);
  require(range_lo < range_hi, Err::OutOfRange, "empty projection range");
  int n = std::max(3, static_cast<int>(std::ceil((range_hi - range_lo) / resolution)));
  auto dist = [&](double t) { return hilbert_distance(dom, x, geo.at(t)); };
  std::vector<double> ts(n + 1), ds(n + 1);
  for (int i = 0; i <= n; ++i) {
    ts[i] = range_lo + (range_hi - range_lo) * i / n;
    ds[i] = dist(ts[i]);
  }
  int imin = 0;
  for (int i = 1; i <= n; ++i)
    if (ds[i] < ds[imin]) imin = i;
  double lo = ts[std::max(0, imin - 1)], hi = ts[std::min(n, imin + 1)];
  auto [t_star, d_star] = detail::golden_min(dist, lo, hi);

  // Plateau extraction: the minimizer set is the sublevel {d <= d* + tau};
  // walk outward from the refined minimizer to bracket each end, then bisect.
  // tau sits above the refined minimum's own error but keeps the flat-bottom
  // slack of unique minimizers at the 1e-4 scale.
  double tau = 1e-8 * std::max(1.0, d_star);
  auto edge = [&](double t_in, double t_out) {
    for (int i = 0; i < 60; ++i) {
      double mid = 0.5 * (t_in + t_out);
      if (dist(mid) <= d_star + tau)
        t_in = mid;
      else
        t_out = mid;
    }
    return t_in;
  };
  double step = std::max((range_hi - range_lo) / n, 1e-6);
  auto sweep = [&](double direction) {
    double t_in = t_star;
    double t = t_star;
    while (true) {
      t += direction * step;
      if (t <= range_lo) return (dist(range_lo) <= d_star + tau) ? range_lo
                                                                 : edge(t_in, range_lo);
      if (t >= range_hi) return (dist(range_hi) <= d_star + tau) ? range_hi
                                                                 : edge(t_in, range_hi);
      if (dist(t) > d_star + tau) return edge(t_in, t);
      t_in = t;
    }
  };
  ProjectionResult res;
  res.t_lo = sweep(-1.0);
  res.t_hi = sweep(+1.0);
  res.distance = d_star;
  return res;
}

inline double distance_to_geodesic(const ConvexDomain& dom, const Geodesic& geo,
                                   const ProjectivePoint& x, double resolution, double range_lo,
                                   double range_hi) {
  return nearest_point_projection(dom, geo, x, resolution, range_lo, range_hi).distance;
}

// Sampled two-sided Hausdorff distance between geodesics over [lo, hi].
inline double hausdorff_distance_geodesics(const ConvexDomain& dom, const Geodesic& g1,
                                           const Geodesic& g2, int samples, double lo,
                                           double hi) {
  double out = 0.0;
  for (int side = 0; side < 2; ++side) {
    const Geodesic& from = side == 0 ? g1 : g2;
    const Geodesic& to = side == 0 ? g2 : g1;
    auto safe = from.numeric_range();
    for (int i = 0; i <= samples; ++i) {
      double t = lo + (hi - lo) * i / samples;
      if (t < safe.first || t > safe.second) continue;
      double d = distance_to_geodesic(dom, to, from.at(t), 0.25, lo - 5.0, hi + 5.0);
      out = std::max(out, d);
    }
  }
  return out;
}

// Point at Hilbert distance `dist` from interior p in chart direction dir
// (closed form on the chord through p).
inline ProjectivePoint point_at_distance(const ConvexDomain& dom, const ProjectivePoint& p,
                                         const Vec& chart_dir, double dist) {
  auto [a, b] = dom.line_boundary(p, chart_dir);
  Mat basis(p.dim(), 2);
  basis.col(0) = b.coords();
  basis.col(1) = a.coords();
  Vec coeffs = basis.colPivHouseholderQr().solve(p.coords());
  Vec vb = coeffs[0] * b.coords(), va = coeffs[1] * a.coords();
  if (dist >= 0.0) return ProjectivePoint(Vec(vb + std::exp(-2.0 * dist) * va));
  return ProjectivePoint(Vec(std::exp(2.0 * dist) * vb + va));
}

struct ContractionSpec {
  std::uint64_t seed = 1;
  int ball_count = 50;
  double radius = 1.0;
  double margin = 1e-3;       // disjointness margin beyond the radius
  double extra_distance = 1.0;  // balls are placed at distance radius + margin + extra
  int boundary_samples = 64;  // directions per ball (2D chart)
  double t_span = 4.0;        // ball anchors spread over [-t_span, t_span]
  double range_lo = -20.0, range_hi = 20.0;
  double resolution = 0.05;
};

struct ContractionWitness {
  ProjectivePoint center;
  double radius = 0.0;
  double diameter = 0.0;
};

struct ContractionProfile {
  double max_projection_diameter = 0.0;
  std::vector<ContractionWitness> witnesses;
};

// Projection diameters of metric balls disjoint from the geodesic
// (Def-style contraction diagnostic). Ball boundaries are sampled in
// Hilbert-metric directions from the center.
inline ContractionProfile contraction_profile(const ConvexDomain& dom, const Geodesic& geo,
                                              const ContractionSpec& spec) {
  require(dom.dim() == 3, Err::UnsupportedRepresentation,
          "contraction sampler implemented for planar domains");
  Rng rng(spec.seed);
  ContractionProfile out;
  double lo = std::max(spec.range_lo, geo.t_lo()), hi = std::min(spec.range_hi, geo.t_hi());
  for (int trial = 0; trial < spec.ball_count; ++trial) {
    double t0 = rng.uniform(std::max(lo, -spec.t_span), std::min(hi, spec.t_span));
    double theta = rng.uniform(0.0, 2.0 * M_PI);
    Vec dir(2);
    dir << std::cos(theta), std::sin(theta);
    double walk = spec.radius + spec.margin + spec.extra_distance;
    try {
      ProjectivePoint anchor = geo.at(t0);
      ProjectivePoint center = point_at_distance(dom, anchor, dir, walk);
      double d_geo = distance_to_geodesic(dom, geo, center, spec.resolution, lo, hi);
      if (d_geo <= spec.radius + spec.margin) continue;  // not perpendicular enough; skip
      double proj_lo = std::numeric_limits<double>::infinity();
      double proj_hi = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < spec.boundary_samples; ++k) {
        double phi = 2.0 * M_PI * k / spec.boundary_samples;
        Vec bdir(2);
        bdir << std::cos(phi), std::sin(phi);
        ProjectivePoint y = point_at_distance(dom, center, bdir, spec.radius);
        require(hilbert_distance(dom, center, y) <= spec.radius + 1e-6,
                Err::SamplerProducedIntersectingBall, "ball sample drifted");
        auto pr = nearest_point_projection(dom, geo, y, spec.resolution, lo, hi);
        proj_lo = std::min(proj_lo, pr.t_lo);
        proj_hi = std::max(proj_hi, pr.t_hi);
      }
      double diam = proj_hi - proj_lo;
      out.witnesses.push_back({center, spec.radius, diam});
      out.max_projection_diameter = std::max(out.max_projection_diameter, diam);
    } catch (const Error& e) {
      // Balls that graze the boundary closer than the numerical floor are
      // skipped deterministically.
      if (e.code() != Err::DegenerateQuadruple && e.code() != Err::NotInterior) throw;
    }
  }
  require(!out.witnesses.empty(), Err::SamplerProducedIntersectingBall,
          "no admissible balls produced");
  return out;
}

struct SlimnessSpec {
  std::uint64_t seed = 1;
  int triangle_count = 50;
  double t_span = 6.0;       // x, y drawn from geo([-t_span, t_span])
  double z_offset_max = 4.0; // z at Hilbert distance <= this from the geodesic
  int edge_samples = 48;
  double resolution = 0.05;
};

struct SlimnessProfile {
  double max_required_r = 0.0;  // r such that [x,y] is in N_r([x,z]) u N_r([z,y])
  ProjectivePoint witness_z;
};

// Minimal r so that the geodesic-side edge lies in the r-neighborhood of the
// other two sides, maximized over sampled triangles (estimates delta/2).
inline SlimnessProfile slimness_profile(const ConvexDomain& dom, const Geodesic& geo,
                                        const SlimnessSpec& spec) {
  require(dom.dim() == 3, Err::UnsupportedRepresentation,
          "slimness sampler implemented for planar domains");
  Rng rng(spec.seed);
  auto dom_ptr = geo.domain_ptr();
  SlimnessProfile out;
  for (int trial = 0; trial < spec.triangle_count; ++trial) {
    double t1 = rng.uniform(std::max(geo.t_lo(), -spec.t_span),
                            std::min(geo.t_hi(), spec.t_span));
    double t2 = rng.uniform(std::max(geo.t_lo(), -spec.t_span),
                            std::min(geo.t_hi(), spec.t_span));
    if (std::abs(t1 - t2) < 0.5) continue;
    ProjectivePoint x = geo.at(std::min(t1, t2)), y = geo.at(std::max(t1, t2));
    double theta = rng.uniform(0.0, 2.0 * M_PI);
    Vec dir(2);
    dir << std::cos(theta), std::sin(theta);
    ProjectivePoint z = point_at_distance(dom, geo.at(0.5 * (t1 + t2)), dir,
                                          rng.uniform(0.1, spec.z_offset_max));
    double r_tri = 0.0;
    if (z.approx_equal(x) || z.approx_equal(y)) continue;
    try {
      Geodesic xz = Geodesic::segment(dom_ptr, x, z);
      Geodesic zy = Geodesic::segment(dom_ptr, z, y);
      Geodesic xy = Geodesic::segment(dom_ptr, x, y);
      for (int i = 0; i <= spec.edge_samples; ++i) {
        double t = xy.t_lo() + (xy.t_hi() - xy.t_lo()) * i / spec.edge_samples;
        ProjectivePoint w = xy.at(t);
        double d1 = distance_to_geodesic(dom, xz, w, spec.resolution, xz.t_lo(), xz.t_hi());
        double d2 = distance_to_geodesic(dom, zy, w, spec.resolution, zy.t_lo(), zy.t_hi());
        r_tri = std::max(r_tri, std::min(d1, d2));
      }
    } catch (const Error& e) {
      if (e.code() != Err::DegenerateQuadruple && e.code() != Err::NotInterior) throw;
      continue;
    }
    if (r_tri > out.max_required_r) {
      out.max_required_r = r_tri;
      out.witness_z = z;
    }
  }
  return out;
}

// Fact-style additivity test: does hil(w1,w2) = hil(w1,w3) + hil(w3,w2)
// within 1e-8? Detects non-projective geodesics through w3.
inline bool geodesic_collinearity_check(const ConvexDomain& dom, const ProjectivePoint& w1,
                                        const ProjectivePoint& w2, const ProjectivePoint& w3) {
  double lhs = hilbert_distance(dom, w1, w2);
  double rhs = hilbert_distance(dom, w1, w3) + hilbert_distance(dom, w3, w2);
  return std::abs(lhs - rhs) <= 1e-8;
}

}  // namespace hglab
