#pragma once

#include "hglab/common.hpp"
#include "hglab/convexhull2d.hpp"
#include "hglab/projective.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

namespace hglab {

enum class DomainKind { Polytope, Ellipsoid, Hull, Graph };

enum class Location { Interior, Boundary, Exterior };

enum class BoundaryClass { C1Extreme, NonC1, InSegmentInterior, InSegmentClosure, Unknown };

struct FaceDescriptor {
  int dimension = 0;        // projective dimension of the face
  Mat span;                 // d x (dimension + 1) basis of the projective span
  std::vector<int> active;  // active constraint indices (polytopes only)
  bool sampled = false;     // true when derived from a sampled hull
};

struct BoundarySegment {
  ProjectivePoint a, b;
  bool sampled = false;
};

struct BoundaryPoint {
  ProjectivePoint point;
  std::vector<ProjectiveHyperplane> supports;
  BoundaryClass classification = BoundaryClass::Unknown;
  bool sampled = false;
};

// Properly convex domain under one of four representations. Construction
// stores an interior witness and a chart in which the closure is bounded
// (the proper-convexity certificate); all queries are pure.
class ConvexDomain {
 public:
  struct PolytopeData {
    std::vector<Vec> covectors;  // unit covectors, positive on the interior
  };
  struct EllipsoidData {
    Mat form;  // symmetric, signature (1, d-1); domain is {v : v^T Q v < 0}
    Vec witness_lift;
  };
  struct HullData {
    std::vector<Vec> chart_vertices;  // chart coordinates (dim d-1 = 2)
    Hull2D hull;
  };
  struct GraphData {
    double exponent = 2.0;
    double cap_height = 2.0;
  };

  static ConvexDomain make_polytope(int d, std::vector<Vec> covectors, const Vec& witness_lift);
  static ConvexDomain make_ellipsoid(Mat form, const Vec& witness_lift);
  // dual_anchor selects the intended cone: it must be strictly positive on
  // correctly signed lifts of every hull point (a projective point set has
  // two distinct hulls, one per cone orientation).
  static ConvexDomain make_hull(const std::vector<ProjectivePoint>& points, int d,
                                const Vec& dual_anchor);
  static ConvexDomain make_graph(double exponent, double cap_height = 2.0);

  DomainKind kind() const { return kind_; }
  int dim() const { return d_; }
  const ProjectivePoint& interior_witness() const { return witness_; }
  const AffineChart& chart() const { return chart_; }
  double bounding_radius() const { return bounding_radius_; }
  bool sampled() const { return sampled_; }
  bool strictly_convex() const { return kind_ == DomainKind::Ellipsoid; }

  const PolytopeData& polytope() const { return *poly_; }
  const EllipsoidData& ellipsoid() const { return *ell_; }
  const HullData& hull() const { return *hull_; }
  const GraphData& graph() const { return *graph_; }

  // Embedding of a lower-dimensional domain into an ambient P(R^D);
  // columns are orthonormal. Empty for full-dimensional domains.
  const std::optional<Mat>& ambient_embedding() const { return embedding_; }
  void set_ambient_embedding(const Mat& e) { embedding_ = e; }

  Location contains(const ProjectivePoint& p) const;

  // Boundary points of the full line through interior points x != y, ordered
  // a, x, y, b along the chord.
  std::pair<ProjectivePoint, ProjectivePoint> chord(const ProjectivePoint& x,
                                                    const ProjectivePoint& y) const;

  std::vector<ProjectiveHyperplane> supporting_hyperplanes(const ProjectivePoint& z) const;

  FaceDescriptor face_of(const ProjectivePoint& z) const;

  std::vector<BoundarySegment> boundary_segments() const;

  BoundaryPoint classify_boundary_point(const ProjectivePoint& z) const;

  // Boundary point in chart direction `dir` (unit, chart coords) from the
  // witness; the workhorse for deterministic boundary sampling.
  ProjectivePoint boundary_in_direction(const Vec& chart_dir) const;

  // Both boundary points of the line through interior p in chart direction
  // dir, ordered (backward, forward) with respect to dir.
  std::pair<ProjectivePoint, ProjectivePoint> line_boundary(const ProjectivePoint& p,
                                                            const Vec& chart_dir) const;

  std::vector<ProjectivePoint> sample_boundary(int count) const;

  ConvexDomain transformed(const ProjectiveMap& g, int hull_samples = 256) const;

 private:
  ConvexDomain() = default;

  void finalize(const Vec& witness_lift);
  double membership_value(const Vec& chart_point) const;  // > 0 inside, < 0 outside
  // Feasible parameter range (t_lo, t_hi) of the chart line p0 + t * dir.
  std::pair<double, double> line_range(const Vec& p0, const Vec& dir) const;

  DomainKind kind_ = DomainKind::Polytope;
  int d_ = 0;
  ProjectivePoint witness_;
  Vec witness_lift_;
  AffineChart chart_;
  double bounding_radius_ = 0.0;
  bool sampled_ = false;
  std::optional<Mat> embedding_;

  std::shared_ptr<const PolytopeData> poly_;
  std::shared_ptr<const EllipsoidData> ell_;
  std::shared_ptr<const HullData> hull_;
  std::shared_ptr<const GraphData> graph_;
};

namespace detail {

// Lifts signed into the cone selected by the dual anchor.
inline std::vector<Vec> anchored_lifts(const std::vector<ProjectivePoint>& pts,
                                       const Vec& anchor) {
  std::vector<Vec> lifts;
  lifts.reserve(pts.size());
  for (const auto& p : pts) {
    double s = anchor.dot(p.coords());
    require(std::abs(s) > 1e-12, Err::DegenerateDomain,
            "hull point orthogonal to the dual anchor");
    lifts.push_back(s > 0 ? p.coords() : Vec(-p.coords()));
  }
  return lifts;
}

// Improve the chart covector's worst margin over the signed lifts by
// subgradient steps; never returns anything worse than the anchor itself.
inline Vec polish_dual_direction(const std::vector<Vec>& lifts, const Vec& anchor) {
  Vec best = anchor.normalized();
  auto margin = [&](const Vec& c) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : lifts) m = std::min(m, c.dot(v.normalized()));
    return m;
  };
  double best_margin = margin(best);
  Vec cur = best;
  for (int iter = 0; iter < 300; ++iter) {
    int worst = 0;
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(lifts.size()); ++i) {
      double mi = cur.dot(lifts[i].normalized());
      if (mi < m) {
        m = mi;
        worst = i;
      }
    }
    if (m > best_margin) {
      best_margin = m;
      best = cur;
    }
    double eta = 0.5 / (1.0 + iter / 25.0);
    cur = (cur + eta * lifts[worst].normalized()).normalized();
  }
  require(best_margin > 1e-12, Err::DegenerateDomain, "hull points not in a proper cone");
  return best;
}

}  // namespace detail

inline void ConvexDomain::finalize(const Vec& witness_lift) {
  witness_lift_ = witness_lift;
  witness_ = ProjectivePoint(witness_lift);

  // Proper-convexity certificate: a chart whose infinity hyperplane misses
  // the closure, exhibited per representation, then a bounding-ball check
  // over vertices / boundary samples.
  Vec chart_cov;
  switch (kind_) {
    case DomainKind::Polytope: {
      chart_cov = Vec::Zero(d_);
      for (const auto& c : poly_->covectors) chart_cov += c;
      break;
    }
    case DomainKind::Ellipsoid: {
      chart_cov = -(ell_->form * ell_->witness_lift);
      break;
    }
    case DomainKind::Hull:
    case DomainKind::Graph:
      // chart_ already set by the factory before finalize.
      chart_cov = Vec();
      break;
  }
  if (chart_cov.size() > 0) chart_ = AffineChart::from_infinity(ProjectiveHyperplane(chart_cov));

  Vec w_chart = chart_.to_chart(witness_);
  bounding_radius_ = 0.0;
  switch (kind_) {
    case DomainKind::Hull: {
      for (const auto& v : hull_->chart_vertices)
        bounding_radius_ = std::max(bounding_radius_, v.norm());
      break;
    }
    case DomainKind::Graph: {
      bounding_radius_ = graph_->cap_height + 1.0;
      break;
    }
    default: {
      // Sample chart directions and verify the boundary stays in a ball.
      int probes = 64;
      for (int i = 0; i < probes; ++i) {
        Vec dir = Vec::Zero(d_ - 1);
        if (d_ - 1 == 1) {
          dir[0] = (i % 2 == 0) ? 1.0 : -1.0;
        } else if (d_ - 1 == 2) {
          double th = 2.0 * M_PI * i / probes;
          dir << std::cos(th), std::sin(th);
        } else {
          Rng rng(1000 + i);
          dir = rng.gaussian_vector(d_ - 1).normalized();
        }
        auto range = line_range(w_chart, dir);
        require(std::isfinite(range.first) && std::isfinite(range.second),
                Err::DegenerateDomain, "domain unbounded in certificate chart");
        bounding_radius_ = std::max({bounding_radius_, std::abs(range.first) + w_chart.norm(),
                                     std::abs(range.second) + w_chart.norm()});
      }
      break;
    }
  }
  require(contains(witness_) == Location::Interior, Err::DegenerateDomain,
          "witness is not interior");
}

inline ConvexDomain ConvexDomain::make_polytope(int d, std::vector<Vec> covectors,
                                                const Vec& witness_lift) {
  require(static_cast<int>(covectors.size()) >= d, Err::BadDimensions,
          "polytope needs at least d halfspaces");
  ConvexDomain dom;
  dom.kind_ = DomainKind::Polytope;
  dom.d_ = d;
  auto data = std::make_shared<PolytopeData>();
  for (auto& c : covectors) {
    require(static_cast<int>(c.size()) == d, Err::BadDimensions, "covector dimension");
    Vec u = c.normalized();
    if (u.dot(witness_lift) < 0) u = -u;
    require(std::abs(u.dot(witness_lift.normalized())) > tol::halfspace, Err::DegenerateDomain,
            "witness on a facet hyperplane");
    data->covectors.push_back(u);
  }
  dom.poly_ = std::move(data);
  dom.finalize(witness_lift);
  return dom;
}

inline ConvexDomain ConvexDomain::make_ellipsoid(Mat form, const Vec& witness_lift) {
  int d = static_cast<int>(form.rows());
  require(form.cols() == d, Err::BadDimensions, "form must be square");
  Mat q = 0.5 * (form + form.transpose());
  q /= q.norm();
  // Signature check: exactly one negative eigenvalue up against d-1 positive.
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  int neg = 0, pos = 0;
  for (int i = 0; i < d; ++i) {
    if (es.eigenvalues()[i] < -1e-12) ++neg;
    if (es.eigenvalues()[i] > 1e-12) ++pos;
  }
  require(neg == 1 && pos == d - 1, Err::BadCartanData, "form must have signature (1, d-1)");
  require(witness_lift.dot(q * witness_lift) < 0, Err::DegenerateDomain,
          "witness not inside the ellipsoid");
  ConvexDomain dom;
  dom.kind_ = DomainKind::Ellipsoid;
  dom.d_ = d;
  auto data = std::make_shared<EllipsoidData>();
  data->form = q;
  data->witness_lift = witness_lift.normalized();
  dom.ell_ = std::move(data);
  dom.finalize(witness_lift);
  return dom;
}

inline ConvexDomain ConvexDomain::make_hull(const std::vector<ProjectivePoint>& points, int d,
                                            const Vec& dual_anchor) {
  require(d == 3, Err::UnsupportedRepresentation, "hull domains are implemented in P(R^3)");
  require(static_cast<int>(dual_anchor.size()) == d, Err::BadDimensions, "anchor dimension");
  auto lifts = detail::anchored_lifts(points, dual_anchor);
  Vec chart_cov = detail::polish_dual_direction(lifts, dual_anchor);
  ConvexDomain dom;
  dom.kind_ = DomainKind::Hull;
  dom.d_ = d;
  dom.chart_ = AffineChart::from_infinity(ProjectiveHyperplane(chart_cov));
  auto data = std::make_shared<HullData>();
  std::vector<Eigen::Vector2d> pts2;
  Vec centroid = Vec::Zero(2);
  for (const auto& v : lifts) {
    Vec x = dom.chart_.to_chart(ProjectivePoint(v));
    pts2.emplace_back(x[0], x[1]);
    data->chart_vertices.push_back(x);
    centroid += x;
  }
  centroid /= static_cast<double>(lifts.size());
  // Vertices closer than 1e-6 are merged before facet construction: facet
  // normals from noise-scale edges would be unreliable.
  data->hull = convex_hull_2d(pts2, 1e-6);
  // Keep only the hull's own boundary points as vertices.
  data->chart_vertices.clear();
  for (const auto& v : data->hull.vertices) {
    Vec x(2);
    x << v.x(), v.y();
    data->chart_vertices.push_back(x);
  }
  dom.hull_ = std::move(data);
  dom.sampled_ = true;
  dom.finalize(dom.chart_.lift(centroid));
  return dom;
}

inline ConvexDomain ConvexDomain::make_graph(double exponent, double cap_height) {
  require(exponent > 1.0, Err::BadExponent, "graph exponent must exceed 1");
  require(cap_height > 1.0, Err::BadExponent, "cap height must exceed 1");
  ConvexDomain dom;
  dom.kind_ = DomainKind::Graph;
  dom.d_ = 3;
  Vec inf(3);
  inf << 0, 0, 1;
  Mat frame = Mat::Identity(3, 3);
  dom.chart_ = AffineChart(ProjectiveHyperplane(inf), frame);
  auto data = std::make_shared<GraphData>();
  data->exponent = exponent;
  data->cap_height = cap_height;
  dom.graph_ = std::move(data);
  Vec w(3);
  w << 0.0, 0.5 * cap_height, 1.0;
  dom.finalize(w);
  return dom;
}

inline double ConvexDomain::membership_value(const Vec& x) const {
  switch (kind_) {
    case DomainKind::Polytope: {
      Vec lift = chart_.lift(x);
      double m = std::numeric_limits<double>::infinity();
      for (const auto& c : poly_->covectors) m = std::min(m, c.dot(lift) / lift.norm());
      return m;
    }
    case DomainKind::Ellipsoid: {
      Vec lift = chart_.lift(x);
      lift.normalize();
      return -lift.dot(ell_->form * lift);
    }
    case DomainKind::Hull: {
      double m = std::numeric_limits<double>::infinity();
      Eigen::Vector2d p(x[0], x[1]);
      for (const auto& e : hull_->hull.edges) m = std::min(m, e.offset - e.normal.dot(p));
      return m;
    }
    case DomainKind::Graph: {
      double u = x[0], v = x[1];
      double lower = v - std::pow(std::abs(u), graph_->exponent);
      double upper = (graph_->cap_height - std::abs(u) * (graph_->cap_height - 1.0)) - v;
      return std::min(lower, upper);
    }
  }
  return -1.0;
}

inline Location ConvexDomain::contains(const ProjectivePoint& p_in) const {
  ProjectivePoint p = p_in;
  if (embedding_) {
    const Mat& e = *embedding_;
    require(p_in.dim() == e.rows(), Err::DimensionMismatch, "ambient point dimension");
    Vec proj = e.transpose() * p_in.coords();
    Vec back = e * proj;
    if ((back - p_in.coords()).norm() > 1e-9) return Location::Exterior;
    p = ProjectivePoint(proj);
  }
  require(p.dim() == d_, Err::DimensionMismatch, "point dimension");
  if (kind_ == DomainKind::Ellipsoid) {
    double q = -p.coords().dot(ell_->form * p.coords());
    if (q > tol::halfspace) return Location::Interior;
    if (q < -tol::halfspace) return Location::Exterior;
    return Location::Boundary;
  }
  if (kind_ == DomainKind::Polytope) {
    // Align the lift with the certificate covector, which is positive on the
    // whole closure cone; points orthogonal to it are outside the closure.
    Vec lift = p.coords();
    double s = chart_.infinity_hyperplane().covector().dot(lift);
    if (s < 0) lift = -lift;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : poly_->covectors) m = std::min(m, c.dot(lift));
    if (m > tol::halfspace) return Location::Interior;
    if (m < -tol::halfspace) return Location::Exterior;
    return Location::Boundary;
  }
  if (!chart_.representable(p)) return Location::Exterior;
  Vec x = chart_.to_chart(p);
  double band = tol::boundary_band * std::max(1.0, x.norm());
  double m = membership_value(x);
  if (m > band) return Location::Interior;
  if (m < -band) return Location::Exterior;
  return Location::Boundary;
}

inline std::pair<double, double> ConvexDomain::line_range(const Vec& p0, const Vec& dir) const {
  switch (kind_) {
    case DomainKind::Polytope:
    case DomainKind::Hull: {
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      if (kind_ == DomainKind::Polytope) {
        Vec l0 = chart_.lift(p0);
        Vec l1 = chart_.lift(p0 + dir);
        Vec dl = l1 - l0;
        for (const auto& c : poly_->covectors) {
          double a = c.dot(l0), b = c.dot(dl);
          if (std::abs(b) < 1e-300) continue;
          double t = -a / b;
          if (b > 0)
            lo = std::max(lo, t);
          else
            hi = std::min(hi, t);
        }
      } else {
        Eigen::Vector2d q0(p0[0], p0[1]), dq(dir[0], dir[1]);
        for (const auto& e : hull_->hull.edges) {
          double a = e.offset - e.normal.dot(q0);
          double b = e.normal.dot(dq);
          if (std::abs(b) < 1e-300) continue;
          double t = a / b;
          if (b < 0)
            lo = std::max(lo, t);
          else
            hi = std::min(hi, t);
        }
      }
      return {lo, hi};
    }
    case DomainKind::Ellipsoid: {
      Vec l0 = chart_.lift(p0);
      Vec dl = chart_.lift(p0 + dir) - l0;
      const Mat& q = ell_->form;
      double a = dl.dot(q * dl);
      double b = 2.0 * l0.dot(q * dl);
      double c = l0.dot(q * l0);
      require(a > 0, Err::DegenerateDomain, "chord direction not spacelike in chart");
      double disc = b * b - 4 * a * c;
      require(disc >= 0, Err::NotInterior, "line misses the ellipsoid");
      double r = std::sqrt(disc);
      return {(-b - r) / (2 * a), (-b + r) / (2 * a)};
    }
    case DomainKind::Graph: {
      // Bisection against the membership oracle, 60 iterations per side.
      auto bisect = [&](double sgn) {
        double t_in = 0.0;
        double t_out = sgn;
        int guard = 0;
        while (membership_value(p0 + t_out * dir) > 0) {
          t_out *= 2.0;
          require(++guard < 80, Err::DegenerateDomain, "graph domain unbounded on line");
        }
        for (int i = 0; i < 60; ++i) {
          double mid = 0.5 * (t_in + t_out);
          if (membership_value(p0 + mid * dir) > 0)
            t_in = mid;
          else
            t_out = mid;
        }
        return 0.5 * (t_in + t_out);
      };
      return {bisect(-1.0), bisect(1.0)};
    }
  }
  return {0.0, 0.0};
}

inline std::pair<ProjectivePoint, ProjectivePoint> ConvexDomain::chord(
    const ProjectivePoint& x_in, const ProjectivePoint& y_in) const {
  ProjectivePoint x = x_in, y = y_in;
  if (embedding_) {
    const Mat& e = *embedding_;
    x = ProjectivePoint(Vec(e.transpose() * x_in.coords()));
    y = ProjectivePoint(Vec(e.transpose() * y_in.coords()));
  }
  require(contains(x_in) == Location::Interior, Err::NotInterior, "chord endpoint x");
  require(contains(y_in) == Location::Interior, Err::NotInterior, "chord endpoint y");
  // A chord is well-defined down to the rounding floor of the direction.
  require(!x.approx_equal(y, 1e-13), Err::CoincidentPoints, "chord requires distinct points");
  Vec cx = chart_.to_chart(x), cy = chart_.to_chart(y);
  Vec dir = cy - cx;
  auto range = line_range(cx, dir);
  require(range.first < 0.0 && range.second > 1.0, Err::DegenerateDomain,
          "chord parameters out of order");
  ProjectivePoint a = chart_.from_chart(Vec(cx + range.first * dir));
  ProjectivePoint b = chart_.from_chart(Vec(cx + range.second * dir));
  if (embedding_) {
    a = ProjectivePoint(Vec((*embedding_) * a.coords()));
    b = ProjectivePoint(Vec((*embedding_) * b.coords()));
  }
  return {a, b};
}

inline std::vector<ProjectiveHyperplane> ConvexDomain::supporting_hyperplanes(
    const ProjectivePoint& z) const {
  require(contains(z) == Location::Boundary, Err::NotOnBoundary, "supports need a boundary point");
  std::vector<ProjectiveHyperplane> out;
  switch (kind_) {
    case DomainKind::Polytope: {
      Vec lift = z.coords();
      if (lift.dot(witness_lift_) < 0) lift = -lift;
      for (const auto& c : poly_->covectors)
        if (std::abs(c.dot(lift)) <= tol::support_vanish)
          out.push_back(ProjectiveHyperplane::oriented(c));
      break;
    }
    case DomainKind::Ellipsoid: {
      Vec c = ell_->form * z.coords();
      if (c.dot(witness_lift_) < 0) c = -c;
      out.push_back(ProjectiveHyperplane::oriented(c));
      break;
    }
    case DomainKind::Hull: {
      Vec x = chart_.to_chart(z);
      Eigen::Vector2d p(x[0], x[1]);
      std::vector<Vec> covs;
      for (const auto& e : hull_->hull.edges) {
        if (std::abs(e.offset - e.normal.dot(p)) <= tol::boundary_band * std::max(1.0, x.norm())) {
          Vec chart_cov(3);
          chart_cov << -e.normal.x(), -e.normal.y(), e.offset;
          Vec cov = chart_.frame().inverse().transpose() * chart_cov;
          bool dup = false;
          for (const auto& c : covs)
            if (std::abs(c.normalized().dot(cov.normalized())) > 1.0 - 1e-10) dup = true;
          if (!dup) covs.push_back(cov);
        }
      }
      for (auto& c : covs) {
        if (c.dot(witness_lift_) < 0) c = -c;
        out.push_back(ProjectiveHyperplane::oriented(c));
      }
      break;
    }
    case DomainKind::Graph: {
      Vec x = chart_.to_chart(z);
      double u = x[0], v = x[1];
      double band = tol::boundary_band * std::max(1.0, x.norm());
      double p = graph_->exponent, h = graph_->cap_height;
      std::vector<Vec> chart_covs;
      if (std::abs(v - std::pow(std::abs(u), p)) <= 10 * band) {
        double slope = (u == 0.0) ? 0.0 : p * std::copysign(std::pow(std::abs(u), p - 1.0), u);
        Vec c(3);
        c << -slope, 1.0, slope * u - v;  // (v' - v) - slope (u' - u) >= 0 inside
        chart_covs.push_back(c);
      }
      for (double side : {1.0, -1.0}) {
        // Cap chord from (side, 1) to (0, h): inside satisfies v <= h - |u|(h-1).
        if (std::abs((h - std::abs(u) * (h - 1.0)) - v) <= 10 * band &&
            (side * u) >= -10 * band) {
          Vec c(3);
          c << side * (h - 1.0), 1.0, -h;
          c = -c;  // orient below the cap
          chart_covs.push_back(c);
        }
      }
      require(!chart_covs.empty(), Err::NotOnBoundary, "graph boundary piece not identified");
      for (auto& c : chart_covs) {
        Vec cov = chart_.frame().inverse().transpose() * c;
        if (cov.dot(witness_lift_) < 0) cov = -cov;
        bool dup = false;
        for (const auto& existing : out)
          if (std::abs(existing.covector().dot(cov.normalized())) > 1.0 - 1e-10) dup = true;
        if (!dup) out.push_back(ProjectiveHyperplane::oriented(cov));
      }
      break;
    }
  }
  require(!out.empty(), Err::NotOnBoundary, "no supporting hyperplane found");
  return out;
}

inline FaceDescriptor ConvexDomain::face_of(const ProjectivePoint& z) const {
  require(contains(z) == Location::Boundary, Err::NotOnBoundary, "face_of needs a boundary point");
  FaceDescriptor fd;
  switch (kind_) {
    case DomainKind::Polytope: {
      Vec lift = z.coords();
      if (lift.dot(witness_lift_) < 0) lift = -lift;
      Mat active(0, d_);
      for (int i = 0; i < static_cast<int>(poly_->covectors.size()); ++i) {
        if (std::abs(poly_->covectors[i].dot(lift)) <= tol::support_vanish) {
          active.conservativeResize(active.rows() + 1, d_);
          active.row(active.rows() - 1) = poly_->covectors[i].transpose();
          fd.active.push_back(i);
        }
      }
      require(active.rows() > 0, Err::NotOnBoundary, "no active constraints");
      Eigen::JacobiSVD<Mat> svd(active, Eigen::ComputeFullV);
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
      fd.dimension = d_ - 1 - rank;
      fd.span = svd.matrixV().rightCols(d_ - rank);
      return fd;
    }
    case DomainKind::Ellipsoid: {
      fd.dimension = 0;
      fd.span = z.coords();
      return fd;
    }
    case DomainKind::Hull: {
      // Sampled approximation: edge-interior points get the edge span.
      Vec x = chart_.to_chart(z);
      Eigen::Vector2d p(x[0], x[1]);
      fd.sampled = true;
      // Count distinct support lines among incident edges (collinear runs
      // produce several edges on one line).
      int hits = 0;
      const Hull2D::Edge* hit = nullptr;
      std::vector<Eigen::Vector2d> seen;
      for (const auto& e : hull_->hull.edges) {
        if (std::abs(e.offset - e.normal.dot(p)) <= tol::boundary_band * std::max(1.0, x.norm())) {
          bool dup = false;
          for (const auto& s : seen)
            if (std::abs(s.dot(e.normal)) > 1.0 - 1e-9) dup = true;
          if (dup) continue;
          seen.push_back(e.normal);
          ++hits;
          hit = &e;
        }
      }
      if (hits == 1) {
        fd.dimension = 1;
        Mat span(d_, 2);
        Vec a(2), b(2);
        a << hull_->hull.vertices[hit->from].x(), hull_->hull.vertices[hit->from].y();
        b << hull_->hull.vertices[hit->to].x(), hull_->hull.vertices[hit->to].y();
        span.col(0) = chart_.lift(a).normalized();
        span.col(1) = chart_.lift(b).normalized();
        fd.span = span;
      } else {
        fd.dimension = 0;
        fd.span = z.coords();
      }
      return fd;
    }
    case DomainKind::Graph:
      fail(Err::UnsupportedRepresentation, "face_of on graph domains");
  }
  return fd;
}

inline std::vector<BoundarySegment> ConvexDomain::boundary_segments() const {
  if (strictly_convex()) return {};
  std::vector<BoundarySegment> out;
  switch (kind_) {
    case DomainKind::Polytope: {
      require(d_ == 3, Err::UnsupportedRepresentation,
              "boundary segments implemented for P(R^3) polytopes");
      // Each facet of a planar polytope is one maximal segment; endpoints
      // are the extreme feasible parameters along the facet line.
      int nf = static_cast<int>(poly_->covectors.size());
      for (int i = 0; i < nf; ++i) {
        // Find a boundary point on facet i by shooting from the witness
        // towards the facet's nearest point; then walk the facet line.
        // Parameterize facet plane ^ chart: solve for the chart line
        // c_i . lift(x) = 0.
        Vec c = poly_->covectors[i];
        // Chart line: c . (frame * (x, 1)) = 0 -> a . x = b.
        Vec cf = chart_.frame().transpose() * c;
        Eigen::Vector2d a(cf[0], cf[1]);
        double b = -cf[2];
        if (a.norm() < 1e-14) continue;
        Eigen::Vector2d p0 = a * (b / a.squaredNorm());
        Eigen::Vector2d dir(-a.y(), a.x());
        dir.normalize();
        // Clip the facet line against the other halfspaces.
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        Vec l0 = chart_.lift(Vec(Eigen::Vector2d(p0).eval()));
        Vec l1 = chart_.lift(Vec(Eigen::Vector2d(p0 + dir).eval()));
        Vec dl = l1 - l0;
        bool empty = false;
        for (int j = 0; j < nf; ++j) {
          if (j == i) continue;
          double aj = poly_->covectors[j].dot(l0);
          double bj = poly_->covectors[j].dot(dl);
          if (std::abs(bj) < 1e-300) {
            if (aj < 0) empty = true;
            continue;
          }
          double t = -aj / bj;
          if (bj > 0)
            lo = std::max(lo, t);
          else
            hi = std::min(hi, t);
        }
        if (empty || !(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) continue;
        BoundarySegment seg;
        seg.a = chart_.from_chart(Vec(Eigen::Vector2d(p0 + lo * dir).eval()));
        seg.b = chart_.from_chart(Vec(Eigen::Vector2d(p0 + hi * dir).eval()));
        seg.sampled = false;
        out.push_back(seg);
      }
      return out;
    }
    case DomainKind::Hull: {
      // Maximal collinear runs of consecutive hull vertices.
      const auto& v = hull_->hull.vertices;
      int n = static_cast<int>(v.size());
      std::vector<bool> straight(n, false);  // vertex i: turn at i is straight
      for (int i = 0; i < n; ++i) {
        const auto& prev = v[(i + n - 1) % n];
        const auto& cur = v[i];
        const auto& next = v[(i + 1) % n];
        Eigen::Vector2d e1 = (cur - prev).normalized();
        Eigen::Vector2d e2 = (next - cur).normalized();
        double sin_turn = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
        straight[i] = sin_turn <= tol::segment_angle;
      }
      // A run is a maximal chain of consecutive straight interior vertices.
      std::vector<bool> used(n, false);
      for (int i = 0; i < n; ++i) {
        if (!straight[i] || used[i]) continue;
        int start = i;
        while (straight[(start + n - 1) % n] && (start + n - 1) % n != i) {
          start = (start + n - 1) % n;
          if (start == i) break;
        }
        int end = i;
        while (straight[(end + 1) % n] && (end + 1) % n != start) end = (end + 1) % n;
        for (int k = start;; k = (k + 1) % n) {
          used[k] = true;
          if (k == end) break;
        }
        BoundarySegment seg;
        Vec a(2), b(2);
        int ia = (start + n - 1) % n, ib = (end + 1) % n;
        a << v[ia].x(), v[ia].y();
        b << v[ib].x(), v[ib].y();
        seg.a = chart_.from_chart(a);
        seg.b = chart_.from_chart(b);
        seg.sampled = true;
        out.push_back(seg);
      }
      return out;
    }
    default:
      fail(Err::UnsupportedRepresentation, "boundary segments need a polytope or hull");
  }
  return out;
}

inline BoundaryPoint ConvexDomain::classify_boundary_point(const ProjectivePoint& z) const {
  BoundaryPoint bp;
  bp.point = z;
  bp.supports = supporting_hyperplanes(z);
  bp.sampled = sampled_;
  bool unique_support = bp.supports.size() == 1;
  bool in_segment_interior = false, in_segment_closure = false;
  if (kind_ == DomainKind::Ellipsoid) {
    bp.classification = BoundaryClass::C1Extreme;
    return bp;
  }
  if (kind_ == DomainKind::Polytope || kind_ == DomainKind::Hull) {
    for (const auto& seg : boundary_segments()) {
      // z on [a, b]?
      Mat m(3, z.dim());
      m.row(0) = seg.a.coords();
      m.row(1) = seg.b.coords();
      m.row(2) = z.coords();
      Eigen::JacobiSVD<Mat> svd(m);
      if (svd.singularValues()[2] > 1e-8 * svd.singularValues()[0]) continue;
      if (z.approx_equal(seg.a, 1e-8) || z.approx_equal(seg.b, 1e-8)) {
        in_segment_closure = true;
      } else {
        // Between the endpoints? Check parameter sign via dot products.
        Vec za = seg.a.coords(), zb = seg.b.coords(), zz = z.coords();
        if (za.dot(zz) < 0) za = -za;
        if (zb.dot(zz) < 0) zb = -zb;
        // Solve zz ~ alpha za + beta zb in least squares.
        Mat basis(z.dim(), 2);
        basis.col(0) = za;
        basis.col(1) = zb;
        Vec ab = basis.colPivHouseholderQr().solve(zz);
        if (ab[0] > 1e-9 && ab[1] > 1e-9)
          in_segment_interior = true;
        else
          in_segment_closure = true;
      }
    }
  }
  if (in_segment_interior)
    bp.classification = BoundaryClass::InSegmentInterior;
  else if (in_segment_closure)
    bp.classification = BoundaryClass::InSegmentClosure;
  else if (unique_support)
    bp.classification = BoundaryClass::C1Extreme;
  else
    bp.classification = BoundaryClass::NonC1;
  return bp;
}

inline ProjectivePoint ConvexDomain::boundary_in_direction(const Vec& dir) const {
  Vec w = chart_.to_chart(witness_);
  auto range = line_range(w, dir);
  return chart_.from_chart(Vec(w + range.second * dir));
}

inline std::pair<ProjectivePoint, ProjectivePoint> ConvexDomain::line_boundary(
    const ProjectivePoint& p, const Vec& chart_dir) const {
  require(contains(p) == Location::Interior, Err::NotInterior, "line base point");
  Vec x = chart_.to_chart(p);
  auto range = line_range(x, chart_dir);
  return {chart_.from_chart(Vec(x + range.first * chart_dir)),
          chart_.from_chart(Vec(x + range.second * chart_dir))};
}

inline std::vector<ProjectivePoint> ConvexDomain::sample_boundary(int count) const {
  std::vector<ProjectivePoint> out;
  if (d_ == 3) {
    for (int i = 0; i < count; ++i) {
      double th = 2.0 * M_PI * i / count;
      Vec dir(2);
      dir << std::cos(th), std::sin(th);
      out.push_back(boundary_in_direction(dir));
    }
  } else {
    Rng rng(4242);
    for (int i = 0; i < count; ++i)
      out.push_back(boundary_in_direction(rng.gaussian_vector(d_ - 1).normalized()));
  }
  return out;
}

inline ConvexDomain ConvexDomain::transformed(const ProjectiveMap& g, int hull_samples) const {
  require(g.dim() == d_, Err::DimensionMismatch, "map dimension");
  switch (kind_) {
    case DomainKind::Polytope: {
      std::vector<Vec> covs;
      Mat git = g.matrix().inverse().transpose();
      for (const auto& c : poly_->covectors) covs.push_back(git * c);
      return make_polytope(d_, covs, Vec(g.matrix() * witness_lift_));
    }
    case DomainKind::Ellipsoid: {
      Mat gi = g.matrix().inverse();
      return make_ellipsoid(Mat(gi.transpose() * ell_->form * gi),
                            Vec(g.matrix() * witness_lift_));
    }
    case DomainKind::Hull:
    case DomainKind::Graph: {
      std::vector<ProjectivePoint> pts;
      if (kind_ == DomainKind::Hull) {
        for (const auto& x : hull_->chart_vertices) pts.push_back(g.apply(chart_.from_chart(x)));
      } else {
        for (const auto& z : sample_boundary(hull_samples)) pts.push_back(g.apply(z));
      }
      // The dual anchor transforms contravariantly.
      Vec anchor = g.matrix().inverse().transpose() * chart_.infinity_hyperplane().covector();
      return make_hull(pts, d_, anchor);
    }
  }
  fail(Err::UnsupportedRepresentation, "transform");
}

}  // namespace hglab
