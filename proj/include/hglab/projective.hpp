#pragma once

#include "hglab/common.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace hglab {

namespace detail {
// Unit-normalize with the first coordinate of magnitude > 1e-12 made positive.
inline Vec canonicalize(Vec v) {
  double n = v.norm();
  require(n > 0.0, Err::BadDimensions, "zero homogeneous vector");
  v /= n;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol::unit_norm) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}
}  // namespace detail

// Point of P(R^d) stored as a unit homogeneous representative with a
// deterministic sign, so equality is a plain coordinate comparison.
class ProjectivePoint {
 public:
  ProjectivePoint() = default;
  explicit ProjectivePoint(const Vec& coords) : coords_(detail::canonicalize(coords)) {}

  const Vec& coords() const { return coords_; }
  int dim() const { return static_cast<int>(coords_.size()); }

  // Angle between the two lines (the round metric on projective space).
  double angle_to(const ProjectivePoint& o) const {
    double c = std::min(1.0, std::abs(coords_.dot(o.coords_)));
    return std::acos(c);
  }
  // Chordal distance min(|u-v|, |u+v|): equivalent to the angle for small
  // separations but resolves far below the acos rounding floor.
  double chordal_to(const ProjectivePoint& o) const {
    return std::min((coords_ - o.coords_).norm(), (coords_ + o.coords_).norm());
  }
  bool approx_equal(const ProjectivePoint& o, double tolerance = tol::point_eq) const {
    return chordal_to(o) <= tolerance;
  }

 private:
  Vec coords_;
};

inline ProjectivePoint point_from(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return ProjectivePoint(v);
}

class ProjectiveHyperplane {
 public:
  ProjectiveHyperplane() = default;
  explicit ProjectiveHyperplane(const Vec& covector)
      : covector_(detail::canonicalize(covector)) {}

  // Unit-normalized with the given sign kept: supporting hyperplanes carry an
  // orientation (nonnegative on the domain's interior).
  static ProjectiveHyperplane oriented(const Vec& covector) {
    ProjectiveHyperplane h;
    double n = covector.norm();
    require(n > 0.0, Err::BadDimensions, "zero covector");
    h.covector_ = covector / n;
    return h;
  }

  const Vec& covector() const { return covector_; }
  int dim() const { return static_cast<int>(covector_.size()); }
  double eval(const ProjectivePoint& p) const { return covector_.dot(p.coords()); }
  bool contains(const ProjectivePoint& p, double tolerance = tol::support_vanish) const {
    return std::abs(eval(p)) <= tolerance;
  }

 private:
  Vec covector_;
};

// Invertible projective transformation. det_normalized() marks the |det| = 1
// rescaling used by the Cartan machinery.
class ProjectiveMap {
 public:
  ProjectiveMap() = default;
  explicit ProjectiveMap(const Mat& m, bool normalize_det = true) {
    require(m.rows() == m.cols() && m.rows() >= 2, Err::BadDimensions, "square matrix required");
    double det = m.determinant();
    require(std::isfinite(det) && det != 0.0, Err::Singular, "non-invertible matrix");
    if (normalize_det) {
      double s = std::pow(std::abs(det), 1.0 / static_cast<double>(m.rows()));
      matrix_ = m / s;
      det_normalized_ = true;
    } else {
      matrix_ = m;
      det_normalized_ = false;
    }
  }

  static ProjectiveMap identity(int d) { return ProjectiveMap(Mat::Identity(d, d)); }

  const Mat& matrix() const { return matrix_; }
  bool det_normalized() const { return det_normalized_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  ProjectivePoint apply(const ProjectivePoint& p) const {
    return ProjectivePoint(matrix_ * p.coords());
  }
  // Hyperplanes pull back by the transpose inverse.
  ProjectiveHyperplane apply(const ProjectiveHyperplane& h) const {
    return ProjectiveHyperplane(matrix_.inverse().transpose() * h.covector());
  }
  ProjectiveMap inverse() const { return ProjectiveMap(matrix_.inverse(), det_normalized_); }
  ProjectiveMap compose(const ProjectiveMap& o) const {
    return ProjectiveMap(matrix_ * o.matrix(), det_normalized_ && o.det_normalized());
  }

 private:
  Mat matrix_;
  bool det_normalized_ = false;
};

// Affine chart of P(R^d): frame columns map chart coordinates (x, 1) to
// homogeneous representatives; the d-th frame column is the chart origin.
class AffineChart {
 public:
  AffineChart() = default;
  AffineChart(const ProjectiveHyperplane& infinity, const Mat& frame)
      : infinity_(infinity), frame_(frame), inv_frame_(frame.inverse()) {
    require(std::abs(frame.determinant()) > 1e-14, Err::BadDimensions, "frame not invertible");
  }

  // Chart whose hyperplane at infinity is ker(covector) and whose origin is
  // a point with covector value 1; basis completed orthonormally.
  static AffineChart from_infinity(const ProjectiveHyperplane& infinity) {
    const Vec& w = infinity.covector();
    int d = static_cast<int>(w.size());
    Eigen::JacobiSVD<Mat> svd(w.transpose(), Eigen::ComputeFullV);
    Mat v = svd.matrixV();  // columns 1..d-1 span ker(w)
    Mat frame(d, d);
    frame.leftCols(d - 1) = v.rightCols(d - 1);
    frame.col(d - 1) = w / w.squaredNorm();
    return AffineChart(infinity, frame);
  }

  int dim() const { return static_cast<int>(frame_.rows()); }
  const ProjectiveHyperplane& infinity_hyperplane() const { return infinity_; }
  const Mat& frame() const { return frame_; }

  bool representable(const ProjectivePoint& p, double tolerance = 1e-13) const {
    Vec w = inv_frame_ * p.coords();
    return std::abs(w[dim() - 1]) > tolerance * w.norm();
  }
  Vec to_chart(const ProjectivePoint& p) const {
    Vec w = inv_frame_ * p.coords();
    double last = w[dim() - 1];
    require(std::abs(last) > 1e-300, Err::OutOfRange, "point on the chart's infinity hyperplane");
    return w.head(dim() - 1) / last;
  }
  ProjectivePoint from_chart(const Vec& x) const {
    Vec w(dim());
    w.head(dim() - 1) = x;
    w[dim() - 1] = 1.0;
    return ProjectivePoint(frame_ * w);
  }
  // Homogeneous lift with chart-affine last coordinate 1 (no sign flip).
  Vec lift(const Vec& x) const {
    Vec w(dim());
    w.head(dim() - 1) = x;
    w[dim() - 1] = 1.0;
    return frame_ * w;
  }

 private:
  ProjectiveHyperplane infinity_;
  Mat frame_;
  Mat inv_frame_;
};

namespace detail {
// Rank-2 coordinates of four nearly-collinear points: rows are the points'
// components in the dominant plane, used for P^1 determinant cross-ratios.
inline Eigen::Matrix<double, 4, 2> line_coordinates(const ProjectivePoint& a,
                                                    const ProjectivePoint& b,
                                                    const ProjectivePoint& x,
                                                    const ProjectivePoint& y) {
  int d = a.dim();
  Mat stacked(4, d);
  stacked.row(0) = a.coords();
  stacked.row(1) = b.coords();
  stacked.row(2) = x.coords();
  stacked.row(3) = y.coords();
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeThinV | Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  int r = std::min<int>(4, d);
  if (r > 2) {
    require(s[2] <= tol::collinear * s[0], Err::NotCollinear,
            "four points do not span a projective line");
  }
  Mat plane = svd.matrixV().leftCols(2);  // d x 2 orthonormal basis of the span
  Eigen::Matrix<double, 4, 2> coords;
  coords = stacked * plane;
  return coords;
}

inline double det2(const Eigen::RowVector2d& u, const Eigen::RowVector2d& v) {
  return u[0] * v[1] - u[1] * v[0];
}
}  // namespace detail

// Cross-ratio [a, b; x, y] = (|a-y| |b-x|) / (|a-x| |b-y|), chart-free via
// P^1 determinants. Requires the quadruple to be collinear; raises on the
// degenerate configurations x = a or y = b instead of returning infinity.
inline double cross_ratio(const ProjectivePoint& a, const ProjectivePoint& b,
                          const ProjectivePoint& x, const ProjectivePoint& y) {
  auto c = detail::line_coordinates(a, b, x, y);
  Eigen::RowVector2d ca = c.row(0), cb = c.row(1), cx = c.row(2), cy = c.row(3);
  double day = std::abs(detail::det2(ca, cy));
  double dbx = std::abs(detail::det2(cb, cx));
  double dax = std::abs(detail::det2(ca, cx));
  double dby = std::abs(detail::det2(cb, cy));
  // Rows are unit vectors, so the determinants are sines of angles.
  require(dax > tol::point_eq, Err::DegenerateQuadruple, "x coincides with a");
  require(dby > tol::point_eq, Err::DegenerateQuadruple, "y coincides with b");
  return (day * dbx) / (dax * dby);
}

}  // namespace hglab
