#pragma once

#include "hglab/common.hpp"
#include "hglab/projective.hpp"

#include <Eigen/Dense>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hglab {

// Sorted vector of log singular values (nats). Gaps mu_{i,j} use the paper's
// 1-based indexing.
class CartanVector {
 public:
  CartanVector() = default;
  explicit CartanVector(Vec mu) : mu_(std::move(mu)) {
    for (int i = 0; i + 1 < mu_.size(); ++i) {
      if (mu_[i] < mu_[i + 1]) {
        require(mu_[i + 1] - mu_[i] < 1e-9, Err::BadCartanData, "unsorted Cartan vector");
        std::swap(mu_[i], mu_[i + 1]);
      }
    }
  }

  const Vec& mu() const { return mu_; }
  int dim() const { return static_cast<int>(mu_.size()); }
  double operator[](int i_one_based) const {
    require(i_one_based >= 1 && i_one_based <= dim(), Err::IndexOutOfRange, "mu index");
    return mu_[i_one_based - 1];
  }

 private:
  Vec mu_;
};

inline double mu_gap(const CartanVector& v, int i, int j) {
  require(1 <= i && i <= j && j <= v.dim(), Err::IndexOutOfRange, "mu_gap indices");
  return v[i] - v[j];
}

namespace detail {

// Double-double arithmetic (Dekker/Knuth with FMA). Singular values below
// the top are ill-conditioned functions of rounded intermediate matrices, so
// every quantity that mixes large and small scales is accumulated in roughly
// 106-bit precision and only the final logarithm is rounded.
struct DD {
  double hi = 0.0, lo = 0.0;
};

inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DD two_prod(double a, double b) {
  double p = a * b;
  double err = std::fma(a, b, -p);
  return {p, err};
}

inline DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  double lo = s.lo + a.lo + b.lo;
  DD r = two_sum(s.hi, lo);
  return r;
}

inline DD dd_add(DD a, double b) { return dd_add(a, DD{b, 0.0}); }

inline DD dd_mul(DD a, DD b) {
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return two_sum(p.hi, p.lo);
}

inline DD dd_neg(DD a) { return {-a.hi, -a.lo}; }

inline DD dd_div(DD a, DD b) {
  double q1 = a.hi / b.hi;
  DD r = dd_add(a, dd_neg(dd_mul(DD{q1, 0.0}, b)));
  double q2 = r.hi / b.hi;
  r = dd_add(r, dd_neg(dd_mul(DD{q2, 0.0}, b)));
  double q3 = r.hi / b.hi;
  DD q = two_sum(q1, q2);
  q.lo += q3;
  return two_sum(q.hi, q.lo);
}

inline double dd_log_abs(DD a) {
  double h = std::abs(a.hi);
  if (h == 0.0) return -std::numeric_limits<double>::infinity();
  double corr = a.lo / a.hi;  // same sign convention either way
  return std::log(h) + std::log1p(corr);
}

using DDMat = std::vector<std::vector<DD>>;

// w = m * v accumulated in double-double.
inline std::vector<DD> dd_matvec(const Mat& m, const Vec& v) {
  std::vector<DD> out(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    DD acc{0.0, 0.0};
    for (int j = 0; j < m.cols(); ++j) acc = dd_add(acc, two_prod(m(i, j), v[j]));
    out[i] = acc;
  }
  return out;
}

inline DD dd_dot(const Vec& u, const std::vector<DD>& w) {
  DD acc{0.0, 0.0};
  for (int i = 0; i < u.size(); ++i) acc = dd_add(acc, dd_mul(DD{u[i], 0.0}, w[i]));
  return acc;
}

// log |det| of a small matrix by LU with partial pivoting in double-double.
inline double dd_log_abs_det(const DDMat& a_in) {
  DDMat a = a_in;
  int n = static_cast<int>(a.size());
  double acc = 0.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col].hi) > std::abs(a[piv][col].hi)) piv = r;
    if (a[piv][col].hi == 0.0) return -std::numeric_limits<double>::infinity();
    std::swap(a[piv], a[col]);
    acc += dd_log_abs(a[col][col]);
    for (int r = col + 1; r < n; ++r) {
      DD f = dd_div(a[r][col], a[col][col]);
      for (int c = col; c < n; ++c) a[r][c] = dd_add(a[r][c], dd_neg(dd_mul(f, a[col][c])));
    }
  }
  return acc;
}

inline double dd_log_abs_det(const Mat& m) {
  int n = static_cast<int>(m.rows());
  DDMat a(n, std::vector<DD>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = DD{m(i, j), 0.0};
  return dd_log_abs_det(a);
}

inline std::vector<std::vector<int>> k_subsets(int d, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == d - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// k-th exterior power acting on Lambda^k R^d in the lexicographic minor basis.
inline Mat compound_matrix(const Mat& m, int k) {
  int d = static_cast<int>(m.rows());
  if (k == 1) return m;
  auto subs = k_subsets(d, k);
  int n = static_cast<int>(subs.size());
  Mat out(n, n);
  Mat minor(k, k);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = m(subs[r][i], subs[c][j]);
      out(r, c) = minor.determinant();
    }
  }
  return out;
}

inline double operator_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()[0];
}

inline double log_abs_det(const Mat& m) { return dd_log_abs_det(m); }

// All log singular values of m, refined by compensated Rayleigh quotients
// u_i^T (m v_i) over the SVD's singular vectors. The refinement keeps small
// singular values accurate far beyond the eps * sigma_1 floor of the plain
// factorization.
inline Vec refined_log_singular_values(const Mat& m) {
  int d = static_cast<int>(m.rows());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec mu(d);
  for (int i = 0; i < d; ++i) {
    auto mv = dd_matvec(m, svd.matrixV().col(i));
    DD rq = dd_dot(svd.matrixU().col(i), mv);
    require(rq.hi != 0.0 && std::isfinite(rq.hi), Err::Singular, "vanishing singular value");
    mu[i] = dd_log_abs(rq);
  }
  return mu;
}

inline bool exactly_diagonal(const Mat& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

inline CartanVector sorted_cartan(Vec mu) {
  std::sort(mu.data(), mu.data() + mu.size(), std::greater<double>());
  return CartanVector(std::move(mu));
}

// Cartan vector from the cumulative top-k log norms s_k = log||Lambda^k g||.
inline CartanVector cartan_from_cumulative(const Vec& s) {
  int d = static_cast<int>(s.size());
  Vec mu(d);
  double prev = 0.0;
  for (int k = 0; k < d; ++k) {
    mu[k] = s[k] - prev;
    prev = s[k];
  }
  return sorted_cartan(std::move(mu));
}

}  // namespace detail

namespace detail {
inline Mat orthonormalize(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ();
  return q.leftCols(m.cols());
}
}  // namespace detail

// log of the operator norm of the k-th exterior power; equals
// mu_1 + ... + mu_k. Realizes the minimax characterization directly: the
// norm is the maximal k-volume distortion over k-planes, attained on the top
// singular subspace (polished by subspace iteration), and the volume comes
// out of a double-double Gram determinant rather than the singular values
// themselves, so cartan() and this check are independent routes.
inline double exterior_power_norm_check(const ProjectiveMap& g, int k) {
  int d = g.dim();
  require(1 <= k && k <= d, Err::IndexOutOfRange, "exterior power index");
  const Mat& m = g.matrix();
  require(m.allFinite(), Err::Singular, "non-finite matrix");
  if (k == d) return detail::log_abs_det(m);

  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  Mat q = svd.matrixV().leftCols(k);
  // The volume maximum is flat to second order at the optimum, so a couple
  // of polish rounds make the result insensitive to clustered spectra.
  for (int round = 0; round < 2; ++round) {
    Mat z = m * q;
    double s = z.cwiseAbs().maxCoeff();
    require(s > 0.0 && std::isfinite(s), Err::Singular, "exterior power overflow");
    z /= s;
    q = detail::orthonormalize(Mat(m.transpose() * z));
  }
  // vol_k(g|_Q)^2 = det(Q^T g^T g Q), assembled entirely in double-double.
  detail::DDMat gram(k, std::vector<detail::DD>(k));
  std::vector<std::vector<detail::DD>> cols(k);
  for (int j = 0; j < k; ++j) cols[j] = detail::dd_matvec(m, q.col(j));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      detail::DD acc{0.0, 0.0};
      for (int r = 0; r < d; ++r) acc = detail::dd_add(acc, detail::dd_mul(cols[i][r], cols[j][r]));
      gram[i][j] = acc;
    }
  return 0.5 * detail::dd_log_abs_det(gram);
}

// Cartan projection of a single map: log singular values from the standard
// SVD, with compensated Rayleigh-quotient refinement so the small values
// stay accurate at extreme condition numbers (exact diagonals short-circuit
// to plain log-space arithmetic).
inline CartanVector cartan(const ProjectiveMap& g) {
  const Mat& m = g.matrix();
  int d = g.dim();
  require(m.allFinite(), Err::Singular, "non-finite matrix");

  if (detail::exactly_diagonal(m)) {
    Vec mu(d);
    for (int i = 0; i < d; ++i) {
      double a = std::abs(m(i, i));
      require(a > 0.0, Err::Singular, "zero diagonal entry");
      mu[i] = std::log(a);
    }
    return detail::sorted_cartan(std::move(mu));
  }

  return detail::sorted_cartan(detail::refined_log_singular_values(m));
}

// Incrementally accumulates the Cartan data of an ordered product
// g_1 g_2 ... g_n (word reading order: push appends a factor on the right)
// without ever forming the product: for each k the compound product is kept
// rescaled to unit max entry, with the scale carried in log space. Extending
// a word by one letter is a single push, so prefix sequences are cheap.
class ProductCartanAccumulator {
 public:
  explicit ProductCartanAccumulator(int d) : d_(d), all_diagonal_(true) {
    diag_logs_ = Vec::Zero(d);
    log_det_ = 0.0;
    for (int k = 1; k <= d - 1; ++k) {
      int n = (k == 1) ? d : static_cast<int>(detail::k_subsets(d, k).size());
      compounds_.push_back(Mat::Identity(n, n));
      accum_.push_back(0.0);
    }
  }

  int size() const { return count_; }

  void push(const ProjectiveMap& g) {
    require(g.dim() == d_, Err::DimensionMismatch, "factor dimension");
    const Mat& m = g.matrix();
    ++count_;
    if (all_diagonal_ && detail::exactly_diagonal(m)) {
      for (int i = 0; i < d_; ++i) diag_logs_[i] += std::log(std::abs(m(i, i)));
    } else {
      if (all_diagonal_) demote_to_general();
      push_general(m);
    }
    log_det_ += detail::log_abs_det(m);
  }

  CartanVector current() const {
    require(count_ > 0, Err::EmptyProduct, "no factors accumulated");
    if (all_diagonal_) {
      Vec mu = diag_logs_;
      return detail::sorted_cartan(std::move(mu));
    }
    Vec s(d_);
    for (int k = 1; k <= d_ - 1; ++k) {
      const Mat& p = compounds_[k - 1];
      require(p.allFinite(), Err::Singular, "compound accumulation overflow");
      s[k - 1] = accum_[k - 1] + std::log(detail::operator_norm(p));
    }
    s[d_ - 1] = log_det_;
    return detail::cartan_from_cumulative(s);
  }

 private:
  void demote_to_general() {
    // Replay the diagonal prefix into the general representation.
    all_diagonal_ = false;
    for (int k = 1; k <= d_ - 1; ++k) {
      auto subs = detail::k_subsets(d_, k);
      int n = static_cast<int>(subs.size());
      Vec entry_logs(n);
      for (int r = 0; r < n; ++r) {
        double acc = 0.0;
        for (int i : subs[r]) acc += diag_logs_[i];
        entry_logs[r] = acc;
      }
      double top = entry_logs.maxCoeff();
      Mat p = Mat::Zero(n, n);
      for (int r = 0; r < n; ++r) p(r, r) = std::exp(entry_logs[r] - top);
      compounds_[k - 1] = p;
      accum_[k - 1] = top;
    }
  }

  void push_general(const Mat& m) {
    for (int k = 1; k <= d_ - 1; ++k) {
      Mat c = (k == 1) ? m : detail::compound_matrix(m, k);
      Mat& p = compounds_[k - 1];
      p = p * c;
      double scale = p.cwiseAbs().maxCoeff();
      require(scale > 0.0 && std::isfinite(scale), Err::Singular, "compound factor overflow");
      p /= scale;
      accum_[k - 1] += std::log(scale);
    }
  }

  int d_;
  bool all_diagonal_;
  int count_ = 0;
  Vec diag_logs_;
  double log_det_;
  std::vector<Mat> compounds_;
  std::vector<double> accum_;
};

// Cartan projection of an ordered product in word reading order: the product
// is factors[0] * factors[1] * ... * factors[n-1]. Matches cartan(explicit
// product) whenever that product is representable, and keeps working far
// beyond double dynamic range via per-factor rescaling.
inline CartanVector cartan_of_product(const std::vector<ProjectiveMap>& factors) {
  require(!factors.empty(), Err::EmptyProduct, "empty factor list");
  if (factors.size() == 1) return cartan(factors[0]);
  ProductCartanAccumulator acc(factors[0].dim());
  for (const auto& f : factors) acc.push(f);
  return acc.current();
}

}  // namespace hglab
