#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace hglab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

// Error codes follow the operation contracts; one exception type carries them
// so callers can branch on the code without string matching.
enum class Err {
  NotCollinear,
  DegenerateQuadruple,
  Singular,
  EmptyProduct,
  IndexOutOfRange,
  NotInterior,
  CoincidentPoints,
  NotOnBoundary,
  UnsupportedRepresentation,
  BadDimensions,
  BadCartanData,
  NotProximalEnough,
  BadExponent,
  OutOfRange,
  SamplerProducedIntersectingBall,
  ExplosionGuard,
  RayExitsReach,
  NotCommuting,
  DegenerateWeights,
  NotBiproximal,
  NotDivergent,
  InsufficientScales,
  NotC1Point,
  TooShort,
  EmptyAnnulus,
  EndpointNotBoundary,
  NonUniqueSupportRequired,
  DimensionMismatch,
  DegenerateDomain,
  NoStableGap,
  ConfigInvalid,
  ScenarioFailed,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::NotCollinear: return "NotCollinear";
    case Err::DegenerateQuadruple: return "DegenerateQuadruple";
    case Err::Singular: return "Singular";
    case Err::EmptyProduct: return "EmptyProduct";
    case Err::IndexOutOfRange: return "IndexOutOfRange";
    case Err::NotInterior: return "NotInterior";
    case Err::CoincidentPoints: return "CoincidentPoints";
    case Err::NotOnBoundary: return "NotOnBoundary";
    case Err::UnsupportedRepresentation: return "UnsupportedRepresentation";
    case Err::BadDimensions: return "BadDimensions";
    case Err::BadCartanData: return "BadCartanData";
    case Err::NotProximalEnough: return "NotProximalEnough";
    case Err::BadExponent: return "BadExponent";
    case Err::OutOfRange: return "OutOfRange";
    case Err::SamplerProducedIntersectingBall: return "SamplerProducedIntersectingBall";
    case Err::ExplosionGuard: return "ExplosionGuard";
    case Err::RayExitsReach: return "RayExitsReach";
    case Err::NotCommuting: return "NotCommuting";
    case Err::DegenerateWeights: return "DegenerateWeights";
    case Err::NotBiproximal: return "NotBiproximal";
    case Err::NotDivergent: return "NotDivergent";
    case Err::InsufficientScales: return "InsufficientScales";
    case Err::NotC1Point: return "NotC1Point";
    case Err::TooShort: return "TooShort";
    case Err::EmptyAnnulus: return "EmptyAnnulus";
    case Err::EndpointNotBoundary: return "EndpointNotBoundary";
    case Err::NonUniqueSupportRequired: return "NonUniqueSupportRequired";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::DegenerateDomain: return "DegenerateDomain";
    case Err::NoStableGap: return "NoStableGap";
    case Err::ConfigInvalid: return "ConfigInvalid";
    case Err::ScenarioFailed: return "ScenarioFailed";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what)
      : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Err code, const std::string& what) {
  if (!cond) fail(code, what);
}

// Numerical tolerances shared across modules.
namespace tol {
inline constexpr double unit_norm = 1e-12;       // homogeneous normalization
inline constexpr double point_eq = 1e-9;         // projective point equality (angle)
inline constexpr double collinear = 1e-9;        // sine of angle between spanned planes
inline constexpr double det_norm = 1e-9;         // |det| = 1 check
inline constexpr double halfspace = 1e-10;       // polytope sign tests
inline constexpr double boundary_band = 1e-8;    // hull/graph boundary membership band
inline constexpr double support_vanish = 1e-8;   // support covector vanishing at the point
inline constexpr double chord_bisect = 1e-12;    // chart tolerance for bisected chords
inline constexpr double proximal_gap = 1e-6;     // eigenvalue ratio margin for proximality
inline constexpr double biproximal_gap = 1e-8;   // relative eigen gap for biproximality
inline constexpr double commutator = 1e-10;      // commuting-generator verification
inline constexpr double segment_angle = 1e-6;    // collinear-run detection on hulls
}  // namespace tol

// All randomness is drawn from explicitly seeded engines; samplers own their
// engine so runs are reproducible byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(eng_);
  }
  double normal() {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(eng_);
  }
  int uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(eng_);
  }
  Vec gaussian_vector(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Mat gaussian_matrix(int r, int c) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }
  // Haar-ish random rotation via QR of a Gaussian matrix.
  Mat random_rotation(int n) {
    Mat g = gaussian_matrix(n, n);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline double sqr(double x) { return x * x; }

}  // namespace hglab
