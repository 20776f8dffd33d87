#pragma once

#include "hglab/cartan.hpp"
#include "hglab/common.hpp"
#include "hglab/domain_builders.hpp"
#include "hglab/domains.hpp"
#include "hglab/hilbert.hpp"
#include "hglab/projective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace hglab {

// Words over a generator list, stored as (generator index, exponent) runs.
struct Letter {
  int gen = 0;
  int exp = 0;
};
using Word = std::vector<Letter>;

inline Word reduce_word(const Word& w) {
  Word out;
  for (const auto& l : w) {
    if (l.exp == 0) continue;
    if (!out.empty() && out.back().gen == l.gen) {
      out.back().exp += l.exp;
      if (out.back().exp == 0) out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

inline Word inverse_word(const Word& w) {
  Word out;
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back({it->gen, -it->exp});
  return out;
}

inline Word concat_words(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return reduce_word(out);
}

inline int word_length(const Word& w) {
  int n = 0;
  for (const auto& l : w) n += std::abs(l.exp);
  return n;
}

inline std::string word_string(const Word& w) {
  if (w.empty()) return "id";
  std::string s;
  for (const auto& l : w) {
    if (!s.empty()) s += ".";
    s += "g" + std::to_string(l.gen);
    if (l.exp != 1) s += "^" + std::to_string(l.exp);
  }
  return s;
}

// Lexicographic order on (gen, exp) runs; used only for deterministic ties.
inline bool word_less(const Word& a, const Word& b) {
  for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].gen != b[i].gen) return a[i].gen < b[i].gen;
    if (a[i].exp != b[i].exp) return a[i].exp < b[i].exp;
  }
  return a.size() < b.size();
}

struct GroupElement {
  ProjectiveMap map;
  Word word;
};

// Expand a word into the ordered factor list (reading order) over the given
// generators; powers become repeated factors so renormalized Cartan
// accumulation never sees an overflowing matrix.
inline std::vector<ProjectiveMap> word_factors(const Word& w,
                                               const std::vector<ProjectiveMap>& gens) {
  std::vector<ProjectiveMap> out;
  for (const auto& l : w) {
    require(l.gen >= 0 && l.gen < static_cast<int>(gens.size()), Err::IndexOutOfRange,
            "generator index");
    ProjectiveMap g = l.exp > 0 ? gens[l.gen] : gens[l.gen].inverse();
    for (int i = 0; i < std::abs(l.exp); ++i) out.push_back(g);
  }
  if (out.empty()) out.push_back(ProjectiveMap::identity(gens[0].dim()));
  return out;
}

inline CartanVector word_cartan(const Word& w, const std::vector<ProjectiveMap>& gens) {
  return cartan_of_product(word_factors(w, gens));
}

namespace detail {
inline bool maps_projectively_equal(const Mat& a, const Mat& b, double tolerance) {
  double dp = (a - b).cwiseAbs().maxCoeff();
  double dm = (a + b).cwiseAbs().maxCoeff();
  return std::min(dp, dm) <= tolerance;
}
}  // namespace detail

// All reduced words of length <= max_len over the generators and their
// inverses, deduplicated by projective map equality. Deterministic BFS order
// with word-length then lexicographic tie-breaking.
inline std::vector<GroupElement> orbit_ball(const std::vector<ProjectiveMap>& gens, int max_len,
                                            int explosion_cap = 200000) {
  require(max_len >= 0, Err::BadDimensions, "negative word length");
  int d = gens[0].dim();
  std::vector<GroupElement> out;
  out.push_back({ProjectiveMap::identity(d), {}});
  std::vector<size_t> frontier{0};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<size_t> next;
    for (size_t idx : frontier) {
      GroupElement cur = out[idx];
      for (int g = 0; g < static_cast<int>(gens.size()); ++g) {
        for (int e : {+1, -1}) {
          if (!cur.word.empty() && cur.word.back().gen == g &&
              ((cur.word.back().exp > 0) != (e > 0)))
            continue;  // free reduction
          Mat m = e > 0 ? Mat(cur.map.matrix() * gens[g].matrix())
                        : Mat(cur.map.matrix() * gens[g].inverse().matrix());
          ProjectiveMap pm(m, true);
          bool dup = false;
          for (const auto& known : out) {
            if (detail::maps_projectively_equal(known.map.matrix(), pm.matrix(), 1e-9)) {
              dup = true;
              break;
            }
          }
          if (dup) continue;
          require(static_cast<int>(out.size()) < explosion_cap, Err::ExplosionGuard,
                  "orbit ball exceeds the configured cap");
          Word w = cur.word;
          if (!w.empty() && w.back().gen == g)
            w.back().exp += e;
          else
            w.push_back({g, e});
          next.push_back(out.size());
          out.push_back({pm, reduce_word(w)});
        }
      }
    }
    frontier = std::move(next);
  }
  return out;
}

struct TrackingSequence {
  std::vector<GroupElement> elements;  // gamma_0 .. gamma_N
  ProjectivePoint basepoint;
  std::vector<double> residuals;  // hil(x0, gamma_n^{-1} c(n))
  double achieved_R = 0.0;
};

namespace detail {
// Unit vector in double-double with a separate log scale: survives iterated
// application of word letters whose full product has condition e^{2t}.
struct ScaledDirection {
  std::vector<DD> v;
  double log_scale = 0.0;

  static ScaledDirection from(const Vec& x) {
    ScaledDirection out;
    out.v.resize(x.size());
    double n = x.norm();
    for (int i = 0; i < x.size(); ++i) out.v[i] = DD{x[i] / n, 0.0};
    out.log_scale = std::log(n);
    return out;
  }

  void apply(const Mat& m) {
    int d = static_cast<int>(v.size());
    std::vector<DD> w(d);
    for (int i = 0; i < d; ++i) {
      DD acc{0.0, 0.0};
      for (int j = 0; j < d; ++j) acc = dd_add(acc, dd_mul(DD{m(i, j), 0.0}, v[j]));
      w[i] = acc;
    }
    DD norm2{0.0, 0.0};
    for (int i = 0; i < d; ++i) norm2 = dd_add(norm2, dd_mul(w[i], w[i]));
    double log_norm = 0.5 * dd_log_abs(norm2);
    double inv = std::exp(-log_norm);
    for (int i = 0; i < d; ++i) w[i] = dd_mul(w[i], DD{inv, 0.0});
    v = std::move(w);
    log_scale += log_norm;
  }

  Vec combined_with(const ScaledDirection& other, double log_factor_other) const {
    // this + e^{log_factor_other} * other, rounded to doubles at the end.
    int d = static_cast<int>(v.size());
    double f = std::exp(log_factor_other);
    Vec out(d);
    for (int i = 0; i < d; ++i) {
      DD s = dd_add(v[i], dd_mul(DD{f, 0.0}, other.v[i]));
      out[i] = s.hi + s.lo;
    }
    return out;
  }
};
}  // namespace detail

// gamma^{-1} c(t), evaluated through the word with per-letter normalization
// and log-scale bookkeeping in double-double: the full product has condition
// e^{2t}, so plain doubles would lose the pulled point entirely for large t.
inline ProjectivePoint pulled_ray_point(const Geodesic& ray, const Word& gamma_word,
                                        const std::vector<ProjectiveMap>& gens, double t) {
  auto ua = detail::ScaledDirection::from(ray.lift_backward());
  auto ub = detail::ScaledDirection::from(ray.lift_forward());
  // (l1 ... lk)^{-1} v applies l1^{-1} first.
  for (const auto& l : gamma_word) {
    Mat step = l.exp > 0 ? gens[l.gen].inverse().matrix() : gens[l.gen].matrix();
    for (int i = 0; i < std::abs(l.exp); ++i) {
      ua.apply(step);
      ub.apply(step);
    }
  }
  double expo = -2.0 * t + ua.log_scale - ub.log_scale;
  if (expo <= 0.0) return ProjectivePoint(ub.combined_with(ua, expo));
  return ProjectivePoint(ua.combined_with(ub, -expo));
}

enum class TrackingMode {
  BruteForce,   // spec default: argmin over the full orbit ball per step
  Incremental,  // extend the previous element by a short word per step
};

// Pick group elements gamma_n with gamma_n^{-1} c(n) near the basepoint.
// Brute force scans orbit_ball(L_max) for every n; the incremental mode
// extends gamma_{n-1} by the best short word, which reaches horizons whose
// orbit balls would be astronomically large. Ties break by word length,
// then lexicographically.
inline TrackingSequence tracking_sequence(const ConvexDomain& dom,
                                          const std::vector<ProjectiveMap>& gens,
                                          const Geodesic& ray, const ProjectivePoint& x0, int n_max,
                                          int len_budget,
                                          TrackingMode mode = TrackingMode::BruteForce,
                                          double failure_threshold = 10.0) {
  require(dom.contains(x0) == Location::Interior, Err::NotInterior, "tracking basepoint");
  TrackingSequence seq;
  seq.basepoint = x0;
  auto residual_of = [&](const GroupElement& g, int n) {
    ProjectivePoint pulled = pulled_ray_point(ray, g.word, gens, static_cast<double>(n));
    if (dom.contains(pulled) != Location::Interior)
      return std::numeric_limits<double>::infinity();
    try {
      return hilbert_distance(dom, x0, pulled);
    } catch (const Error& e) {
      // Candidates grazing the boundary below the numerical floor are
      // infinitely bad rather than fatal.
      if (e.code() == Err::DegenerateQuadruple) return std::numeric_limits<double>::infinity();
      throw;
    }
  };

  if (mode == TrackingMode::BruteForce) {
    auto ball = orbit_ball(gens, len_budget);
    for (int n = 0; n <= n_max; ++n) {
      const GroupElement* best = nullptr;
      double best_r = std::numeric_limits<double>::infinity();
      for (const auto& cand : ball) {
        double r = residual_of(cand, n);
        if (r < best_r - 1e-12 ||
            (r < best_r + 1e-12 && best &&
             (word_length(cand.word) < word_length(best->word) ||
              (word_length(cand.word) == word_length(best->word) &&
               word_less(cand.word, best->word))))) {
          best = &cand;
          best_r = std::min(best_r, r);
        }
      }
      require(best && best_r < failure_threshold, Err::RayExitsReach,
              "length budget too small for this horizon");
      seq.elements.push_back(*best);
      seq.residuals.push_back(best_r);
    }
  } else {
    auto steps = orbit_ball(gens, len_budget);
    GroupElement cur{ProjectiveMap::identity(gens[0].dim()), {}};
    for (int n = 0; n <= n_max; ++n) {
      const GroupElement* best_step = nullptr;
      double best_r = std::numeric_limits<double>::infinity();
      Word best_word;
      for (const auto& step : steps) {
        GroupElement cand{cur.map.compose(step.map), concat_words(cur.word, step.word)};
        double r = residual_of(cand, n);
        if (r < best_r - 1e-12 ||
            (r < best_r + 1e-12 && best_step &&
             (word_length(cand.word) < word_length(best_word) ||
              (word_length(cand.word) == word_length(best_word) &&
               word_less(cand.word, best_word))))) {
          best_step = &step;
          best_word = cand.word;
          best_r = std::min(best_r, r);
        }
      }
      require(best_step && best_r < failure_threshold, Err::RayExitsReach,
              "step budget too small for this ray");
      cur = {cur.map.compose(best_step->map), concat_words(cur.word, best_step->word)};
      seq.elements.push_back(cur);
      seq.residuals.push_back(best_r);
    }
  }
  seq.achieved_R = *std::max_element(seq.residuals.begin(), seq.residuals.end());
  return seq;
}

struct BiproximalityResult {
  bool biproximal = false;
  double top_gap = 0.0, bottom_gap = 0.0;
};

// True iff the largest and smallest eigenvalue moduli are simple with
// relative gap above 1e-8.
inline BiproximalityResult biproximality_check(const ProjectiveMap& g) {
  auto gaps = detail::eigen_gaps(g.matrix());
  BiproximalityResult out;
  out.top_gap = gaps.top_gap;
  out.bottom_gap = gaps.bottom_gap;
  out.biproximal = gaps.top_gap > tol::biproximal_gap && gaps.bottom_gap > tol::biproximal_gap;
  return out;
}

struct WeightPolygon {
  std::vector<Eigen::Vector2d> weights;   // one log-eigenvalue covector per eigenline
  std::vector<Eigen::Vector2d> hull_ccw;  // hull polygon vertices
  bool origin_interior = false;
};

struct FlatDirection {
  Eigen::Vector2i v;                // lattice direction with mu_{1,2} flat along it
  WeightPolygon polygon;
  Mat eigenbasis;                   // simultaneous eigenbasis columns
  std::vector<ProjectiveMap> gens;  // the two commuting generators
  double certified_C = 0.0;         // max observed mu_{1,2}(a_n) on the range
  std::vector<GroupElement> a;      // a_0 = id, a_1, ..., a_n

  const GroupElement& at(int n) const {
    require(n >= 0 && n < static_cast<int>(a.size()), Err::IndexOutOfRange, "flat index");
    return a[n];
  }
};

// Weight-polygon edge algorithm: for a rank-2 group of commuting
// diagonalizable matrices, find the lattice ray along which the top gap
// mu_{1,2} stays bounded, and return word-length-n elements along it.
inline FlatDirection flat_direction(const std::vector<ProjectiveMap>& a_gens, int n_max = 48) {
  require(a_gens.size() == 2, Err::BadDimensions, "rank-2 abelian group expected");
  int d = a_gens[0].dim();
  const Mat& g1 = a_gens[0].matrix();
  const Mat& g2 = a_gens[1].matrix();
  double scale = std::max(g1.cwiseAbs().maxCoeff(), g2.cwiseAbs().maxCoeff());
  require((g1 * g2 - g2 * g1).cwiseAbs().maxCoeff() <= tol::commutator * scale * scale,
          Err::NotCommuting, "generators do not commute");

  // Simultaneous eigenbasis from a generic combination.
  Mat combo = g1 + 0.7391703 * g2;
  Eigen::EigenSolver<Mat> es(combo);
  Mat basis(d, d);
  for (int i = 0; i < d; ++i) {
    require(std::abs(es.eigenvalues()[i].imag()) < 1e-10 * std::abs(es.eigenvalues()[i]),
            Err::NotCommuting, "complex eigenvalues in the abelian group");
    basis.col(i) = es.eigenvectors().col(i).real();
  }
  Mat binv = basis.inverse();
  auto diag_of = [&](const Mat& g) {
    Mat t = binv * g * basis;
    require((t - Mat(t.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-8 * scale,
            Err::NotCommuting, "generator not diagonal in the joint eigenbasis");
    return Vec(t.diagonal());
  };
  Vec l1 = diag_of(g1), l2 = diag_of(g2);

  FlatDirection out;
  out.gens = a_gens;
  out.eigenbasis = basis;
  for (int i = 0; i < d; ++i)
    out.polygon.weights.emplace_back(std::log(std::abs(l1[i])), std::log(std::abs(l2[i])));
  {
    std::vector<Eigen::Vector2d> pts = out.polygon.weights;
    Hull2D hull = convex_hull_2d(pts, 1e-12);
    out.polygon.hull_ccw = hull.vertices;
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& e : hull.edges) min_margin = std::min(min_margin, e.offset);
    out.polygon.origin_interior = min_margin > 1e-9;
    require(out.polygon.origin_interior, Err::DegenerateWeights,
            "weight polygon has empty interior");
  }

  // Deterministic scan for the smallest primitive integer direction whose
  // maximum over the weights is attained at least twice (a polygon edge).
  auto top_two = [&](const Eigen::Vector2i& v) {
    double best = -std::numeric_limits<double>::infinity();
    int count = 0;
    for (const auto& w : out.polygon.weights) {
      double val = w.x() * v.x() + w.y() * v.y();
      if (val > best + 1e-9) {
        best = val;
        count = 1;
      } else if (val > best - 1e-9) {
        ++count;
      }
    }
    return count;
  };
  bool found = false;
  for (int s = 1; s <= 16 && !found; ++s) {
    for (int p = s; p >= -s && !found; --p) {
      for (int q : {s - std::abs(p), -(s - std::abs(p))}) {
        Eigen::Vector2i v(p, q);
        if (std::abs(p) + std::abs(q) != s) continue;
        if (std::gcd(std::abs(p), std::abs(q)) > 1) continue;
        if (top_two(v) >= 2) {
          out.v = v;
          found = true;
          break;
        }
      }
    }
  }
  require(found, Err::DegenerateWeights, "no lattice edge direction found");

  // Lattice points of l1 length n nearest the ray through v.
  int vnorm = std::abs(out.v.x()) + std::abs(out.v.y());
  Eigen::Vector2d ray(out.v.x(), out.v.y());
  ray.normalize();
  out.a.push_back({ProjectiveMap::identity(d), {}});
  for (int n = 1; n <= n_max; ++n) {
    Eigen::Vector2i best(0, 0);
    double best_off = std::numeric_limits<double>::infinity();
    for (int u = -n; u <= n; ++u) {
      for (int w : {n - std::abs(u), -(n - std::abs(u))}) {
        if (std::abs(u) + std::abs(w) != n) continue;
        Eigen::Vector2d p(u, w);
        double along = p.dot(ray);
        if (along <= 0) continue;
        double off = (p - along * ray).norm();
        if (off < best_off - 1e-12) {
          best_off = off;
          best = Eigen::Vector2i(u, w);
        }
      }
    }
    require(best_off < std::numeric_limits<double>::infinity(), Err::DegenerateWeights,
            "no lattice point of this length along the ray");
    Word word;
    if (best.x() != 0) word.push_back({0, best.x()});
    if (best.y() != 0) word.push_back({1, best.y()});
    Mat m = Mat::Identity(d, d);
    auto apply_power = [&](const Mat& g, int e) {
      Mat gg = e > 0 ? g : Mat(g.inverse());
      for (int i = 0; i < std::abs(e); ++i) m = m * gg;
    };
    apply_power(g1, best.x());
    apply_power(g2, best.y());
    out.a.push_back({ProjectiveMap(m, true), word});
    out.certified_C =
        std::max(out.certified_C, mu_gap(cartan(out.a.back().map), 1, 2));
  }
  return out;
}

// Def-7.5-style words: w_0 = id, w_{2m} = a_1 g a_2 g^2 ... a_m g^m,
// w_{2m+1} = w_{2m} a_{m+1}. The letter-level factor word is retained so
// quotients cancel exactly and products go through the renormalized
// accumulator.
struct CounterexampleWords {
  std::vector<ProjectiveMap> gens;  // [gamma, a, b]
  std::vector<Word> w;              // w_0 .. w_k in those generators
};

inline Word wk_word(const FlatDirection& flat, int k) {
  // Generator indexing: 0 = gamma, 1 = first abelian generator, 2 = second.
  auto a_word = [&](int j) {
    Word w;
    for (const auto& l : flat.at(j).word) w.push_back({l.gen + 1, l.exp});
    return w;
  };
  Word w;
  int m = k / 2;
  for (int j = 1; j <= m; ++j) {
    w = concat_words(w, a_word(j));
    w = concat_words(w, Word{{0, j}});
  }
  if (k % 2 == 1) w = concat_words(w, a_word(m + 1));
  return w;
}

// Evaluated w_k element; the explicit matrix overflows doubles for large k,
// so callers that only need Cartan data should stay on the word route.
inline GroupElement wk_element(const ProjectiveMap& gamma, const FlatDirection& flat, int k) {
  require(biproximality_check(gamma).biproximal, Err::NotBiproximal,
          "the loxodromic factor must be biproximal");
  std::vector<ProjectiveMap> gens = {gamma, flat.gens[0], flat.gens[1]};
  Word w = wk_word(flat, k);
  Mat m = Mat::Identity(gamma.dim(), gamma.dim());
  for (const auto& f : word_factors(w, gens)) m = m * f.matrix();
  require(m.allFinite() && std::abs(m.determinant()) > 0.0, Err::Singular,
          "explicit w_k overflows double range; use the word route");
  return {ProjectiveMap(m, true), w};
}

inline CounterexampleWords build_counterexample_words(const ProjectiveMap& gamma,
                                                      const FlatDirection& flat, int k_max) {
  require(biproximality_check(gamma).biproximal, Err::NotBiproximal,
          "the loxodromic factor must be biproximal");
  CounterexampleWords out;
  out.gens = {gamma, flat.gens[0], flat.gens[1]};
  for (int k = 0; k <= k_max; ++k) out.w.push_back(wk_word(flat, k));
  return out;
}

struct StraightnessReport {
  double d_hat = 0.0;                      // max over (n, m) pairs
  int argmax_n = 0, argmax_m = 0;
  std::vector<std::vector<double>> table;  // table[n][m-1] = residual at (n, n+m)
};

// Straightness residual mu_{i,i+1}(g_n) + mu_{i,i+1}(g_n^{-1} g_{n+m})
// - mu_{i,i+1}(g_{n+m}) over all pairs, with quotients taken at word level.
inline StraightnessReport straightness_residual(const std::vector<GroupElement>& seq,
                                                const std::vector<ProjectiveMap>& gens, int i) {
  require(seq.size() >= 2, Err::TooShort, "need at least two elements");
  int d = gens[0].dim();
  require(i == 1 || i == d - 1, Err::IndexOutOfRange,
          "straightness applies to the extreme gap indices only");
  int len = static_cast<int>(seq.size());
  std::vector<double> gap(len);
  for (int n = 0; n < len; ++n) gap[n] = mu_gap(word_cartan(seq[n].word, gens), i, i + 1);
  StraightnessReport rep;
  rep.table.assign(len, {});
  for (int n = 0; n < len; ++n) {
    for (int m = 1; n + m < len; ++m) {
      Word quot = concat_words(inverse_word(seq[n].word), seq[n + m].word);
      double q = mu_gap(word_cartan(quot, gens), i, i + 1);
      double resid = gap[n] + q - gap[n + m];
      rep.table[n].push_back(resid);
      if (resid > rep.d_hat) {
        rep.d_hat = resid;
        rep.argmax_n = n;
        rep.argmax_m = m;
      }
    }
  }
  return rep;
}

struct SvDistanceGap {
  std::vector<double> deviation;  // mu_{1,d}(g_n) - 2 hil(x0, g_n x0) per n
  double max_abs = 0.0;
};

// Distance-vs-gap comparison in the artifact's convention mu_{1,d} = 2 hil
// (the half-log metric forces the factor 2; closed forms on the Klein disk
// and the simplex pin it down exactly).
inline SvDistanceGap sv_distance_gap(const ConvexDomain& dom,
                                     const std::vector<GroupElement>& seq,
                                     const std::vector<ProjectiveMap>& gens,
                                     const ProjectivePoint& x0) {
  SvDistanceGap out;
  for (const auto& g : seq) {
    double mu = mu_gap(word_cartan(g.word, gens), 1, g.map.dim());
    double dist = hilbert_distance(dom, x0, g.map.apply(x0));
    double dev = mu - 2.0 * dist;
    out.deviation.push_back(dev);
    out.max_abs = std::max(out.max_abs, std::abs(dev));
  }
  return out;
}

// Least-squares slope of y against x; the trend diagnostic for flatness
// claims.
inline double fitted_slope(const std::vector<double>& y) {
  int n = static_cast<int>(y.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += i;
    sy += y[i];
    sxx += static_cast<double>(i) * i;
    sxy += i * y[i];
  }
  double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace hglab
