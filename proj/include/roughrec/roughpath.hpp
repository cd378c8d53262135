#pragma once

// Level-2 weakly geometric rough paths on time grids.
//
// A weakly geometric second level is determined by its antisymmetric part:
// XX_ts = 1/2 X_ts (x) X_ts + A_ts. Only (X_ts, A_ts) is stored, so the
// symmetric part can never drift away from 1/2 x (x) x.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace roughrec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Number of independent area entries a(j,k), j<k.
constexpr int area_dim(int ell) { return ell * (ell - 1) / 2; }

/// m = ell(ell+1)/2, the dimension of (X_ts, A_ts).
constexpr int log_dim(int ell) { return ell * (ell + 1) / 2; }

/// Pair (X_ts, A_ts): level-1 increment and antisymmetric Levy area.
class RoughIncrement {
 public:
  /// Antisymmetrizes `area`; throws InvalidParameter if its symmetric part
  /// exceeds 1e-9 in max norm and DimensionMismatch on shape errors.
  RoughIncrement(Vec x, const Mat& area);

  static RoughIncrement zero(int ell);

  /// Coordinates (x^1..x^ell, a^{12}, a^{13}, ..., a^{ell-1,ell}).
  static RoughIncrement from_coordinates(const Vec& coords, int ell);

  int ell() const { return static_cast<int>(x_.size()); }
  const Vec& x() const { return x_; }
  const Mat& area() const { return area_; }

  /// Full second level 1/2 x (x) x + a.
  Mat second_level() const;

  Vec to_coordinates() const;

 private:
  RoughIncrement(Vec x, Mat area, bool /*trusted*/)
      : x_(std::move(x)), area_(std::move(area)) {}

  Vec x_;
  Mat area_;

  friend RoughIncrement chen_mul(const RoughIncrement&, const RoughIncrement&);
};

/// Chen product of increments over [s,u] and [u,t].
RoughIncrement chen_mul(const RoughIncrement& left, const RoughIncrement& right);

/// Upper-triangle entries of an antisymmetric matrix in lexicographic (j,k) order.
Vec area_coordinates(const Mat& area);
Mat area_from_coordinates(const Vec& coords, int ell);

/// Sampled rough path. Multi-step increments are Chen folds of the steps.
class GridRoughPath {
 public:
  /// values: (n+1) x ell; step_areas: n antisymmetric ell x ell matrices.
  GridRoughPath(std::vector<double> times, Mat values, std::vector<Mat> step_areas,
                double alpha);

  int ell() const { return static_cast<int>(values_.cols()); }
  int steps() const { return static_cast<int>(times_.size()) - 1; }
  const std::vector<double>& times() const { return times_; }
  const Mat& values() const { return values_; }
  const Mat& step_area(int i) const { return step_areas_.at(i); }
  const std::vector<Mat>& step_areas() const { return step_areas_; }
  double alpha() const { return alpha_; }

  RoughIncrement step(int i) const;

  /// Increment over [t_i, t_j], folded left to right. Requires 0 <= i < j <= n.
  RoughIncrement increment(int i, int j) const;

 private:
  std::vector<double> times_;
  Mat values_;
  std::vector<Mat> step_areas_;
  double alpha_;
};

/// Lift of the piecewise-linear interpolation: every step has zero area.
GridRoughPath lift_piecewise_linear(std::vector<double> times, Mat values, double alpha = 0.5);

struct BrownianSpec {
  int ell = 2;
  int n_coarse = 256;
  int n_fine = 16;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  double alpha = 0.4;
};

/// Stratonovich (weakly geometric) lift of a Brownian motion, approximated by
/// lifting a fine piecewise-linear walk and keeping every n_fine-th point.
GridRoughPath sample_brownian_lift(const BrownianSpec& spec);

/// Rough path with X_ts = v[0..ell) (t-s) and A_ts = area(v[ell..m)) (t-s).
GridRoughPath make_linear_rough_path(const Vec& v, int ell, std::vector<double> times,
                                     double alpha = 0.5);

/// Splits every step into `pieces` identical Chen factors (x/k, a/k). The
/// cross terms vanish because the factors are collinear, so every original
/// increment is reproduced.
GridRoughPath chen_refine(const GridRoughPath& path, int pieces);

/// Unit circle (cos t, sin t) sampled at n+1 uniform points of [0, 2 pi * turns].
GridRoughPath circle_lift(int n, double turns = 1.0);

/// Grid estimates (lower bounds of the true suprema).
struct HolderNorms {
  double sup_norm = 0.0;
  double holder1 = 0.0;
  double holder2 = 0.0;
};

HolderNorms holder_norms(const GridRoughPath& path, double alpha);

}  // namespace roughrec
