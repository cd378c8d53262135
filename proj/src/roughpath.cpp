#include "roughrec/roughpath.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "roughrec/error.hpp"

namespace roughrec {

namespace {

constexpr double kSymmetricResidueTol = 1e-9;

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorKind::NonFinite, std::string(what) + " is not finite");
}

}  // namespace

RoughIncrement::RoughIncrement(Vec x, const Mat& area) : x_(std::move(x)) {
  const auto ell = x_.size();
  if (area.rows() != ell || area.cols() != ell) {
    throw Error(ErrorKind::DimensionMismatch, "area must be ell x ell");
  }
  if (ell > 0 && (area + area.transpose()).cwiseAbs().maxCoeff() > 2.0 * kSymmetricResidueTol) {
    throw Error(ErrorKind::InvalidParameter, "area is not antisymmetric");
  }
  area_ = 0.5 * (area - area.transpose());
}

RoughIncrement RoughIncrement::zero(int ell) {
  return RoughIncrement(Vec::Zero(ell), Mat::Zero(ell, ell), true);
}

RoughIncrement RoughIncrement::from_coordinates(const Vec& coords, int ell) {
  if (coords.size() != log_dim(ell)) {
    throw Error(ErrorKind::DimensionMismatch, "coordinate vector must have length ell(ell+1)/2");
  }
  return RoughIncrement(coords.head(ell), area_from_coordinates(coords.tail(area_dim(ell)), ell),
                        true);
}

Mat RoughIncrement::second_level() const { return 0.5 * x_ * x_.transpose() + area_; }

Vec RoughIncrement::to_coordinates() const {
  Vec out(log_dim(ell()));
  out << x_, area_coordinates(area_);
  return out;
}

RoughIncrement chen_mul(const RoughIncrement& left, const RoughIncrement& right) {
  if (left.ell() != right.ell()) {
    throw Error(ErrorKind::DimensionMismatch, "chen_mul: increments of different dimension");
  }
  const Mat cross = left.x_ * right.x_.transpose();
  Mat area = left.area_ + right.area_ + 0.5 * (cross - cross.transpose());
  return RoughIncrement(left.x_ + right.x_, std::move(area), true);
}

Vec area_coordinates(const Mat& area) {
  const int ell = static_cast<int>(area.rows());
  Vec out(area_dim(ell));
  int p = 0;
  for (int j = 0; j < ell; ++j)
    for (int k = j + 1; k < ell; ++k) out(p++) = area(j, k);
  return out;
}

Mat area_from_coordinates(const Vec& coords, int ell) {
  if (coords.size() != area_dim(ell)) {
    throw Error(ErrorKind::DimensionMismatch, "area coordinates must have length ell(ell-1)/2");
  }
  Mat area = Mat::Zero(ell, ell);
  int p = 0;
  for (int j = 0; j < ell; ++j) {
    for (int k = j + 1; k < ell; ++k) {
      area(j, k) = coords(p);
      area(k, j) = -coords(p);
      ++p;
    }
  }
  return area;
}

GridRoughPath::GridRoughPath(std::vector<double> times, Mat values, std::vector<Mat> step_areas,
                             double alpha)
    : times_(std::move(times)),
      values_(std::move(values)),
      step_areas_(std::move(step_areas)),
      alpha_(alpha) {
  if (times_.size() < 2) throw Error(ErrorKind::InvalidGrid, "a grid needs at least two times");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw Error(ErrorKind::InvalidGrid, "times must be strictly increasing");
    }
  }
  if (values_.rows() != static_cast<Eigen::Index>(times_.size())) {
    throw Error(ErrorKind::DimensionMismatch, "values must have one row per grid time");
  }
  if (step_areas_.size() + 1 != times_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "need one step area per grid step");
  }
  if (!(alpha_ > 1.0 / 3.0 && alpha_ <= 0.5)) {
    throw Error(ErrorKind::InvalidParameter, "alpha must lie in (1/3, 1/2]");
  }
  require_finite(values_, "path values");
  const auto ell = values_.cols();
  for (auto& a : step_areas_) {
    if (a.rows() != ell || a.cols() != ell) {
      throw Error(ErrorKind::DimensionMismatch, "step area must be ell x ell");
    }
    require_finite(a, "step area");
    if (ell > 0 && (a + a.transpose()).cwiseAbs().maxCoeff() > 2.0 * kSymmetricResidueTol) {
      throw Error(ErrorKind::InvalidParameter, "step area is not antisymmetric");
    }
    a = 0.5 * (a - a.transpose()).eval();
  }
}

RoughIncrement GridRoughPath::step(int i) const {
  if (i < 0 || i >= steps()) throw Error(ErrorKind::IndexOutOfRange, "step index out of range");
  return RoughIncrement(Vec(values_.row(i + 1) - values_.row(i)), step_areas_[i]);
}

RoughIncrement GridRoughPath::increment(int i, int j) const {
  if (i < 0 || j > steps() || i >= j) {
    throw Error(ErrorKind::IndexOutOfRange, "increment requires 0 <= i < j <= n");
  }
  RoughIncrement acc = step(i);
  for (int k = i + 1; k < j; ++k) acc = chen_mul(acc, step(k));
  return acc;
}

GridRoughPath lift_piecewise_linear(std::vector<double> times, Mat values, double alpha) {
  if (times.size() < 2) throw Error(ErrorKind::InvalidGrid, "need at least two samples");
  const auto ell = values.cols();
  std::vector<Mat> areas(times.size() - 1, Mat::Zero(ell, ell));
  return GridRoughPath(std::move(times), std::move(values), std::move(areas), alpha);
}

GridRoughPath sample_brownian_lift(const BrownianSpec& spec) {
  if (spec.ell < 1 || spec.n_coarse < 1 || spec.n_fine < 1 || !(spec.horizon > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "brownian lift needs positive sizes and horizon");
  }
  const int n = spec.n_coarse;
  const double dt_fine = spec.horizon / (static_cast<double>(n) * spec.n_fine);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt_fine));

  std::vector<double> times(n + 1);
  Mat values = Mat::Zero(n + 1, spec.ell);
  std::vector<Mat> areas;
  areas.reserve(n);
  const Mat zero_area = Mat::Zero(spec.ell, spec.ell);
  Vec dx(spec.ell);
  for (int i = 0; i < n; ++i) {
    times[i] = spec.horizon * i / n;
    RoughIncrement acc = RoughIncrement::zero(spec.ell);
    for (int f = 0; f < spec.n_fine; ++f) {
      for (int k = 0; k < spec.ell; ++k) dx(k) = normal(rng);
      acc = chen_mul(acc, RoughIncrement(dx, zero_area));
    }
    values.row(i + 1) = values.row(i) + acc.x().transpose();
    areas.push_back(acc.area());
  }
  times[n] = spec.horizon;
  return GridRoughPath(std::move(times), std::move(values), std::move(areas), spec.alpha);
}

GridRoughPath make_linear_rough_path(const Vec& v, int ell, std::vector<double> times,
                                     double alpha) {
  if (ell < 1 || v.size() != log_dim(ell)) {
    throw Error(ErrorKind::DimensionMismatch, "v must have length ell(ell+1)/2");
  }
  if (times.size() < 2) throw Error(ErrorKind::InvalidGrid, "need at least two grid times");
  const Vec velocity = v.head(ell);
  const Mat area_rate = area_from_coordinates(v.tail(area_dim(ell)), ell);
  const auto n = times.size();
  Mat values(n, ell);
  std::vector<Mat> areas;
  areas.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    values.row(i) = (velocity * (times[i] - times[0])).transpose();
    if (i + 1 < n) areas.push_back(area_rate * (times[i + 1] - times[i]));
  }
  return GridRoughPath(std::move(times), std::move(values), std::move(areas), alpha);
}

GridRoughPath chen_refine(const GridRoughPath& path, int pieces) {
  if (pieces < 1) throw Error(ErrorKind::InvalidParameter, "pieces must be >= 1");
  const int n = path.steps();
  const int ell = path.ell();
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n) * pieces + 1);
  Mat values(n * pieces + 1, ell);
  std::vector<Mat> areas;
  areas.reserve(static_cast<std::size_t>(n) * pieces);
  const auto& t = path.times();
  for (int i = 0; i < n; ++i) {
    const Vec x0 = path.values().row(i).transpose();
    const Vec dx = (path.values().row(i + 1) - path.values().row(i)).transpose();
    for (int p = 0; p < pieces; ++p) {
      const double frac = static_cast<double>(p) / pieces;
      times.push_back(t[i] + frac * (t[i + 1] - t[i]));
      values.row(i * pieces + p) = (x0 + frac * dx).transpose();
      areas.push_back(path.step_area(i) / pieces);
    }
  }
  times.push_back(t.back());
  values.row(n * pieces) = path.values().row(n);
  return GridRoughPath(std::move(times), std::move(values), std::move(areas), path.alpha());
}

GridRoughPath circle_lift(int n, double turns) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "circle needs n >= 1");
  const double horizon = 2.0 * std::numbers::pi * turns;
  std::vector<double> times(n + 1);
  Mat values(n + 1, 2);
  for (int i = 0; i <= n; ++i) {
    times[i] = horizon * i / n;
    values(i, 0) = std::cos(times[i]);
    values(i, 1) = std::sin(times[i]);
  }
  return lift_piecewise_linear(std::move(times), std::move(values));
}

HolderNorms holder_norms(const GridRoughPath& path, double alpha) {
  HolderNorms out;
  const int n = path.steps();
  const auto& t = path.times();
  for (int i = 0; i <= n; ++i) out.sup_norm = std::max(out.sup_norm, path.values().row(i).norm());
  for (int i = 0; i < n; ++i) {
    RoughIncrement acc = path.step(i);
    for (int j = i + 1; j <= n; ++j) {
      if (j > i + 1) acc = chen_mul(acc, path.step(j - 1));
      const double dt = t[j] - t[i];
      out.holder1 = std::max(out.holder1, acc.x().norm() / std::pow(dt, alpha));
      out.holder2 = std::max(out.holder2, acc.second_level().norm() / std::pow(dt, 2.0 * alpha));
    }
  }
  return out;
}

}  // namespace roughrec
