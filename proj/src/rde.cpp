#include "roughrec/rde.hpp"

#include <string>

#include "roughrec/error.hpp"

namespace roughrec {

namespace {

void check_increment(const VectorFieldSet& fields, const Vec& x, const RoughIncrement& inc) {
  if (inc.ell() != fields.ell()) {
    throw Error(ErrorKind::DimensionMismatch, "increment dimension differs from field count");
  }
  if (x.size() != fields.dim()) throw Error(ErrorKind::DimensionMismatch, "state has wrong dimension");
}

}  // namespace

Vec euler2_step(const VectorFieldSet& fields, const Vec& x, const RoughIncrement& inc) {
  check_increment(fields, x, inc);
  const int ell = fields.ell();
  const Mat second = inc.second_level();
  std::vector<Vec> values(ell);
  Vec out = x;
  for (int i = 0; i < ell; ++i) {
    values[i] = fields.eval(i, x);
    out += inc.x()(i) * values[i];
  }
  for (int k = 0; k < ell; ++k) {
    if (second.col(k).isZero(0.0)) continue;
    const Mat jk = fields.jac(k, x);
    for (int j = 0; j < ell; ++j) {
      if (second(j, k) != 0.0) out += second(j, k) * (jk * values[j]);
    }
  }
  if (!out.allFinite()) throw Error(ErrorKind::NonFinite, "euler2_step produced a non-finite state");
  return out;
}

Vec logode_step(const VectorFieldSet& fields, const Vec& x, const RoughIncrement& inc, int n_sub) {
  check_increment(fields, x, inc);
  if (n_sub < 1) throw Error(ErrorKind::InvalidParameter, "n_sub must be >= 1");
  const Vec& dx = inc.x();
  const Mat& area = inc.area();
  if (dx.isZero(0.0) && area.isZero(0.0)) return x;
  const double h = 1.0 / n_sub;
  auto w = [&](const Vec& z) { return frozen_field(fields, dx, area, z); };
  Vec z = x;
  for (int s = 0; s < n_sub; ++s) {
    const Vec k1 = w(z);
    const Vec k2 = w(z + 0.5 * h * k1);
    const Vec k3 = w(z + 0.5 * h * k2);
    const Vec k4 = w(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) throw Error(ErrorKind::NonFinite, "logode_step: state blew up");
  }
  return z;
}

Trajectory solve(const VectorFieldSet& fields, const Vec& x0, const GridRoughPath& path,
                 StepMethod method, int n_sub) {
  if (path.ell() != fields.ell()) {
    throw Error(ErrorKind::DimensionMismatch, "path dimension differs from field count");
  }
  if (x0.size() != fields.dim()) throw Error(ErrorKind::DimensionMismatch, "x0 has wrong dimension");
  Trajectory out{path.times(), Mat(path.steps() + 1, fields.dim())};
  Vec x = x0;
  out.states.row(0) = x.transpose();
  for (int i = 0; i < path.steps(); ++i) {
    const RoughIncrement inc = path.step(i);
    x = method == StepMethod::Euler2 ? euler2_step(fields, x, inc)
                                     : logode_step(fields, x, inc, n_sub);
    out.states.row(i + 1) = x.transpose();
  }
  return out;
}

void ObservationSet::validate(int dim) const {
  if (base_points.empty()) throw Error(ErrorKind::InvalidParameter, "observation set is empty");
  if (!(s < t)) throw Error(ErrorKind::InvalidParameter, "observation interval needs s < t");
  if (observed.size() != base_points.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one observed image per base point");
  }
  for (std::size_t r = 0; r < base_points.size(); ++r) {
    if (base_points[r].size() != dim || observed[r].size() != dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "observation " + std::to_string(r) + " has wrong dimension");
    }
    if (!base_points[r].allFinite() || !observed[r].allFinite()) {
      throw Error(ErrorKind::NonFinite, "observation " + std::to_string(r) + " is not finite");
    }
  }
}

ObservationSet observe_flow(const VectorFieldSet& fields, std::span<const Vec> points,
                            const GridRoughPath& path, int i, int j, int n_internal) {
  if (i < 0 || j > path.steps() || i >= j) {
    throw Error(ErrorKind::IndexOutOfRange, "observe_flow requires 0 <= i < j <= n");
  }
  if (points.empty()) throw Error(ErrorKind::InvalidParameter, "need at least one base point");
  if (path.ell() != fields.ell()) {
    throw Error(ErrorKind::DimensionMismatch, "path dimension differs from field count");
  }
  ObservationSet obs;
  obs.s = path.times()[i];
  obs.t = path.times()[j];
  for (const Vec& p : points) {
    Vec z = p;
    for (int k = i; k < j; ++k) z = logode_step(fields, z, path.step(k), n_internal);
    obs.base_points.push_back(p);
    obs.observed.push_back(std::move(z));
  }
  return obs;
}

}  // namespace roughrec
