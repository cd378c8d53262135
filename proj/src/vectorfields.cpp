#include "roughrec/vectorfields.hpp"

#include <memory>
#include <string>

#include "roughrec/error.hpp"

namespace roughrec {

Mat fd_jacobian(const FieldFn& field, const Vec& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParameter, "fd step must be positive");
  const Vec f0 = field(x);
  Mat out(f0.size(), x.size());
  Vec xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    const Vec fp = field(xp);
    xp(j) = x(j) - h;
    const Vec fm = field(xp);
    xp(j) = x(j);
    out.col(j) = (fp - fm) / (2.0 * h);
  }
  if (!out.allFinite()) throw Error(ErrorKind::NonFinite, "fd_jacobian: non-finite evaluation");
  return out;
}

VectorFieldSet::VectorFieldSet(int dim, std::vector<FieldFn> fields,
                               std::vector<JacobianFn> jacobians)
    : dim_(dim),
      fields_(std::move(fields)),
      jacobians_(std::move(jacobians)),
      mode_(JacobianMode::Analytic) {
  if (dim_ < 1 || fields_.empty()) {
    throw Error(ErrorKind::InvalidParameter, "need dim >= 1 and at least one field");
  }
  if (jacobians_.size() != fields_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one Jacobian per field");
  }
}

VectorFieldSet::VectorFieldSet(int dim, std::vector<FieldFn> fields, double fd_step)
    : dim_(dim), fields_(std::move(fields)), mode_(JacobianMode::FiniteDifference), fd_step_(fd_step) {
  if (dim_ < 1 || fields_.empty()) {
    throw Error(ErrorKind::InvalidParameter, "need dim >= 1 and at least one field");
  }
  if (!(fd_step_ > 0.0)) throw Error(ErrorKind::InvalidParameter, "fd step must be positive");
}

void VectorFieldSet::check_index(int i) const {
  if (i < 0 || i >= ell()) throw Error(ErrorKind::IndexOutOfRange, "field index out of range");
}

void VectorFieldSet::check_point(const Vec& x) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "point has wrong dimension");
}

Vec VectorFieldSet::eval(int i, const Vec& x) const {
  check_index(i);
  check_point(x);
  return fields_[i](x);
}

Mat VectorFieldSet::jac(int i, const Vec& x) const {
  check_index(i);
  check_point(x);
  if (mode_ == JacobianMode::FiniteDifference) return fd_jacobian(fields_[i], x, fd_step_);
  return jacobians_[i](x);
}

VectorFieldSet VectorFieldSet::with_fd_jacobians(double h) const {
  return VectorFieldSet(dim_, fields_, h);
}

Vec second_comp(const VectorFieldSet& fields, int j, int k, const Vec& x) {
  return fields.jac(k, x) * fields.eval(j, x);
}

Vec bracket(const VectorFieldSet& fields, int j, int k, const Vec& x) {
  if (j == k) {
    fields.eval(j, x);
    return Vec::Zero(fields.dim());
  }
  return second_comp(fields, j, k, x) - second_comp(fields, k, j, x);
}

Vec frozen_field(const VectorFieldSet& fields, const Vec& x_inc, const Mat& area, const Vec& z) {
  const int ell = fields.ell();
  if (x_inc.size() != ell || area.rows() != ell || area.cols() != ell) {
    throw Error(ErrorKind::DimensionMismatch, "increment dimension differs from field count");
  }
  Vec out = Vec::Zero(fields.dim());
  std::vector<Vec> values(ell);
  std::vector<Mat> jacobians;
  bool need_brackets = false;
  for (int j = 0; j < ell && !need_brackets; ++j)
    for (int k = j + 1; k < ell; ++k)
      if (area(j, k) != 0.0) need_brackets = true;
  for (int i = 0; i < ell; ++i) {
    values[i] = fields.eval(i, z);
    out += x_inc(i) * values[i];
  }
  if (need_brackets) {
    jacobians.reserve(ell);
    for (int i = 0; i < ell; ++i) jacobians.push_back(fields.jac(i, z));
    for (int j = 0; j < ell; ++j) {
      for (int k = j + 1; k < ell; ++k) {
        if (area(j, k) == 0.0) continue;
        out += area(j, k) * (jacobians[k] * values[j] - jacobians[j] * values[k]);
      }
    }
  }
  return out;
}

VectorFieldSet affine_fields(std::vector<Mat> linear, std::vector<Vec> offset) {
  if (linear.empty() || linear.size() != offset.size()) {
    throw Error(ErrorKind::DimensionMismatch, "affine fields need matching A_i and b_i");
  }
  const auto dim = linear.front().rows();
  std::vector<FieldFn> fields;
  std::vector<JacobianFn> jacobians;
  for (std::size_t i = 0; i < linear.size(); ++i) {
    if (linear[i].rows() != dim || linear[i].cols() != dim || offset[i].size() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "affine field has inconsistent shape");
    }
    auto a = std::make_shared<const Mat>(std::move(linear[i]));
    auto b = std::make_shared<const Vec>(std::move(offset[i]));
    fields.emplace_back([a, b](const Vec& x) -> Vec { return *a * x + *b; });
    jacobians.emplace_back([a](const Vec&) -> Mat { return *a; });
  }
  return VectorFieldSet(static_cast<int>(dim), std::move(fields), std::move(jacobians));
}

VectorFieldSet stack_fields(const VectorFieldSet& fields, int copies) {
  if (copies < 1) throw Error(ErrorKind::InvalidParameter, "need at least one copy");
  if (copies == 1) return fields;
  const int d = fields.dim();
  auto base = std::make_shared<const VectorFieldSet>(fields);
  std::vector<FieldFn> stacked;
  std::vector<JacobianFn> stacked_jac;
  for (int i = 0; i < fields.ell(); ++i) {
    stacked.emplace_back([base, i, d, copies](const Vec& z) -> Vec {
      Vec out(static_cast<Eigen::Index>(d) * copies);
      for (int r = 0; r < copies; ++r) out.segment(r * d, d) = base->eval(i, z.segment(r * d, d));
      return out;
    });
    stacked_jac.emplace_back([base, i, d, copies](const Vec& z) -> Mat {
      Mat out = Mat::Zero(static_cast<Eigen::Index>(d) * copies, static_cast<Eigen::Index>(d) * copies);
      for (int r = 0; r < copies; ++r) {
        out.block(r * d, r * d, d, d) = base->jac(i, z.segment(r * d, d));
      }
      return out;
    });
  }
  return VectorFieldSet(d * copies, std::move(stacked), std::move(stacked_jac));
}

StackedSystem stack_points(const VectorFieldSet& fields, std::span<const Vec> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidParameter, "need at least one point");
  const int d = fields.dim();
  const int c = static_cast<int>(points.size());
  Vec z(static_cast<Eigen::Index>(d) * c);
  for (int r = 0; r < c; ++r) {
    if (points[r].size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "point " + std::to_string(r) + " has wrong dimension");
    }
    z.segment(r * d, d) = points[r];
  }
  return {stack_fields(fields, c), std::move(z)};
}

}  // namespace roughrec
