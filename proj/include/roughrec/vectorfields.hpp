#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace roughrec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using FieldFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

enum class JacobianMode { Analytic, FiniteDifference };

inline constexpr double kDefaultFdStep = 1e-5;

/// Central-difference Jacobian; column j is (V(x + h e_j) - V(x - h e_j)) / 2h.
Mat fd_jacobian(const FieldFn& field, const Vec& x, double h = kDefaultFdStep);

/// ell vector fields on R^d with Jacobians. Evaluators must be pure and
/// reentrant; the set is shared read-only across workers.
class VectorFieldSet {
 public:
  /// Analytic Jacobians.
  VectorFieldSet(int dim, std::vector<FieldFn> fields, std::vector<JacobianFn> jacobians);

  /// Finite-difference Jacobians with step h.
  VectorFieldSet(int dim, std::vector<FieldFn> fields, double fd_step = kDefaultFdStep);

  int ell() const { return static_cast<int>(fields_.size()); }
  int dim() const { return dim_; }
  JacobianMode mode() const { return mode_; }
  double fd_step() const { return fd_step_; }

  Vec eval(int i, const Vec& x) const;
  Mat jac(int i, const Vec& x) const;

  /// Same fields, Jacobians switched to central differences.
  VectorFieldSet with_fd_jacobians(double h = kDefaultFdStep) const;

 private:
  void check_index(int i) const;
  void check_point(const Vec& x) const;

  int dim_;
  std::vector<FieldFn> fields_;
  std::vector<JacobianFn> jacobians_;
  JacobianMode mode_;
  double fd_step_ = 0.0;
};

/// V_j V_k(x) := DV_k(x) V_j(x), the derivative of V_k along V_j (0-based).
Vec second_comp(const VectorFieldSet& fields, int j, int k, const Vec& x);

/// [V_j, V_k](x) = DV_k(x) V_j(x) - DV_j(x) V_k(x) (0-based).
Vec bracket(const VectorFieldSet& fields, int j, int k, const Vec& x);

/// Frozen log-ODE field sum_i x^i V_i + sum_{j<k} a^{jk} [V_j, V_k] at z.
Vec frozen_field(const VectorFieldSet& fields, const Vec& x_inc, const Mat& area, const Vec& z);

/// Fields V_i(x) = A_i x + b_i with exact Jacobians A_i.
VectorFieldSet affine_fields(std::vector<Mat> linear, std::vector<Vec> offset);

/// Fields W_i(y_1, ..., y_c) = (V_i(y_1), ..., V_i(y_c)) on R^{cd}.
VectorFieldSet stack_fields(const VectorFieldSet& fields, int copies);

/// Stacked fields for the given points together with the stacked state z.
struct StackedSystem {
  VectorFieldSet fields;
  Vec state;
};

StackedSystem stack_points(const VectorFieldSet& fields, std::span<const Vec> points);

}  // namespace roughrec
