#pragma once

// Named control systems with analytic Jacobians.

#include <string>
#include <string_view>
#include <vector>

#include "roughrec/vectorfields.hpp"

namespace roughrec {

struct NamedSystem {
  std::string name;
  VectorFieldSet fields;
  std::vector<Vec> recommended_points;
  std::string notes;
};

/// Rolling ball: V_i(M) = A_i M on 3x3 matrices flattened row-major into R^9.
NamedSystem rolling_ball();

/// The two generators A_1, A_2 of the rolling ball.
Mat rolling_ball_generator(int i);

/// Row-major flattening of a square matrix and its inverse.
Vec flatten(const Mat& m);
Mat unflatten(const Vec& v, int n);

/// Unicycle on (x^1, x^2, x^3): V_1 = (cos x^3, sin x^3, 0), V_2 = e_3.
NamedSystem unicycle();

/// Continuously variable transmission on (theta1, theta2, b, q), q in (0,1).
/// Field evaluation throws DomainViolation outside that range.
NamedSystem cvt();

/// V_1 = yz d_x, V_2 = xz d_y, V_3 = xy d_z on R^3.
NamedSystem triple_product();

/// X_i = d_{x_i} + 2 y_i d_t, Y_i = d_{y_i} - 2 x_i d_t on R^{2d+1}, with
/// coordinates (x_1..x_d, y_1..y_d, t) and field order X_1..X_d, Y_1..Y_d.
NamedSystem kohn(int d = 2);

/// V_i = e_{i mod d}, constant.
NamedSystem constant_fields(int ell, int d);

struct SystemOptions {
  int kohn_d = 2;
  int constant_ell = 2;
  int constant_d = 2;
};

/// rolling_ball | unicycle | cvt | triple_product | kohn | constant
NamedSystem system_by_name(std::string_view name, const SystemOptions& options = {});

std::vector<std::string> system_names();

}  // namespace roughrec
