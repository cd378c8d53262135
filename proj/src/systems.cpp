#include "roughrec/systems.hpp"

#include <cmath>
#include <string>

#include "roughrec/error.hpp"

namespace roughrec {

Mat rolling_ball_generator(int i) {
  Mat a = Mat::Zero(3, 3);
  if (i == 0) {
    a(0, 2) = 1.0;
    a(2, 0) = -1.0;
  } else if (i == 1) {
    a(0, 1) = 1.0;
    a(1, 0) = -1.0;
  } else {
    throw Error(ErrorKind::IndexOutOfRange, "rolling ball has two generators");
  }
  return a;
}

Vec flatten(const Mat& m) {
  Vec out(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r * m.cols() + c) = m(r, c);
  return out;
}

Mat unflatten(const Vec& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * n) {
    throw Error(ErrorKind::DimensionMismatch, "cannot unflatten to n x n");
  }
  Mat out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = v(r * n + c);
  return out;
}

NamedSystem rolling_ball() {
  // Row-major flattening turns M -> A M into the 9x9 map kron(A, I_3).
  std::vector<Mat> linear;
  std::vector<Vec> offset;
  for (int i = 0; i < 2; ++i) {
    const Mat a = rolling_ball_generator(i);
    Mat big = Mat::Zero(9, 9);
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) big.block(3 * r, 3 * k, 3, 3) = a(r, k) * Mat::Identity(3, 3);
    linear.push_back(std::move(big));
    offset.push_back(Vec::Zero(9));
  }
  return {"rolling_ball", affine_fields(std::move(linear), std::move(offset)),
          {flatten(Mat::Identity(3, 3))},
          "ball rolling without slipping; O(3) embedded in R^9, V_i(M) = A_i M"};
}

NamedSystem unicycle() {
  std::vector<FieldFn> f{
      [](const Vec& x) -> Vec { return Eigen::Vector3d(std::cos(x(2)), std::sin(x(2)), 0.0); },
      [](const Vec&) -> Vec { return Eigen::Vector3d(0.0, 0.0, 1.0); },
  };
  std::vector<JacobianFn> j{
      [](const Vec& x) -> Mat {
        Mat out = Mat::Zero(3, 3);
        out(0, 2) = -std::sin(x(2));
        out(1, 2) = std::cos(x(2));
        return out;
      },
      [](const Vec&) -> Mat { return Mat::Zero(3, 3); },
  };
  return {"unicycle", VectorFieldSet(3, std::move(f), std::move(j)), {Vec::Zero(3)},
          "position (x1, x2), heading x3; drive along heading and turn"};
}

namespace {

double cvt_q(const Vec& x) {
  const double q = x(3);
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorKind::DomainViolation, "cvt: q = " + std::to_string(q) + " outside (0,1)");
  }
  return q;
}

}  // namespace

NamedSystem cvt() {
  std::vector<FieldFn> f{
      [](const Vec& x) -> Vec {
        const double q = cvt_q(x);
        return Eigen::Vector4d(1.0 / q, 1.0 / (1.0 - q), 1.0, 0.0);
      },
      [](const Vec& x) -> Vec {
        cvt_q(x);
        return Eigen::Vector4d(0.0, 0.0, 0.0, 1.0);
      },
  };
  std::vector<JacobianFn> j{
      [](const Vec& x) -> Mat {
        const double q = cvt_q(x);
        Mat out = Mat::Zero(4, 4);
        out(0, 3) = -1.0 / (q * q);
        out(1, 3) = 1.0 / ((1.0 - q) * (1.0 - q));
        return out;
      },
      [](const Vec& x) -> Mat {
        cvt_q(x);
        return Mat::Zero(4, 4);
      },
  };
  Vec p(4);
  p << 0.0, 0.0, 0.0, 0.5;
  return {"cvt", VectorFieldSet(4, std::move(f), std::move(j)), {p},
          "state (theta1, theta2, b, q); controls drive b and q"};
}

NamedSystem triple_product() {
  std::vector<FieldFn> f{
      [](const Vec& p) -> Vec { return Eigen::Vector3d(p(1) * p(2), 0.0, 0.0); },
      [](const Vec& p) -> Vec { return Eigen::Vector3d(0.0, p(0) * p(2), 0.0); },
      [](const Vec& p) -> Vec { return Eigen::Vector3d(0.0, 0.0, p(0) * p(1)); },
  };
  std::vector<JacobianFn> j{
      [](const Vec& p) -> Mat {
        Mat out = Mat::Zero(3, 3);
        out(0, 1) = p(2);
        out(0, 2) = p(1);
        return out;
      },
      [](const Vec& p) -> Mat {
        Mat out = Mat::Zero(3, 3);
        out(1, 0) = p(2);
        out(1, 2) = p(0);
        return out;
      },
      [](const Vec& p) -> Mat {
        Mat out = Mat::Zero(3, 3);
        out(2, 0) = p(1);
        out(2, 1) = p(0);
        return out;
      },
  };
  return {"triple_product", VectorFieldSet(3, std::move(f), std::move(j)),
          {Eigen::Vector3d(1.0, 1.0, 1.0), Eigen::Vector3d(1.0, 2.0, 3.0), Eigen::Vector3d(2.0, -1.0, 1.0)},
          "non-elliptic example; any two points give rank 5, three generic points rank 6"};
}

NamedSystem kohn(int d) {
  if (d < 1) throw Error(ErrorKind::InvalidParameter, "kohn needs d >= 1");
  // Every field is affine: X_i = e_{x_i} + 2 y_i e_t, Y_i = e_{y_i} - 2 x_i e_t.
  const int n = 2 * d + 1;
  const int t = 2 * d;
  std::vector<Mat> linear;
  std::vector<Vec> offset;
  for (int i = 0; i < d; ++i) {
    Mat a = Mat::Zero(n, n);
    a(t, d + i) = 2.0;
    Vec b = Vec::Zero(n);
    b(i) = 1.0;
    linear.push_back(std::move(a));
    offset.push_back(std::move(b));
  }
  for (int i = 0; i < d; ++i) {
    Mat a = Mat::Zero(n, n);
    a(t, i) = -2.0;
    Vec b = Vec::Zero(n);
    b(d + i) = 1.0;
    linear.push_back(std::move(a));
    offset.push_back(std::move(b));
  }
  return {"kohn", affine_fields(std::move(linear), std::move(offset)), {Vec::Zero(n)},
          "Heisenberg-type fields of the Kohn Laplacian, d = " + std::to_string(d)};
}

NamedSystem constant_fields(int ell, int d) {
  if (ell < 1 || d < 1) throw Error(ErrorKind::InvalidParameter, "need ell, d >= 1");
  std::vector<Mat> linear;
  std::vector<Vec> offset;
  for (int i = 0; i < ell; ++i) {
    linear.push_back(Mat::Zero(d, d));
    offset.push_back(Vec::Unit(d, i % d));
  }
  return {"constant", affine_fields(std::move(linear), std::move(offset)), {Vec::Zero(d)},
          "constant canonical fields; the area has no effect on solutions"};
}

NamedSystem system_by_name(std::string_view name, const SystemOptions& options) {
  if (name == "rolling_ball") return rolling_ball();
  if (name == "unicycle") return unicycle();
  if (name == "cvt") return cvt();
  if (name == "triple_product") return triple_product();
  if (name == "kohn") return kohn(options.kohn_d);
  if (name == "constant") return constant_fields(options.constant_ell, options.constant_d);
  throw Error(ErrorKind::InvalidParameter, "unknown system '" + std::string(name) + "'");
}

std::vector<std::string> system_names() {
  return {"rolling_ball", "unicycle", "cvt", "triple_product", "kohn", "constant"};
}

}  // namespace roughrec
