#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "roughrec/error.hpp"
#include "roughrec/rde.hpp"
#include "roughrec/systems.hpp"

using namespace roughrec;

namespace {

VectorFieldSet identity_field() {
  return affine_fields({Mat::Identity(1, 1)}, {Vec::Zero(1)});
}

// Matrix of the frozen linear field for V_i(y) = A_i y: [V_j,V_k] acts as A_k A_j - A_j A_k.
Mat frozen_matrix(const std::vector<Mat>& a, const RoughIncrement& inc) {
  Mat w = Mat::Zero(a[0].rows(), a[0].cols());
  for (std::size_t i = 0; i < a.size(); ++i) w += inc.x()(i) * a[i];
  for (std::size_t j = 0; j < a.size(); ++j)
    for (std::size_t k = j + 1; k < a.size(); ++k) w += inc.area()(j, k) * (a[k] * a[j] - a[j] * a[k]);
  return w;
}

// Local errors of one coarse step against the fine-grid logode solution on a smooth loop.
std::vector<double> local_errors(const NamedSystem& sys, StepMethod method, const std::vector<int>& blocks,
                                 const GridRoughPath& fine) {
  std::vector<double> err;
  const Vec x0 = sys.recommended_points[0];
  for (int b : blocks) {
    const Trajectory ref = solve(sys.fields, x0, fine, StepMethod::LogOde, 8);
    const Vec exact = ref.states.row(b).transpose();
    const RoughIncrement inc = fine.increment(0, b);
    const Vec approx = method == StepMethod::Euler2 ? euler2_step(sys.fields, x0, inc)
                                                    : logode_step(sys.fields, x0, inc, 32);
    err.push_back((approx - exact).norm());
  }
  return err;
}

}  // namespace

TEST(Euler2, ExactSecondOrderTaylorForIdentityField) {
  for (double h : {0.5, 0.1, -0.3}) {
    const RoughIncrement inc(Vec::Constant(1, h), Mat::Zero(1, 1));
    const Vec out = euler2_step(identity_field(), Vec::Constant(1, 2.0), inc);
    EXPECT_NEAR(out(0), 2.0 * (1.0 + h + 0.5 * h * h), 1e-15);
  }
}

TEST(Euler2, MatchesTruncatedExponentialForLinearFields) {
  std::mt19937_64 rng(3);
  std::vector<Mat> a;
  for (int i = 0; i < 3; ++i) a.push_back(Mat::NullaryExpr(4, 4, [&] { return std::normal_distribution<double>()(rng); }));
  const VectorFieldSet v = affine_fields(a, std::vector<Vec>(3, Vec::Zero(4)));
  const RoughIncrement inc(oracle::random_vec(rng, 3, -0.2, 0.2), oracle::random_antisymmetric(rng, 3, 0.1));
  const Vec y = oracle::random_vec(rng, 4);
  // sum_i x^i A_i y + sum_{j,k} XX^{jk} A_k A_j y
  Vec expected = y;
  for (int i = 0; i < 3; ++i) expected += inc.x()(i) * a[i] * y;
  const Mat xx = inc.second_level();
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) expected += xx(j, k) * a[k] * a[j] * y;
  EXPECT_LT((euler2_step(v, y, inc) - expected).norm(), 1e-14);
}

TEST(Steps, ConstantFieldsIgnoreArea) {
  const NamedSystem c = constant_fields(3, 3);
  std::mt19937_64 rng(5);
  const RoughIncrement inc(oracle::random_vec(rng, 3), oracle::random_antisymmetric(rng, 3));
  const Vec x = oracle::random_vec(rng, 3);
  EXPECT_LT((euler2_step(c.fields, x, inc) - (x + inc.x())).norm(), 1e-15);
  EXPECT_LT((logode_step(c.fields, x, inc, 4) - (x + inc.x())).norm(), 1e-15);
}

TEST(LogOde, ZeroIncrementIsIdentity) {
  const NamedSystem s = unicycle();
  const Vec x = Eigen::Vector3d(0.1, 0.2, 0.3);
  EXPECT_EQ(logode_step(s.fields, x, RoughIncrement::zero(2), 8), x);
}

TEST(LogOde, MatchesMatrixExponentialForLinearFields) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Mat> a;
    for (int i = 0; i < 2; ++i) a.push_back(Mat::NullaryExpr(3, 3, [&] { return std::normal_distribution<double>()(rng); }));
    const VectorFieldSet v = affine_fields(a, std::vector<Vec>(2, Vec::Zero(3)));
    const RoughIncrement inc(oracle::random_vec(rng, 2, -0.3, 0.3), oracle::random_antisymmetric(rng, 2, 0.2));
    const Vec y = oracle::random_vec(rng, 3);
    const Vec expected = oracle::expm(frozen_matrix(a, inc)) * y;
    EXPECT_LT((logode_step(v, y, inc, 32) - expected).norm(), 1e-8);
  }
}

TEST(LogOde, RollingBallAreaOnlyStepIsRotation) {
  // A pure area step rotates by exp(a [A2, A1]).
  const NamedSystem rb = rolling_ball();
  Mat area = Mat::Zero(2, 2);
  area(0, 1) = 0.7;
  area(1, 0) = -0.7;
  const RoughIncrement inc(Vec::Zero(2), area);
  const Mat a1 = rolling_ball_generator(0), a2 = rolling_ball_generator(1);
  const Mat expected = oracle::expm(0.7 * (a2 * a1 - a1 * a2));
  const Vec out = logode_step(rb.fields, flatten(Mat::Identity(3, 3)), inc, 64);
  EXPECT_LT((unflatten(out, 3) - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LogOde, RejectsBadArguments) {
  const NamedSystem s = unicycle();
  EXPECT_THROW(logode_step(s.fields, Vec::Zero(3), RoughIncrement::zero(2), 0), Error);
  EXPECT_THROW(logode_step(s.fields, Vec::Zero(2), RoughIncrement::zero(2), 4), Error);
  EXPECT_THROW(euler2_step(s.fields, Vec::Zero(3), RoughIncrement::zero(3)), Error);
}

TEST(LogOde, BlowUpIsReported) {
  const VectorFieldSet quad(1, std::vector<FieldFn>{[](const Vec& x) -> Vec { return x.cwiseProduct(x); }});
  try {
    logode_step(quad, Vec::Constant(1, 1.0), RoughIncrement(Vec::Constant(1, 5.0), Mat::Zero(1, 1)), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
  }
}

TEST(Solve, TrajectoryShapeAndStart) {
  const NamedSystem s = unicycle();
  const GridRoughPath p = circle_lift(16);
  const Vec x0 = Eigen::Vector3d(1.0, -1.0, 0.2);
  for (StepMethod m : {StepMethod::Euler2, StepMethod::LogOde}) {
    const Trajectory tr = solve(s.fields, x0, p, m);
    EXPECT_EQ(tr.times, p.times());
    ASSERT_EQ(tr.states.rows(), 17);
    EXPECT_EQ(Vec(tr.states.row(0).transpose()), x0);
  }
  EXPECT_THROW(solve(s.fields, Vec::Zero(2), p, StepMethod::Euler2), Error);
  EXPECT_THROW(solve(s.fields, x0, make_linear_rough_path(Vec::Zero(6), 3, {0, 1}), StepMethod::Euler2), Error);
}

TEST(Solve, RollingBallStaysOrthogonal) {
  const NamedSystem rb = rolling_ball();
  const Trajectory tr = solve(rb.fields, rb.recommended_points[0], circle_lift(1024, 3.0), StepMethod::LogOde);
  for (Eigen::Index r = 0; r < tr.states.rows(); r += 64) {
    const Mat m = unflatten(tr.states.row(r).transpose(), 3);
    EXPECT_LT((m.transpose() * m - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Solve, LocalErrorIsThirdOrder) {
  const GridRoughPath fine = circle_lift(4096);
  const std::vector<int> blocks{256, 128, 64, 32, 16};
  std::vector<double> h;
  for (int b : blocks) h.push_back(fine.times()[b]);
  for (const NamedSystem& sys : {unicycle(), rolling_ball()}) {
    for (StepMethod m : {StepMethod::Euler2, StepMethod::LogOde}) {
      const double slope = oracle::loglog_slope(h, local_errors(sys, m, blocks, fine));
      EXPECT_GE(slope, 2.5) << sys.name << " method " << static_cast<int>(m);
    }
  }
}

TEST(ObserveFlow, MatchesSolverOverTheInterval) {
  const NamedSystem s = unicycle();
  const GridRoughPath p = circle_lift(64);
  const std::vector<Vec> pts{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0.5, -1)};
  const ObservationSet obs = observe_flow(s.fields, pts, p, 8, 24, 16);
  EXPECT_EQ(obs.s, p.times()[8]);
  EXPECT_EQ(obs.t, p.times()[24]);
  ASSERT_EQ(obs.count(), 2);
  for (int r = 0; r < 2; ++r) {
    Vec z = pts[r];
    for (int k = 8; k < 24; ++k) z = logode_step(s.fields, z, p.step(k), 16);
    EXPECT_LT((obs.observed[r] - z).norm(), 1e-14);
  }
  EXPECT_NO_THROW(obs.validate(3));
  EXPECT_THROW(observe_flow(s.fields, pts, p, 5, 5), Error);
  EXPECT_THROW(observe_flow(s.fields, pts, p, 0, 65), Error);
}

TEST(ObservationSet, Validate) {
  ObservationSet obs{{Vec::Zero(2)}, 0.0, 1.0, {Vec::Ones(2)}};
  EXPECT_NO_THROW(obs.validate(2));
  EXPECT_THROW(obs.validate(3), Error);
  obs.t = 0.0;
  EXPECT_THROW(obs.validate(2), Error);
  obs.t = 1.0;
  obs.observed[0](0) = std::nan("");
  EXPECT_THROW(obs.validate(2), Error);
  obs.observed.clear();
  EXPECT_THROW(obs.validate(2), Error);
}

TEST(Euler2, ZeroIncrementIsIdentity) {
  const NamedSystem s = unicycle();
  const Vec x = Eigen::Vector3d(0.4, -2.0, 1.1);
  EXPECT_EQ(euler2_step(s.fields, x, RoughIncrement::zero(2)), x);
}

TEST(Solve, ConstantFieldsTranslateByIncrement) {
  const NamedSystem s = constant_fields(2, 2);
  const GridRoughPath p = sample_brownian_lift({2, 32, 4, 1.0, 9, 0.4});
  const Vec x0 = Eigen::Vector2d(0.5, -0.25);
  for (StepMethod m : {StepMethod::Euler2, StepMethod::LogOde}) {
    const Trajectory tr = solve(s.fields, x0, p, m);
    for (int k = 0; k <= p.steps(); ++k) {
      const Vec expected = x0 + p.values().row(k).transpose() - p.values().row(0).transpose();
      EXPECT_LT((tr.states.row(k).transpose() - expected).norm(), 1e-13);
    }
  }
}

TEST(LogOde, RungeKuttaErrorIsFourthOrderInSubsteps) {
  const NamedSystem rb = rolling_ball();
  const std::vector<Mat> a{rolling_ball_generator(0), rolling_ball_generator(1)};
  Mat area = Mat::Zero(2, 2);
  area(0, 1) = 0.8;
  area(1, 0) = -0.8;
  const RoughIncrement inc(Eigen::Vector2d(1.2, -0.9), area);
  const Vec exact = flatten(oracle::expm(frozen_matrix(a, inc)));
  std::vector<double> n, err, defect;
  for (int n_sub : {2, 4, 8, 16}) {
    const Vec z = logode_step(rb.fields, flatten(Mat::Identity(3, 3)), inc, n_sub);
    const Mat m = unflatten(z, 3);
    n.push_back(n_sub);
    err.push_back((z - exact).norm());
    defect.push_back((m.transpose() * m - Mat::Identity(3, 3)).norm());
  }
  EXPECT_LE(oracle::loglog_slope(n, err), -3.5);
  EXPECT_LE(oracle::loglog_slope(n, defect), -3.5);
}

TEST(Solve, ChenRefinementIsConsistent) {
  const NamedSystem s = unicycle();
  const GridRoughPath p = sample_brownian_lift({2, 16, 4, 1.0, 21, 0.4});
  const GridRoughPath refined = chen_refine(p, 4);
  const Vec x0 = s.recommended_points[0];
  const Trajectory coarse = solve(s.fields, x0, p, StepMethod::LogOde, 64);
  const Trajectory fine = solve(s.fields, x0, refined, StepMethod::LogOde, 16);
  for (int k = 0; k <= p.steps(); ++k)
    EXPECT_LT((coarse.states.row(k) - fine.states.row(4 * k)).norm(), 1e-10) << k;
}

TEST(ObserveFlow, ZeroStepReturnsBasePoints) {
  const NamedSystem s = unicycle();
  const GridRoughPath p = make_linear_rough_path(Vec::Zero(3), 2, {0.0, 0.5, 1.0});
  const std::vector<Vec> pts{Eigen::Vector3d(1, 2, 3)};
  EXPECT_EQ(observe_flow(s.fields, pts, p, 0, 2).observed[0], pts[0]);
}

TEST(ObserveFlow, ConstantFieldsObserveTheIncrement) {
  const NamedSystem s = constant_fields(2, 2);
  const GridRoughPath p = circle_lift(32);
  const std::vector<Vec> pts{Eigen::Vector2d(0, 0), Eigen::Vector2d(-3, 4)};
  const ObservationSet obs = observe_flow(s.fields, pts, p, 3, 19);
  for (int r = 0; r < 2; ++r) EXPECT_LT((obs.observed[r] - pts[r] - p.increment(3, 19).x()).norm(), 1e-12);
}

TEST(ObserveFlow, RollingBallPairStaysOrthogonal) {
  const NamedSystem rb = rolling_ball();
  std::mt19937_64 rng(31);
  const Mat q = oracle::expm(oracle::random_antisymmetric(rng, 3, 2.0));
  const std::vector<Vec> pts{flatten(Mat::Identity(3, 3)), flatten(q)};
  const ObservationSet obs = observe_flow(rb.fields, pts, circle_lift(256, 2.0), 0, 256);
  for (const Vec& o : obs.observed) {
    const Mat m = unflatten(o, 3);
    EXPECT_LT((m.transpose() * m - Mat::Identity(3, 3)).norm(), 1e-8);
  }
}

TEST(Solve, BrownianLocalErrorMedianSlope) {
  const NamedSystem rb = rolling_ball();
  const Vec x0 = rb.recommended_points[0];
  const std::vector<int> blocks{128, 64, 32, 16, 8};
  for (StepMethod m : {StepMethod::Euler2, StepMethod::LogOde}) {
    std::vector<double> slopes;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const GridRoughPath fine = sample_brownian_lift({2, 2048, 1, 1.0, 500 + seed, 0.4});
      const Trajectory ref = solve(rb.fields, x0, fine, StepMethod::LogOde, 8);
      std::vector<double> h, err;
      for (int b : blocks) {
        const RoughIncrement inc = fine.increment(0, b);
        const Vec approx = m == StepMethod::Euler2 ? euler2_step(rb.fields, x0, inc) : logode_step(rb.fields, x0, inc, 32);
        h.push_back(fine.times()[b]);
        err.push_back((approx - ref.states.row(b).transpose()).norm());
      }
      slopes.push_back(oracle::loglog_slope(h, err));
    }
    EXPECT_GE(oracle::median(slopes), 0.9) << static_cast<int>(m);
  }
}
