#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "roughrec/error.hpp"
#include "roughrec/reconstruct.hpp"
#include "roughrec/systems.hpp"

using namespace roughrec;

namespace {

Vec sample_point(const NamedSystem& s, std::mt19937_64& rng) {
  Vec p = oracle::random_vec(rng, s.fields.dim(), -2.0, 2.0);
  if (s.name == "cvt") p(3) = std::uniform_real_distribution<double>(0.25, 0.75)(rng);
  return p;
}

}  // namespace

class NamedSystems : public ::testing::TestWithParam<std::string> {};

TEST_P(NamedSystems, AnalyticJacobiansMatchFiniteDifferences) {
  const NamedSystem s = system_by_name(GetParam());
  const VectorFieldSet fd = s.fields.with_fd_jacobians(1e-6);
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec p = sample_point(s, rng);
    for (int i = 0; i < s.fields.ell(); ++i) {
      EXPECT_LT((s.fields.jac(i, p) - fd.jac(i, p)).cwiseAbs().maxCoeff(), 1e-7)
          << s.name << " field " << i << " at " << p.transpose();
    }
  }
}

TEST_P(NamedSystems, RecommendedPointsHaveRightDimension) {
  const NamedSystem s = system_by_name(GetParam());
  ASSERT_FALSE(s.recommended_points.empty());
  for (const Vec& p : s.recommended_points) {
    ASSERT_EQ(p.size(), s.fields.dim());
    for (int i = 0; i < s.fields.ell(); ++i) EXPECT_TRUE(s.fields.eval(i, p).allFinite());
  }
  EXPECT_FALSE(s.notes.empty());
}

INSTANTIATE_TEST_SUITE_P(All, NamedSystems,
                         ::testing::Values("rolling_ball", "unicycle", "cvt", "triple_product", "kohn",
                                           "constant"));

TEST(Systems, Dimensions) {
  EXPECT_EQ(rolling_ball().fields.dim(), 9);
  EXPECT_EQ(rolling_ball().fields.ell(), 2);
  EXPECT_EQ(unicycle().fields.dim(), 3);
  EXPECT_EQ(cvt().fields.dim(), 4);
  EXPECT_EQ(triple_product().fields.ell(), 3);
  EXPECT_EQ(kohn(1).fields.dim(), 3);
  EXPECT_EQ(kohn(3).fields.dim(), 7);
  EXPECT_EQ(kohn(3).fields.ell(), 6);
  EXPECT_EQ(kohn().fields.dim(), 5);
  const NamedSystem c = constant_fields(3, 2);
  EXPECT_EQ(c.fields.ell(), 3);
  EXPECT_EQ(c.fields.eval(2, Vec::Zero(2)), Vec(Eigen::Vector2d(1, 0)));
}

TEST(Systems, NamesAndOptions) {
  for (const std::string& n : system_names()) EXPECT_EQ(system_by_name(n).name, n);
  EXPECT_EQ(system_by_name("kohn", {3, 2, 2}).fields.dim(), 7);
  EXPECT_EQ(system_by_name("constant", {2, 4, 3}).fields.ell(), 4);
  try {
    system_by_name("pendulum");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
}

TEST(Systems, CvtRejectsQOutsideUnitInterval) {
  const VectorFieldSet v = cvt().fields;
  for (double q : {0.0, 1.0, -0.2, 1.5}) {
    try {
      v.eval(0, Eigen::Vector4d(0, 0, 0, q));
      FAIL() << q;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DomainViolation);
    }
  }
}

TEST(Systems, RollingBallFieldsAreTangentToOrthogonalGroup) {
  const VectorFieldSet v = rolling_ball().fields;
  std::mt19937_64 rng(2);
  const Mat q = oracle::expm(oracle::random_antisymmetric(rng, 3, 2.0));
  for (int i = 0; i < 2; ++i) {
    const Mat dm = unflatten(v.eval(i, flatten(q)), 3);
    EXPECT_LT((dm * q.transpose() + q * dm.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Systems, FlattenRoundTrip) {
  Mat m(3, 3);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const Vec f = flatten(m);
  EXPECT_EQ(f(1), 2.0);  // row-major
  EXPECT_EQ(unflatten(f, 3), m);
  EXPECT_THROW(unflatten(f, 2), Error);
}

TEST(Systems, CvtFieldsAtHalf) {
  const VectorFieldSet v = cvt().fields;
  const Vec p = Eigen::Vector4d(0.3, -1.0, 2.0, 0.5);
  EXPECT_EQ(v.eval(0, p), Vec(Eigen::Vector4d(2.0, 2.0, 1.0, 0.0)));
  EXPECT_EQ(v.eval(1, p), Vec(Eigen::Vector4d(0.0, 0.0, 0.0, 1.0)));
}

TEST(Systems, UnicycleTurningFieldIsConstant) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 5; ++k) EXPECT_TRUE(unicycle().fields.jac(1, oracle::random_vec(rng, 3, -4, 4)).isZero(0.0));
}

TEST(Systems, TripleProductDegeneratesOnAxis) {
  const NamedSystem s = triple_product();
  const std::vector<Vec> axis{Eigen::Vector3d(1.0, 0.0, 0.0)};
  const ReconstructionMatrix rm = reconstruction_matrix(s.fields, axis);
  EXPECT_EQ(rm.rank, 0);
  EXPECT_FALSE(rm.full_rank());
}

TEST(Systems, KohnRankIsBoundedByDimension) {
  std::mt19937_64 rng(13);
  for (int d = 1; d <= 3; ++d) {
    const NamedSystem s = kohn(d);
    const int n = 2 * d + 1;
    std::vector<Vec> pts;
    for (int c = 0; c < 3; ++c) pts.push_back(oracle::random_vec(rng, n, -2.0, 2.0));
    const ReconstructionMatrix rm = reconstruction_matrix(s.fields, pts);
    EXPECT_EQ(rm.rank, n) << "d = " << d;
    EXPECT_EQ(rm.m, 2 * d * (2 * d + 1) / 2);
    // X_i commute with each other, as do the Y_i.
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        EXPECT_TRUE(bracket(s.fields, i, j, pts[0]).isZero(0.0));
        EXPECT_TRUE(bracket(s.fields, d + i, d + j, pts[0]).isZero(0.0));
      }
  }
}

TEST(Systems, ConstantFieldsRankIsMinOfEllAndDim) {
  for (int ell = 1; ell <= 4; ++ell)
    for (int d = 1; d <= 4; ++d) {
      const NamedSystem s = constant_fields(ell, d);
      const ReconstructionMatrix rm = reconstruction_matrix(s.fields, s.recommended_points);
      EXPECT_EQ(rm.rank, std::min(ell, d)) << ell << "x" << d;
    }
}
