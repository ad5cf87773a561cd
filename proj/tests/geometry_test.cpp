#include <numbers>

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include "test_support.hpp"
#include "tlspose/errors.hpp"
#include "tlspose/geometry.hpp"

namespace tlspose {
namespace {

using test::random_rotation;
using test::random_vec;

TEST(CrossMatrix, ZeroVectorGivesZeroMatrix) {
  EXPECT_EQ(cross_matrix(Vec3::Zero()), Mat3::Zero());
}

TEST(CrossMatrix, RightHandRule) {
  EXPECT_EQ(cross_matrix(Vec3::UnitX()) * Vec3::UnitY(), Vec3::UnitZ());
  EXPECT_EQ(cross_matrix(Vec3::UnitY()) * Vec3::UnitZ(), Vec3::UnitX());
  EXPECT_EQ(cross_matrix(Vec3::UnitZ()) * Vec3::UnitX(), Vec3::UnitY());
}

TEST(CrossMatrix, AnticommutesAndMatchesCrossProduct) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vec3 a = random_vec(rng);
    const Vec3 b = random_vec(rng);
    const Vec3 ab = cross_matrix(a) * b;
    EXPECT_LE((ab + cross_matrix(b) * a).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((ab - a.cross(b)).cwiseAbs().maxCoeff(), 1e-15);
    const Mat3 m = cross_matrix(a);
    EXPECT_EQ(m.transpose(), -m);
  }
}

TEST(So3Exp, ZeroIsIdentity) { EXPECT_EQ(so3_exp(Vec3::Zero()).matrix(), Mat3::Identity()); }

TEST(So3Exp, QuarterTurnAboutX) {
  const Rotation r = so3_exp(Vec3(std::numbers::pi / 2.0, 0.0, 0.0));
  EXPECT_LE((r * Vec3::UnitY() - Vec3::UnitZ()).norm(), 1e-15);
  EXPECT_LE((r * Vec3::UnitZ() + Vec3::UnitY()).norm(), 1e-15);
}

TEST(So3Exp, FirstOrderAgreementAtSmallAngle) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Vec3 w = 1e-3 * random_vec(rng).normalized();
    const Mat3 first_order = Mat3::Identity() + cross_matrix(w);
    EXPECT_LE((so3_exp(w).matrix() - first_order).norm(), 1e-6);
  }
}

TEST(So3Exp, InversePairAndUnitDeterminant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  for (int k = 0; k < 200; ++k) {
    const Vec3 w = angle(rng) * random_vec(rng).normalized();
    const Rotation r = so3_exp(w);
    EXPECT_LE((r.matrix() * so3_exp(-w).matrix() - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
    EXPECT_LE(r.orthonormality_error(), 1e-12);
  }
}

TEST(So3Exp, SmallAngleBranchIsContinuous) {
  const Vec3 axis = Vec3(1.0, -2.0, 0.5).normalized();
  const Mat3 below = so3_exp(0.999e-8 * axis).matrix();
  const Mat3 above = so3_exp(1.001e-8 * axis).matrix();
  EXPECT_LE((below - above).norm(), 1e-10);
  EXPECT_LE((so3_expm1(1e-9 * axis) - cross_matrix(1e-9 * axis)).norm(), 1e-18);
}

TEST(So3Expm1, MatchesExponentialMinusIdentity) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const Vec3 w = random_vec(rng);
    EXPECT_LE((so3_expm1(w) - (so3_exp(w).matrix() - Mat3::Identity())).norm(), 1e-15);
  }
}

TEST(So3Log, InvertsExponential) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi - 1e-6);
  for (int k = 0; k < 200; ++k) {
    const Vec3 w = angle(rng) * random_vec(rng).normalized();
    EXPECT_LE((so3_log(so3_exp(w)) - w).norm(), 1e-9) << w.transpose();
  }
  EXPECT_LE(so3_log(Rotation::identity()).norm(), 0.0);
  const Vec3 tiny(1e-10, -2e-10, 3e-10);
  EXPECT_LE((so3_log(so3_exp(tiny)) - tiny).norm(), 1e-22);
}

TEST(So3Log, HalfTurnHasAnglePi) {
  const Vec3 axis = Vec3(1.0, 1.0, 0.0).normalized();
  const Vec3 w = so3_log(so3_exp(std::numbers::pi * axis));
  EXPECT_NEAR(w.norm(), std::numbers::pi, 1e-9);
  EXPECT_NEAR(std::abs(w.normalized().dot(axis)), 1.0, 1e-9);
}

TEST(ApplyError, ZeroLeavesAttitudeUnchanged) {
  std::mt19937_64 rng(6);
  const Rotation a = random_rotation(rng);
  EXPECT_EQ(apply_error(Vec3::Zero(), a).matrix(), a.matrix());
}

TEST(ApplyError, InversePair) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const Rotation a = random_rotation(rng);
    const Vec3 d = 0.5 * random_vec(rng);
    EXPECT_LE((apply_error(d, apply_error(-d, a)).matrix() - a.matrix()).norm(), 1e-12);
  }
}

TEST(ApplyError, SecondOrderCloseToLinearForm) {
  std::mt19937_64 rng(8);
  for (double scale : {1e-1, 1e-2, 1e-3, 1e-5}) {
    const Rotation a = random_rotation(rng);
    const Vec3 d = scale * random_vec(rng).normalized();
    const Mat3 linear = (Mat3::Identity() - cross_matrix(d)) * a.matrix();
    EXPECT_LE((apply_error(d, a).matrix() - linear).norm(), d.squaredNorm());
  }
}

TEST(ApplyError, MatchesExponentialOfNegatedVector) {
  std::mt19937_64 rng(9);
  const Rotation a = random_rotation(rng);
  const Vec3 d = random_vec(rng);
  EXPECT_LE((apply_error(d, a).matrix() - so3_exp(-d).matrix() * a.matrix()).norm(), 1e-15);
}

TEST(ProjectToRotation, IdempotentOnRotations) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 50; ++k) {
    const Rotation a = random_rotation(rng);
    EXPECT_LE((project_to_rotation(a.matrix()).matrix() - a.matrix()).norm(), 1e-12);
  }
}

TEST(ProjectToRotation, RemovesScale) {
  EXPECT_LE((project_to_rotation(1.0001 * Mat3::Identity()).matrix() - Mat3::Identity()).norm(),
            1e-15);
}

TEST(ProjectToRotation, ReflectionBecomesProperRotation) {
  const Mat3 reflection = Vec3(1.0, 1.0, -1.0).asDiagonal();
  const Rotation r = project_to_rotation(reflection);
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
  EXPECT_LE(r.orthonormality_error(), 1e-12);
  // Nearest proper rotation flips the direction with the smallest singular value;
  // any such rotation lies at Frobenius distance 2 from the reflection.
  EXPECT_NEAR((r.matrix() - reflection).norm(), 2.0, 1e-12);
}

TEST(ProjectToRotation, SingularInputThrows) {
  Mat3 m = Mat3::Identity();
  m(2, 2) = 0.0;
  EXPECT_THROW(project_to_rotation(m), DegenerateGeometryError);
  EXPECT_THROW(project_to_rotation(Mat3::Constant(std::nan(""))), DegenerateGeometryError);
}

TEST(Rotation, FromMatrixValidates) {
  EXPECT_NO_THROW(Rotation::from_matrix(Mat3::Identity()));
  EXPECT_THROW(Rotation::from_matrix(1.001 * Mat3::Identity()), std::invalid_argument);
  EXPECT_THROW(Rotation::from_matrix(Vec3(1.0, 1.0, -1.0).asDiagonal()), std::invalid_argument);
  EXPECT_TRUE(is_rotation(so3_exp(Vec3(0.3, 0.2, -1.0)).matrix()));
}

TEST(GeodesicAngle, EqualsExponentNorm) {
  std::mt19937_64 rng(11);
  const Rotation a = random_rotation(rng);
  const Vec3 d(0.01, -0.02, 0.03);
  EXPECT_NEAR(geodesic_angle(a, apply_error(d, a)), d.norm(), 1e-14);
  EXPECT_NEAR(geodesic_angle(a, a), 0.0, 1e-15);
}

TEST(RollPitchYaw, RecoversZyxAngles) {
  const double roll = 0.1;
  const double pitch = -0.2;
  const double yaw = 0.3;
  const Mat3 m = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(roll, Vec3::UnitX()))
                     .toRotationMatrix();
  const Vec3 rpy = roll_pitch_yaw(Rotation::from_matrix(m));
  EXPECT_NEAR(rpy(0), roll, 1e-15);
  EXPECT_NEAR(rpy(1), pitch, 1e-15);
  EXPECT_NEAR(rpy(2), yaw, 1e-15);
}

}  // namespace
}  // namespace tlspose
