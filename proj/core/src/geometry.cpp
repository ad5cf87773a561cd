#include "tlspose/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "tlspose/errors.hpp"

namespace tlspose {

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kRankTolerance = 1e-12;

}  // namespace

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!is_rotation(m)) {
    throw std::invalid_argument("matrix is not a proper rotation");
  }
  return Rotation(m, Unchecked{});
}

double Rotation::orthonormality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).norm();
}

bool is_rotation(const Mat3& m, double tolerance) {
  if (!m.allFinite()) return false;
  if ((m.transpose() * m - Mat3::Identity()).norm() > tolerance) return false;
  return std::abs(m.determinant() - 1.0) <= tolerance;
}

Mat3 cross_matrix(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

Mat3 so3_expm1(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a;  // sin(t)/t
  double b;  // (1 - cos(t))/t^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double half_sin = std::sin(0.5 * theta);
    a = std::sin(theta) / theta;
    b = 2.0 * half_sin * half_sin / theta2;
  }
  const Mat3 k = cross_matrix(omega);
  return a * k + b * (k * k);
}

Rotation so3_exp(const Vec3& omega) {
  return Rotation(Mat3::Identity() + so3_expm1(omega), Rotation::Unchecked{});
}

Vec3 so3_log(const Rotation& r) {
  const Mat3& m = r.matrix();
  // v = 2 sin(theta) n
  const Vec3 v(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = 0.5 * v.norm();
  const double c = 0.5 * (m.trace() - 1.0);
  const double theta = std::atan2(s, c);

  if (theta < kSmallAngle) {
    return 0.5 * (1.0 + theta * theta / 6.0) * v;
  }
  if (std::numbers::pi - theta > 1e-6) {
    return (0.5 * theta / s) * v;
  }

  // Near pi the skew part vanishes; recover the axis from (R + R^T)/2 = cI + (1 - c) n n^T.
  const Mat3 nnt = (0.5 * (m + m.transpose()) - c * Mat3::Identity()) / (1.0 - c);
  Eigen::Index k = 0;
  nnt.diagonal().maxCoeff(&k);
  Vec3 n = nnt.col(k) / std::sqrt(std::max(nnt(k, k), 0.0));
  n.normalize();
  if (n.dot(v) < 0.0) n = -n;
  return theta * n;
}

Rotation apply_error(const Vec3& delta_alpha, const Rotation& a) {
  return so3_exp(-delta_alpha) * a;
}

Rotation project_to_rotation(const Mat3& m) {
  if (!m.allFinite()) {
    throw DegenerateGeometryError("cannot project a non-finite matrix onto SO(3)");
  }
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3& sv = svd.singularValues();
  if (!(sv(2) > kRankTolerance * sv(0))) {
    throw DegenerateGeometryError("cannot project a rank-deficient matrix onto SO(3)");
  }
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Rotation(u * d * v.transpose(), Rotation::Unchecked{});
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
  return so3_log(a.transpose() * b).norm();
}

Vec3 roll_pitch_yaw(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double pitch = std::asin(std::clamp(-m(2, 0), -1.0, 1.0));
  const double roll = std::atan2(m(2, 1), m(2, 2));
  const double yaw = std::atan2(m(1, 0), m(0, 0));
  return {roll, pitch, yaw};
}

}  // namespace tlspose
