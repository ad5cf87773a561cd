#ifndef TLSPOSE_GEOMETRY_HPP
#define TLSPOSE_GEOMETRY_HPP

#include <Eigen/Core>

namespace tlspose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Tolerance used by the Rotation invariant: ||m^T m - I||_F and |det m - 1|.
inline constexpr double kRotationTolerance = 1e-12;

/// Proper orthogonal 3x3 matrix (attitude matrix, reference -> body).
///
/// Instances built through from_matrix() are checked against
/// kRotationTolerance; everything produced by the library (exponential map,
/// SVD projection, products) is orthonormal to rounding.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Throws std::invalid_argument if m is not a rotation to kRotationTolerance.
  static Rotation from_matrix(const Mat3& m);
  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const noexcept { return m_; }
  Rotation transpose() const { return Rotation(m_.transpose(), Unchecked{}); }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const {
    return Rotation(m_ * other.m_, Unchecked{});
  }

  /// ||m^T m - I||_F.
  double orthonormality_error() const;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}

  friend Rotation so3_exp(const Vec3& omega);
  friend Rotation project_to_rotation(const Mat3& m);

  Mat3 m_;
};

bool is_rotation(const Mat3& m, double tolerance = kRotationTolerance);

/// [a x]: the skew-symmetric matrix with [a x] b = a x b.
Mat3 cross_matrix(const Vec3& a);

/// exp([omega x]) in Rodrigues form; Taylor coefficients below 1e-8 rad.
Rotation so3_exp(const Vec3& omega);

/// exp([omega x]) - I, accurate to relative rounding for small |omega|.
Mat3 so3_expm1(const Vec3& omega);

/// Principal logarithm: returns omega with |omega| <= pi and exp([omega x]) = r.
Vec3 so3_log(const Rotation& r);

/// Applies an attitude-error vector: exp(-[delta_alpha x]) a.
Rotation apply_error(const Vec3& delta_alpha, const Rotation& a);

/// Nearest rotation in Frobenius norm (SVD with determinant correction).
/// Throws DegenerateGeometryError when m has rank < 3 or is not finite.
Rotation project_to_rotation(const Mat3& m);

/// Angle of a^T b, in radians.
double geodesic_angle(const Rotation& a, const Rotation& b);

/// Z-Y-X Euler angles (roll, pitch, yaw) in radians of r = Rz(yaw) Ry(pitch) Rx(roll).
Vec3 roll_pitch_yaw(const Rotation& r);

}  // namespace tlspose

#endif  // TLSPOSE_GEOMETRY_HPP
