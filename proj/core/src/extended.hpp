#ifndef TLSPOSE_SRC_EXTENDED_HPP
#define TLSPOSE_SRC_EXTENDED_HPP

// Extended-precision kernels for quantities formed by cancellation: the
// residual b~ - A r~ + p is small next to its terms, and the weights Q^-1
// scale its rounding error into the gradient and the cost.

#include <span>

#include <Eigen/Cholesky>

#include "tlspose/errors.hpp"
#include "tlspose/model.hpp"

namespace tlspose::detail {

using Vec3x = Eigen::Matrix<long double, 3, 1>;
using Mat3x = Eigen::Matrix<long double, 3, 3>;

inline Vec3x offset_x(const Mat3x& a, const ObservationPair& o) {
  return o.b_tilde.cast<long double>() - a * o.r_tilde.cast<long double>();
}

/// argmin_p of sum e_i^T W_i e_i with e_i = b~_i - a r~_i + p.
inline Vec3x optimal_translation_x(const Rotation& a, Observations obs,
                                   std::span<const ResidualWeight> weights) {
  if (obs.empty()) throw DegenerateGeometryError("no observations");
  const Mat3x ax = a.matrix().cast<long double>();
  Mat3x info_sum = Mat3x::Zero();
  Vec3x weighted = Vec3x::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Mat3x w = weights[i].info.cast<long double>();
    info_sum += w;
    weighted += w * offset_x(ax, obs[i]);
  }
  const Eigen::LLT<Mat3x> llt(info_sum);
  if (!info_sum.allFinite() || llt.info() != Eigen::Success) {
    throw DegenerateGeometryError("sum of residual information matrices is singular");
  }
  return -llt.solve(weighted);
}

inline double quadratic_cost_x(const Rotation& a, Observations obs,
                               std::span<const ResidualWeight> weights, const Vec3x& p) {
  const Mat3x ax = a.matrix().cast<long double>();
  long double total = 0.0L;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Vec3x e = offset_x(ax, obs[i]) + p;
    total += e.dot(weights[i].info.cast<long double>() * e);
  }
  return static_cast<double>(0.5L * total);
}

/// J(apply_error(delta, a)) - J(a) for the attitude-only cost with weights
/// held fixed, formed from residual increments so that small changes keep
/// their relative accuracy. p_hat is optimal_translation_x at a.
inline long double cost_change_x(const Rotation& a, const Vec3& delta, Observations obs,
                                 std::span<const ResidualWeight> weights, const Vec3x& p_hat) {
  const Mat3x ax = a.matrix().cast<long double>();
  const Mat3x rotation_change = so3_expm1(-delta).cast<long double>() * ax;
  Mat3x info_sum = Mat3x::Zero();
  Vec3x weighted = Vec3x::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Mat3x w = weights[i].info.cast<long double>();
    info_sum += w;
    weighted += w * (rotation_change * obs[i].r_tilde.cast<long double>());
  }
  const Vec3x translation_change = info_sum.llt().solve(weighted);
  long double total = 0.0L;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Mat3x w = weights[i].info.cast<long double>();
    const Vec3x e = offset_x(ax, obs[i]) + p_hat;
    const Vec3x de = -(rotation_change * obs[i].r_tilde.cast<long double>()) + translation_change;
    total += de.dot(w * (e + 0.5L * de));
  }
  return total;
}

}  // namespace tlspose::detail

#endif  // TLSPOSE_SRC_EXTENDED_HPP
