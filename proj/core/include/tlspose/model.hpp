#ifndef TLSPOSE_MODEL_HPP
#define TLSPOSE_MODEL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "tlspose/geometry.hpp"

namespace tlspose {

/// Joint covariance of the measurement errors [dr; db] of one vector pair,
/// stored as its three distinct 3x3 blocks (units m^2):
///
///   R = [ r_r     r_rb ]
///       [ r_rb^T  r_b  ]
struct NoiseModel {
  Mat3 r_r = Mat3::Zero();
  Mat3 r_b = Mat3::Zero();
  Mat3 r_rb = Mat3::Zero();

  static NoiseModel from_joint(const Mat6& joint);
  static NoiseModel isotropic(double sigma_r, double sigma_b);

  Mat6 joint() const;
  NoiseModel scaled(double factor) const;

  /// Throws InvalidNoiseModelError unless the joint matrix is finite,
  /// symmetric to 1e-12 relative and Cholesky-factorizable.
  void validate() const;
};

/// One measured correspondence (r~, b~) with its noise model.
struct ObservationPair {
  Vec3 r_tilde = Vec3::Zero();
  Vec3 b_tilde = Vec3::Zero();
  NoiseModel noise;
};

using Observations = std::span<const ObservationPair>;

/// Rigid pose under the convention b = A r - p. The conventional translation
/// (b = A r + t) is t = -p.
struct Pose {
  Rotation attitude;
  Vec3 p = Vec3::Zero();

  Vec3 conventional_translation() const { return -p; }
};

/// Residual weight of one observation. Q^-1 is only ever applied through
/// the Cholesky factor; `info` is that factor solved against the identity.
struct ResidualWeight {
  Mat3 q;
  Eigen::LLT<Mat3> llt;
  Mat3 info;

  /// e^T Q^-1 e, evaluated as |L^-1 e|^2.
  double mahalanobis(const Vec3& e) const;
};

/// A R_r A^T - A R_rb - R_rb^T A^T + R_b. Throws SingularWeightError(index)
/// when the result is not positive definite.
Mat3 q_lambda(const Rotation& a, const NoiseModel& noise, std::size_t index = 0);

ResidualWeight residual_weight(const Rotation& a, const NoiseModel& noise,
                               std::size_t index = 0);

std::vector<ResidualWeight> residual_weights(const Rotation& a, Observations obs);

/// e = b~ - A r~ + p.
Vec3 residual(const Pose& pose, const ObservationPair& obs);

/// Joint TLS cost 0.5 * sum e_i^T Q_i^-1 e_i, weights evaluated at pose.attitude.
double cost(const Pose& pose, Observations obs);

struct TranslationSolution {
  Vec3 p_hat;
  Mat3 s_lambda;  // (sum Q_i^-1)^-1
};

/// Minimizer of the joint cost over p for a fixed attitude.
/// Throws DegenerateGeometryError if sum Q_i^-1 is singular.
TranslationSolution optimal_translation(const Rotation& a, Observations obs);

/// Same, with caller-supplied weights (one per observation).
TranslationSolution optimal_translation(const Rotation& a, Observations obs,
                                        std::span<const ResidualWeight> weights);

/// Cost with the translation eliminated: cost(Pose{a, p_hat(a)}).
double attitude_only_cost(const Rotation& a, Observations obs);

/// Attitude-only cost with the weights frozen at weight_attitude instead of a.
double attitude_only_cost(const Rotation& a, Observations obs,
                          const Rotation& weight_attitude);

/// Attitude-only cost with caller-supplied weights (one per observation).
double attitude_only_cost(const Rotation& a, Observations obs,
                          std::span<const ResidualWeight> weights);

/// The sums over observations that every first-order expression is built
/// from, evaluated at attitude a with lever arms A_i = [a r~_i x].
struct Linearization {
  std::vector<ResidualWeight> weights;
  std::vector<Mat3> lever;        // A_i
  Mat3 info_sum;                  // sum Q_i^-1
  Mat3 s_lambda;                  // (sum Q_i^-1)^-1
  Mat3 info_lever_sum;            // sum Q_i^-1 A_i
  Mat3 lever_info_lever_sum;      // sum A_i^T Q_i^-1 A_i
  Mat3 a_bar;                     // S_lambda sum Q_i^-1 A_i
  Mat3 hessian;                   // sum A^T Q^-1 A - (sum Q^-1 A)^T S (sum Q^-1 A)
};

/// Throws SingularWeightError or DegenerateGeometryError (singular sum Q_i^-1).
Linearization linearize(const Rotation& a, Observations obs);

}  // namespace tlspose

#endif  // TLSPOSE_MODEL_HPP
