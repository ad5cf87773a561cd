#ifndef TLSPOSE_COVARIANCE_HPP
#define TLSPOSE_COVARIANCE_HPP

#include <vector>

#include "tlspose/model.hpp"

namespace tlspose {

/// Fisher information of the pose error vector f = [delta_alpha; delta_p].
struct Fim {
  Mat6 f;
  Mat3 f11;  // sum A_i^T Q_i^-1 A_i
  Mat3 f12;  // -sum A_i^T Q_i^-1
  Mat3 f21;  // -sum Q_i^-1 A_i
  Mat3 f22;  // sum Q_i^-1

  /// Assembles f from the four blocks.
  static Fim from_blocks(const Mat3& f11, const Mat3& f12, const Mat3& f21,
                         const Mat3& f22);
};

/// Diagonal blocks of F^-1 computed through Schur complements, independently
/// of the full 6x6 inverse.
struct FimInverseBlocks {
  Mat3 attitude;     // (F11 - F12 F22^-1 F21)^-1
  Mat3 translation;  // (F22 - F21 F11^-1 F12)^-1
};

/// Per-pair reconstructed observations.
struct ObservationEstimate {
  Vec3 b_hat;
  Vec3 r_hat;
};

/// Covariances of the reconstruction residuals b^ - b~ and r^ - r~.
struct ResidualCovariance {
  Mat3 b;
  Mat3 r;
};

/// Covariances of the reconstruction errors b^ - b and r^ - r.
struct EstimateCovariance {
  Mat3 p_b;
  Mat3 p_r;
};

struct ObservationReport {
  Vec3 b_hat;
  Vec3 r_hat;
  Mat3 cov_resid_b;
  Mat3 cov_resid_r;
  Mat3 p_b;            // reference-sensor cross-covariance R_rb neglected
  Mat3 p_r;            // reference-sensor cross-covariance R_rb neglected
  Mat3 p_b_correlated;  // first-order covariance including R_rb
  Mat3 p_r_correlated;  // first-order covariance including R_rb
};

struct CovarianceReport {
  Mat3 p_delta_alpha;
  Mat3 cov_p;
  Mat6 p_f;  // joint covariance of [delta_alpha; delta_p]
  Mat3 a_bar;
  Mat3 s_lambda;
  std::vector<ObservationReport> observations;
};

/// H^-1 at attitude a with lever arms [a r~_i x]. Throws DegenerateGeometryError
/// when H is not positive definite.
Mat3 attitude_covariance(const Rotation& a, Observations obs);

/// S_lambda + A_bar P A_bar^T with A_bar = S_lambda sum Q_i^-1 A_i.
Mat3 translation_covariance(const Rotation& a, Observations obs,
                            const Mat3& p_delta_alpha);

/// (sum G_i^T Q_i^-1 G_i)^-1 with G_i = [A_i  -I], inverted by Cholesky.
Mat6 joint_covariance(const Rotation& a, Observations obs);

Fim fim(const Rotation& a, Observations obs);

/// Throws DegenerateGeometryError when a Schur complement is singular.
FimInverseBlocks fim_inverse_blocks(const Fim& f);

/// b^_i and r^_i from the pose and the measurements. Reconstructed pairs
/// satisfy b^ = A^ r^ - p^.
std::vector<ObservationEstimate> estimate_observations(const Pose& pose,
                                                      Observations obs);

/// C_i (Q_i - G_i P G_i^T) C_i^T and D_i (Q_i - G_i P G_i^T) D_i^T with
/// C_i = (R_rb^T A^T - R_b) Q_i^-1 and D_i = (R_r A^T - R_rb) Q_i^-1.
std::vector<ResidualCovariance> residual_covariances(const Rotation& a,
                                                     Observations obs,
                                                     const Mat6& p_f);

/// Estimate-error covariances with the cross terms
///   C (I - G P G^T Q^-1) R_b   and   -D (I - G P G^T Q^-1) A R_r,
/// which neglect R_rb in the correlation between the residual and the
/// measurement noise. Exact when R_rb = 0.
std::vector<EstimateCovariance> observation_estimate_covariances(
    const Rotation& a, Observations obs, const Mat6& p_f);

/// First-order estimate-error covariances with the cross terms
///   C (I - G P G^T Q^-1) (R_b - A R_rb)   and   D (I - G P G^T Q^-1) (R_rb^T - A R_r).
std::vector<EstimateCovariance> observation_estimate_covariances_correlated(
    const Rotation& a, Observations obs, const Mat6& p_f);

/// E{delta_alpha Delta_a_i^T} = H^-1 (A_i - A_bar)^T for each pair, where
/// Delta_a_i = Delta_b_i - A Delta_r_i is the combined measurement error.
std::vector<Mat3> attitude_noise_cross_covariances(const Rotation& a,
                                                   Observations obs);

/// Every analytic covariance, evaluated at pose.attitude with the measured r~.
CovarianceReport covariance_report(const Pose& pose, Observations obs);

}  // namespace tlspose

#endif  // TLSPOSE_COVARIANCE_HPP
