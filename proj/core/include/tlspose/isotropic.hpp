#ifndef TLSPOSE_ISOTROPIC_HPP
#define TLSPOSE_ISOTROPIC_HPP

#include <span>
#include <vector>

#include "tlspose/covariance.hpp"

namespace tlspose {

/// Isotropic, uncorrelated noise of one pair: R_r = sigma_r^2 I, R_b = sigma_b^2 I.
struct IsotropicNoise {
  double sigma_r = 0.0;  // m
  double sigma_b = 0.0;  // m

  /// sqrt(sigma_r^2 + sigma_b^2); Q_lambda = sigma^2 I for every attitude.
  double sigma() const;
  NoiseModel noise_model() const;

  /// Throws InvalidNoiseModelError unless both deviations are finite and positive.
  void validate() const;
};

using IsotropicNoiseList = std::span<const IsotropicNoise>;

/// sum_i sigma_i^-2. S_lambda = I / total_information.
double total_information(IsotropicNoiseList noise);

/// Information-weighted means (b~_bar, r~_bar) with weights sigma_i^-2.
struct WeightedCentroids {
  Vec3 b;
  Vec3 r;
};
WeightedCentroids weighted_centroids(Observations obs, IsotropicNoiseList noise);

/// 0.5 sum sigma_i^-2 |b~_i - a r~_i|^2 - 0.5 W |b~_bar - a r~_bar|^2, W = total_information.
double isotropic_cost(const Rotation& a, Observations obs, IsotropicNoiseList noise);

/// -sum sigma_i^-2 A_i^2 + W A_bar^2 with A_bar = W^-1 sum sigma_i^-2 A_i.
Mat3 isotropic_hessian(const Rotation& a, Observations obs, IsotropicNoiseList noise);

/// All report fields from the isotropic closed forms; p^ = a r~_bar - b~_bar.
/// Agrees with covariance_report on the equivalent NoiseModel.
CovarianceReport isotropic_covariances(const Rotation& a, Observations obs,
                                       IsotropicNoiseList noise);

/// Residual and estimate covariances written with sigma_b^2 (resp. sigma_r^2)
/// in place of sigma_b^4 (sigma_r^4) in the residual prefactor, sigma^3 in place
/// of sigma^4 in the estimate cross terms, and sigma_b in the last r term.
/// Dimensionally inconsistent; kept only for side-by-side comparison.
struct UnreconciledIsotropicForms {
  std::vector<ResidualCovariance> residuals;
  std::vector<EstimateCovariance> estimates;
};
UnreconciledIsotropicForms isotropic_unreconciled_forms(const Rotation& a,
                                                        Observations obs,
                                                        IsotropicNoiseList noise);

/// Copies obs with each noise model replaced by the isotropic one.
std::vector<ObservationPair> with_isotropic_noise(Observations obs,
                                                  IsotropicNoiseList noise);

}  // namespace tlspose

#endif  // TLSPOSE_ISOTROPIC_HPP
