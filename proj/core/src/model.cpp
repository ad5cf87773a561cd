#include "tlspose/model.hpp"

#include <cmath>
#include <string>

#include "tlspose/errors.hpp"
#include "extended.hpp"

namespace tlspose {

namespace {

Mat3 symmetrized(const Mat3& m) { return 0.5 * (m + m.transpose()); }

Eigen::LLT<Mat3> factor_info_sum(const Mat3& info_sum) {
  Eigen::LLT<Mat3> llt(info_sum);
  if (!info_sum.allFinite() || llt.info() != Eigen::Success) {
    throw DegenerateGeometryError("sum of residual information matrices is singular");
  }
  return llt;
}

}  // namespace

NoiseModel NoiseModel::from_joint(const Mat6& joint) {
  NoiseModel n;
  n.r_r = joint.topLeftCorner<3, 3>();
  n.r_rb = joint.topRightCorner<3, 3>();
  n.r_b = joint.bottomRightCorner<3, 3>();
  return n;
}

NoiseModel NoiseModel::isotropic(double sigma_r, double sigma_b) {
  NoiseModel n;
  n.r_r = sigma_r * sigma_r * Mat3::Identity();
  n.r_b = sigma_b * sigma_b * Mat3::Identity();
  return n;
}

Mat6 NoiseModel::joint() const {
  Mat6 j;
  j << r_r, r_rb, r_rb.transpose(), r_b;
  return j;
}

NoiseModel NoiseModel::scaled(double factor) const {
  return NoiseModel{factor * r_r, factor * r_b, factor * r_rb};
}

void NoiseModel::validate() const {
  const Mat6 j = joint();
  if (!j.allFinite()) {
    throw InvalidNoiseModelError("noise covariance has non-finite entries");
  }
  const double scale = j.norm();
  if ((j - j.transpose()).norm() > 1e-12 * scale ||
      (r_r - r_r.transpose()).norm() > 1e-12 * scale ||
      (r_b - r_b.transpose()).norm() > 1e-12 * scale) {
    throw InvalidNoiseModelError("noise covariance is not symmetric");
  }
  const Eigen::LLT<Mat6> llt(j);
  if (llt.info() != Eigen::Success) {
    throw InvalidNoiseModelError("noise covariance is not positive definite");
  }
}

double ResidualWeight::mahalanobis(const Vec3& e) const {
  return llt.matrixL().solve(e).squaredNorm();
}

Mat3 q_lambda(const Rotation& a, const NoiseModel& noise, std::size_t index) {
  return residual_weight(a, noise, index).q;
}

ResidualWeight residual_weight(const Rotation& a, const NoiseModel& noise,
                               std::size_t index) {
  const Mat3& am = a.matrix();
  const Mat3 a_rrb = am * noise.r_rb;
  const Mat3 q = symmetrized(am * noise.r_r * am.transpose() - a_rrb -
                             a_rrb.transpose() + noise.r_b);
  ResidualWeight w{q, Eigen::LLT<Mat3>(q), Mat3::Zero()};
  if (!q.allFinite() || w.llt.info() != Eigen::Success) {
    throw SingularWeightError(index, "residual weight Q_lambda is not positive definite");
  }
  w.info = symmetrized(w.llt.solve(Mat3::Identity()));
  return w;
}

std::vector<ResidualWeight> residual_weights(const Rotation& a, Observations obs) {
  std::vector<ResidualWeight> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out.push_back(residual_weight(a, obs[i].noise, i));
  }
  return out;
}

Vec3 residual(const Pose& pose, const ObservationPair& obs) {
  const detail::Mat3x ax = pose.attitude.matrix().cast<long double>();
  return (detail::offset_x(ax, obs) + pose.p.cast<long double>()).cast<double>();
}

double cost(const Pose& pose, Observations obs) {
  double total = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const ResidualWeight w = residual_weight(pose.attitude, obs[i].noise, i);
    total += w.mahalanobis(residual(pose, obs[i]));
  }
  return 0.5 * total;
}

TranslationSolution optimal_translation(const Rotation& a, Observations obs) {
  const std::vector<ResidualWeight> weights = residual_weights(a, obs);
  return optimal_translation(a, obs, weights);
}

TranslationSolution optimal_translation(const Rotation& a, Observations obs,
                                        std::span<const ResidualWeight> weights) {
  if (obs.empty()) {
    throw DegenerateGeometryError("no observations");
  }
  Mat3 info_sum = Mat3::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) info_sum += weights[i].info;
  const Eigen::LLT<Mat3> llt = factor_info_sum(info_sum);
  return {detail::optimal_translation_x(a, obs, weights).cast<double>(),
          symmetrized(llt.solve(Mat3::Identity()))};
}

double attitude_only_cost(const Rotation& a, Observations obs,
                          std::span<const ResidualWeight> weights) {
  return detail::quadratic_cost_x(a, obs, weights,
                                  detail::optimal_translation_x(a, obs, weights));
}

double attitude_only_cost(const Rotation& a, Observations obs) {
  const std::vector<ResidualWeight> weights = residual_weights(a, obs);
  return attitude_only_cost(a, obs, weights);
}

double attitude_only_cost(const Rotation& a, Observations obs,
                          const Rotation& weight_attitude) {
  const std::vector<ResidualWeight> weights = residual_weights(weight_attitude, obs);
  return attitude_only_cost(a, obs, weights);
}

Linearization linearize(const Rotation& a, Observations obs) {
  if (obs.empty()) {
    throw DegenerateGeometryError("no observations");
  }
  Linearization lin;
  lin.weights = residual_weights(a, obs);
  lin.lever.reserve(obs.size());
  lin.info_sum.setZero();
  lin.info_lever_sum.setZero();
  lin.lever_info_lever_sum.setZero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Mat3 lever = cross_matrix(a * obs[i].r_tilde);
    const Mat3& info = lin.weights[i].info;
    lin.lever.push_back(lever);
    lin.info_sum += info;
    lin.info_lever_sum += info * lever;
    lin.lever_info_lever_sum += lever.transpose() * info * lever;
  }
  const Eigen::LLT<Mat3> llt = factor_info_sum(lin.info_sum);
  lin.s_lambda = symmetrized(llt.solve(Mat3::Identity()));
  lin.a_bar = llt.solve(lin.info_lever_sum);
  lin.hessian = symmetrized(lin.lever_info_lever_sum -
                            lin.info_lever_sum.transpose() * lin.a_bar);
  return lin;
}

}  // namespace tlspose
