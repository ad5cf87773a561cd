#include "tlspose/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "tlspose/errors.hpp"
#include "extended.hpp"

namespace tlspose {

namespace {

constexpr double kKabschRankTolerance = 1e-12;
constexpr long double kMinRescale = 0.1L;
constexpr long double kMaxRescale = 1000.0L;
constexpr long double kRescaleBand = 0.25L;

double inf_norm(const Vec3& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

void SolverConfig::validate() const {
  if (max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  if (!(step_tolerance > 0.0)) {
    throw std::invalid_argument("step_tolerance must be > 0");
  }
  if (damping_halvings_max < 0) {
    throw std::invalid_argument("damping_halvings_max must be >= 0");
  }
}

Pose init_pose_kabsch(Observations obs) {
  if (obs.size() < 3) {
    throw DegenerateGeometryError("at least three observation pairs are required");
  }
  const double n = static_cast<double>(obs.size());
  Vec3 r_mean = Vec3::Zero();
  Vec3 b_mean = Vec3::Zero();
  for (const ObservationPair& o : obs) {
    r_mean += o.r_tilde;
    b_mean += o.b_tilde;
  }
  r_mean /= n;
  b_mean /= n;

  Mat3 dispersion = Mat3::Zero();
  for (const ObservationPair& o : obs) {
    dispersion += (o.b_tilde - b_mean) * (o.r_tilde - r_mean).transpose();
  }

  const Eigen::JacobiSVD<Mat3> svd(dispersion, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3& sv = svd.singularValues();
  if (!dispersion.allFinite() || !(sv(1) > kKabschRankTolerance * sv(0))) {
    throw DegenerateGeometryError("observation geometry is collinear (rank-deficient dispersion)");
  }
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Rotation attitude = project_to_rotation(u * d * v.transpose());
  return Pose{attitude, attitude * r_mean - b_mean};
}

GaussNewtonStep gn_step(const Rotation& a_k, Observations obs) {
  const Linearization lin = linearize(a_k, obs);

  const detail::Vec3x p_hat = detail::optimal_translation_x(a_k, obs, lin.weights);
  const detail::Mat3x ax = a_k.matrix().cast<long double>();

  // g = (sum A_i Q_i^-1) S (sum Q_i^-1 nu_i) + sum A_i^T Q_i^-1 nu_i with
  // nu_i = a_k r~_i - b~_i collapses to sum A_i Q_i^-1 e_i, e_i the residual
  // at p_hat. The collapsed form avoids cancelling two O(|p|/sigma^2) terms.
  detail::Vec3x gradient = detail::Vec3x::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const detail::Vec3x e = detail::offset_x(ax, obs[i]) + p_hat;
    gradient += (lin.lever[i] * lin.weights[i].info).cast<long double>() * e;
  }

  const Eigen::LLT<Mat3> llt(lin.hessian);
  if (!lin.hessian.allFinite() || llt.info() != Eigen::Success) {
    throw DegenerateGeometryError("attitude Hessian is singular; observations do not fix the attitude");
  }
  const Vec3 g = gradient.cast<double>();
  return GaussNewtonStep{-llt.solve(g), p_hat.cast<double>(), g, lin.hessian};
}

PoseEstimate solve_pose(Observations obs, const SolverConfig& config) {
  config.validate();
  Rotation attitude = init_pose_kabsch(obs).attitude;
  SolverDiagnostics diag;

  for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
    const GaussNewtonStep step = gn_step(attitude, obs);
    const std::vector<ResidualWeight> weights = residual_weights(attitude, obs);
    const double cost_before = attitude_only_cost(attitude, obs, weights);
    diag.cost_history.push_back(cost_before);

    const double full_step = inf_norm(step.delta_alpha);
    const bool final_step = full_step <= config.step_tolerance;
    Vec3 delta = step.delta_alpha;
    int halvings = 0;
    bool stalled = false;
    const detail::Vec3x p_hat = detail::optimal_translation_x(attitude, obs, weights);
    long double change = detail::cost_change_x(attitude, delta, obs, weights, p_hat);

    // The Gauss-Newton model is built with the weights of the current
    // iterate, so acceptance is judged on that same reweighted cost. A
    // rejected step is cut to the minimizer of the quadratic through the
    // slope at zero and the trial change, kept within [0.1, 0.5] of its length.
    if (config.cost_decrease_required && !final_step) {
      const long double slope = static_cast<long double>(step.gradient.dot(step.delta_alpha));
      long double scale = 1.0L;
      // An accepted full step far from the fitted minimizer (overshoot or
      // undershoot along a weakly modelled direction) is moved to it when that
      // lowers the cost further.
      const long double full_curvature = change - slope;
      if (change <= 0.0L && slope < 0.0L && full_curvature > 0.0L) {
        const long double target = std::clamp(-slope / (2.0L * full_curvature), kMinRescale, kMaxRescale);
        if (std::abs(target - 1.0L) > kRescaleBand) {
          const Vec3 rescaled = static_cast<double>(target) * step.delta_alpha;
          const long double rescaled_change =
              detail::cost_change_x(attitude, rescaled, obs, weights, p_hat);
          if (rescaled_change < change) {
            delta = rescaled;
            change = rescaled_change;
          }
        }
      }
      while (change > 0.0L) {
        if (halvings == config.damping_halvings_max) {
          stalled = true;
          break;
        }
        long double next = 0.5L * scale;
        const long double curvature = change - slope * scale;
        if (slope < 0.0L && curvature > 0.0L) {
          next = std::clamp(-slope * scale * scale / (2.0L * curvature), 0.1L * scale, 0.5L * scale);
        }
        scale = next;
        delta = static_cast<double>(scale) * step.delta_alpha;
        change = detail::cost_change_x(attitude, delta, obs, weights, p_hat);
        ++halvings;
      }
    }
    if (stalled) break;

    attitude = apply_error(delta, attitude);
    diag.iterations = iteration + 1;
    diag.step_history.push_back(inf_norm(delta));
    diag.halvings.push_back(halvings);
    diag.reweighted_cost_history.push_back(
        static_cast<double>(static_cast<long double>(cost_before) + change));
    if (final_step) {
      diag.converged = true;
      break;
    }
  }

  const TranslationSolution translation = optimal_translation(attitude, obs);
  const Pose pose{attitude, translation.p_hat};
  diag.final_cost = cost(pose, obs);
  diag.cost_history.push_back(diag.final_cost);
  diag.final_gradient_norm = inf_norm(gn_step(attitude, obs).gradient);
  return PoseEstimate{pose, std::move(diag)};
}

}  // namespace tlspose
