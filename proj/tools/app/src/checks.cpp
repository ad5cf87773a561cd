#include "tlspose_app/checks.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "tlspose/solver.hpp"

namespace tlspose::app {

namespace {

Vec3 axis(int k, double h) {
  Vec3 v = Vec3::Zero();
  v(k) = h;
  return v;
}

Scenario with_noise(Scenario s, std::span<const IsotropicNoise> noise) {
  for (std::size_t i = 0; i < s.noise.size(); ++i) s.noise[i] = noise[i].noise_model();
  return s;
}

void record(CheckResult& c, double value, std::size_t k) {
  ++c.cases;
  if (!(value <= c.worst) || std::isnan(value)) {
    c.worst = std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
    c.detail = "case " + std::to_string(k);
  }
}

double max_abs_diff(const Vec3& a, const Vec3& b) { return (a - b).cwiseAbs().maxCoeff(); }

int size_for_case(std::size_t k, int lo, int span) { return lo + static_cast<int>(k % static_cast<std::size_t>(span)); }

}  // namespace

Vec3 fd_gradient(const Rotation& a, Observations obs, double h) {
  const std::vector<ResidualWeight> weights = residual_weights(a, obs);
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    const double plus = attitude_only_cost(apply_error(axis(k, h), a), obs, weights);
    const double minus = attitude_only_cost(apply_error(axis(k, -h), a), obs, weights);
    g(k) = (plus - minus) / (2.0 * h);
  }
  return g;
}

Mat3 fd_hessian(const Rotation& a, Observations obs, double h) {
  const auto cost_at = [&](const Vec3& d) { return attitude_only_cost(apply_error(d, a), obs); };
  Mat3 hess;
  for (int j = 0; j < 3; ++j) {
    for (int k = j; k < 3; ++k) {
      const Vec3 dj = axis(j, h);
      const Vec3 dk = axis(k, h);
      hess(j, k) = (cost_at(dj + dk) - cost_at(dj - dk) - cost_at(dk - dj) + cost_at(-dj - dk)) /
                   (4.0 * h * h);
      hess(k, j) = hess(j, k);
    }
  }
  return hess;
}

Rotation weighted_wahba_q_method(Observations obs, std::span<const double> weights) {
  double total = 0.0;
  Vec3 b_bar = Vec3::Zero();
  Vec3 r_bar = Vec3::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    total += weights[i];
    b_bar += weights[i] * obs[i].b_tilde;
    r_bar += weights[i] * obs[i].r_tilde;
  }
  b_bar /= total;
  r_bar /= total;

  Mat3 b = Mat3::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    b += weights[i] * (obs[i].b_tilde - b_bar) * (obs[i].r_tilde - r_bar).transpose();
  }
  const Mat3 s = b + b.transpose();
  const double sigma = b.trace();
  const Vec3 z(b(1, 2) - b(2, 1), b(2, 0) - b(0, 2), b(0, 1) - b(1, 0));
  Eigen::Matrix4d k;
  k << s - sigma * Mat3::Identity(), z, z.transpose(), sigma;

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(k);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  const Vec3 qv = q.head<3>();
  const double q4 = q(3);
  const Mat3 a = (q4 * q4 - qv.squaredNorm()) * Mat3::Identity() + 2.0 * qv * qv.transpose() -
                 2.0 * q4 * cross_matrix(qv);
  return project_to_rotation(a);
}

Mat6 inverse_lu(const Mat6& m) { return m.fullPivLu().inverse(); }

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

std::uint64_t case_seed(std::uint64_t seed, std::size_t k) { return substream_seed(seed, k); }

std::vector<IsotropicNoise> random_isotropic_noise(std::size_t n, double lo, double hi,
                                                   std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<IsotropicNoise> out(n);
  for (IsotropicNoise& s : out) {
    s.sigma_r = u(rng);
    s.sigma_b = u(rng);
  }
  return out;
}

CheckResult check_gradient(std::uint64_t seed, std::size_t cases) {
  CheckResult c{"gradient_vs_finite_difference", 0.0, 1e-5, 0, ""};
  for (std::size_t k = 0; k < cases; ++k) {
    const Scenario s = random_scenario(size_for_case(k, 3, 6), 1e-4, case_seed(seed, k));
    Rng rng(case_seed(seed ^ 0x5bd1e995ULL, k));
    const std::vector<ObservationPair> obs = draw_observations(s, rng);
    const Vec3 g = gn_step(s.truth.attitude, obs).gradient;
    const Vec3 fd = fd_gradient(s.truth.attitude, obs);
    record(c, (fd - g).lpNorm<Eigen::Infinity>() / g.lpNorm<Eigen::Infinity>(), k);
  }
  return c;
}

CheckResult check_hessian(std::uint64_t seed, std::size_t cases) {
  CheckResult c{"hessian_vs_finite_difference", 0.0, 1e-4, 0, ""};
  for (std::size_t k = 0; k < cases; ++k) {
    const Scenario s = random_scenario(size_for_case(k, 3, 6), 1e-4, case_seed(seed, k));
    const std::vector<ObservationPair> obs = s.noiseless_observations();
    const Mat3 h = gn_step(s.truth.attitude, obs).hessian;
    record(c, relative_error(fd_hessian(s.truth.attitude, obs), h), k);
  }
  return c;
}

std::vector<CheckResult> check_fim(std::uint64_t seed, std::size_t cases, const CheckHooks& hooks) {
  CheckResult joint{"joint_covariance_equals_fim_inverse", 0.0, 1e-9, 0, ""};
  CheckResult schur_att{"schur_attitude_block_equals_fim_inverse", 0.0, 1e-9, 0, ""};
  CheckResult schur_tr{"schur_translation_block_equals_fim_inverse", 0.0, 1e-9, 0, ""};
  CheckResult att{"attitude_covariance_equals_joint_block", 0.0, 1e-9, 0, ""};
  CheckResult tr{"translation_covariance_equals_joint_block", 0.0, 1e-9, 0, ""};
  for (std::size_t k = 0; k < cases; ++k) {
    const Scenario s = random_scenario(size_for_case(k, 3, 8), 1e-3, case_seed(seed, k));
    Rng rng(case_seed(seed ^ 0x27d4eb2fULL, k));
    const std::vector<ObservationPair> obs = draw_observations(s, rng);
    const Rotation& a = s.truth.attitude;

    const Fim f = hooks.fim(a, obs);
    const Mat6 f_inv = inverse_lu(f.f);
    const Mat6 p_f = joint_covariance(a, obs);
    const FimInverseBlocks blocks = fim_inverse_blocks(f);
    const Mat3 p_att = attitude_covariance(a, obs);
    const Mat3 p_tr = translation_covariance(a, obs, p_att);

    record(joint, relative_error(p_f, f_inv), k);
    record(schur_att, relative_error(blocks.attitude, f_inv.topLeftCorner<3, 3>()), k);
    record(schur_tr, relative_error(blocks.translation, f_inv.bottomRightCorner<3, 3>()), k);
    record(att, relative_error(p_att, p_f.topLeftCorner<3, 3>()), k);
    record(tr, relative_error(p_tr, p_f.bottomRightCorner<3, 3>()), k);
  }
  return {joint, schur_att, schur_tr, att, tr};
}

std::vector<CheckResult> check_isotropic(std::uint64_t seed, std::size_t cases) {
  CheckResult cost{"isotropic_cost", 0.0, 1e-12, 0, ""};
  CheckResult hess{"isotropic_hessian", 0.0, 1e-10, 0, ""};
  CheckResult p_att{"isotropic_attitude_covariance", 0.0, 1e-10, 0, ""};
  CheckResult p_tr{"isotropic_translation_covariance", 0.0, 1e-10, 0, ""};
  CheckResult hats{"isotropic_observation_estimates_m", 0.0, 1e-10, 0, ""};
  CheckResult pair_cov{"isotropic_residual_and_estimate_covariances", 0.0, 1e-10, 0, ""};
  CheckResult wahba{"isotropic_solver_vs_q_method_rad", 0.0, 1e-9, 0, ""};

  for (std::size_t k = 0; k < cases; ++k) {
    const int n = size_for_case(k, 3, 8);
    const std::vector<IsotropicNoise> noise =
        random_isotropic_noise(static_cast<std::size_t>(n), 0.05, 0.2, case_seed(seed ^ 0x165667b1ULL, k));
    const Scenario s = with_noise(random_scenario(n, 1e-2, case_seed(seed, k)), noise);
    Rng rng(case_seed(seed ^ 0x9e3779b9ULL, k));
    const std::vector<ObservationPair> obs = draw_observations(s, rng);

    const PoseEstimate est = solve_pose(obs);
    const Rotation& a = est.pose.attitude;

    record(cost, std::abs(isotropic_cost(a, obs, noise) - attitude_only_cost(a, obs)) /
                     attitude_only_cost(a, obs), k);
    record(hess, relative_error(isotropic_hessian(a, obs, noise), linearize(a, obs).hessian), k);

    const CovarianceReport general = covariance_report(est.pose, obs);
    const CovarianceReport closed = isotropic_covariances(a, obs, noise);
    record(p_att, relative_error(closed.p_delta_alpha, general.p_delta_alpha), k);
    record(p_tr, relative_error(closed.cov_p, general.cov_p), k);
    double hat_err = 0.0;
    double cov_err = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const ObservationReport& g = general.observations[i];
      const ObservationReport& c = closed.observations[i];
      hat_err = std::max({hat_err, max_abs_diff(c.b_hat, g.b_hat), max_abs_diff(c.r_hat, g.r_hat)});
      cov_err = std::max({cov_err, relative_error(c.cov_resid_b, g.cov_resid_b),
                          relative_error(c.cov_resid_r, g.cov_resid_r), relative_error(c.p_b, g.p_b),
                          relative_error(c.p_r, g.p_r)});
    }
    record(hats, hat_err, k);
    record(pair_cov, cov_err, k);

    std::vector<double> w;
    for (const IsotropicNoise& ni : noise) w.push_back(1.0 / (ni.sigma() * ni.sigma()));
    record(wahba, geodesic_angle(a, weighted_wahba_q_method(obs, w)), k);
  }
  return {cost, hess, p_att, p_tr, hats, pair_cov, wahba};
}

std::vector<CheckResult> check_noiseless(std::uint64_t seed, std::size_t cases_per_size) {
  std::vector<CheckResult> out;
  for (const int n : {3, 5, 50}) {
    CheckResult c{"noiseless_recovery_n" + std::to_string(n), 0.0, 1e-10, 0, ""};
    for (std::size_t k = 0; k < cases_per_size; ++k) {
      const Scenario s = random_scenario(n, 1e-4, case_seed(seed + static_cast<std::uint64_t>(n), k));
      const PoseEstimate est = solve_pose(s.noiseless_observations());
      const double err = std::max(geodesic_angle(est.pose.attitude, s.truth.attitude),
                                  max_abs_diff(est.pose.p, s.truth.p));
      record(c, est.diagnostics.converged ? err : std::numeric_limits<double>::infinity(), k);
    }
    out.push_back(c);
  }
  return out;
}

std::vector<CheckResult> run_validation(std::uint64_t seed, const CheckHooks& hooks) {
  std::vector<CheckResult> out{check_gradient(seed, 20), check_hessian(seed, 20)};
  for (auto&& group : {check_fim(seed, 100, hooks), check_isotropic(seed, 100), check_noiseless(seed, 20)}) {
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

}  // namespace tlspose::app
