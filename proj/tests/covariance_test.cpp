#include <algorithm>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "test_support.hpp"
#include "tlspose/covariance.hpp"
#include "tlspose/errors.hpp"
#include "tlspose/isotropic.hpp"
#include "tlspose/solver.hpp"
#include "tlspose_app/checks.hpp"

namespace tlspose {
namespace {

using test::paper_draw;
using test::random_noise;
using test::random_rotation;
using test::random_vec;
using test::rel;

std::vector<ObservationPair> random_observations(std::mt19937_64& rng, int n, double scale) {
  std::vector<ObservationPair> obs(static_cast<std::size_t>(n));
  for (ObservationPair& o : obs) {
    o.r_tilde = random_vec(rng);
    o.b_tilde = random_vec(rng);
    o.noise = random_noise(rng, scale);
  }
  return obs;
}

double min_eigenvalue(const Mat3& m) {
  return Eigen::SelfAdjointEigenSolver<Mat3>(0.5 * (m + m.transpose())).eigenvalues()(0);
}

// First-order covariances of every estimator output, obtained by central
// differences of the complete estimator (solve, then reconstruct) with respect
// to each measurement-noise component at the noiseless truth, propagated
// through the block-diagonal measurement covariance.
struct Linearized {
  Mat3 attitude;
  Mat3 translation;
  std::vector<Mat3> b_estimate, r_estimate, b_residual, r_residual;
  std::vector<Mat3> attitude_noise_cross;
};

Linearized linearized_covariances(const Scenario& s, double h) {
  const std::vector<TruePair> truth = s.true_pairs();
  const std::size_t n = truth.size();
  const int outputs = static_cast<int>(6 + 12 * n);
  const int inputs = static_cast<int>(6 * n);

  auto evaluate = [&](const Eigen::VectorXd& z) {
    std::vector<ObservationPair> obs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = static_cast<Eigen::Index>(6 * i);
      obs[i].r_tilde = truth[i].r + z.segment<3>(o);
      obs[i].b_tilde = truth[i].b + z.segment<3>(o + 3);
      obs[i].noise = s.noise[i];
    }
    const PoseEstimate e = solve_pose(obs);
    EXPECT_TRUE(e.diagnostics.converged);
    const std::vector<ObservationEstimate> rec = estimate_observations(e.pose, obs);
    Eigen::VectorXd y(outputs);
    y.segment<3>(0) = -so3_log(e.pose.attitude * s.truth.attitude.transpose());
    y.segment<3>(3) = e.pose.p - s.truth.p;
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = static_cast<Eigen::Index>(6 + 12 * i);
      y.segment<3>(o) = rec[i].b_hat - truth[i].b;
      y.segment<3>(o + 3) = rec[i].r_hat - truth[i].r;
      y.segment<3>(o + 6) = rec[i].b_hat - obs[i].b_tilde;
      y.segment<3>(o + 9) = rec[i].r_hat - obs[i].r_tilde;
    }
    return y;
  };

  Eigen::MatrixXd jac(outputs, inputs);
  for (int k = 0; k < inputs; ++k) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(inputs);
    z(k) = h;
    const Eigen::VectorXd plus = evaluate(z);
    z(k) = -h;
    jac.col(k) = (plus - evaluate(z)) / (2.0 * h);
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(inputs, inputs);
  for (std::size_t i = 0; i < n; ++i) {
    r.block<6, 6>(static_cast<Eigen::Index>(6 * i), static_cast<Eigen::Index>(6 * i)) = s.noise[i].joint();
  }
  const Eigen::MatrixXd cov = jac * r * jac.transpose();

  Linearized out;
  out.attitude = cov.block<3, 3>(0, 0);
  out.translation = cov.block<3, 3>(3, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto o = static_cast<Eigen::Index>(6 + 12 * i);
    out.b_estimate.push_back(cov.block<3, 3>(o, o));
    out.r_estimate.push_back(cov.block<3, 3>(o + 3, o + 3));
    out.b_residual.push_back(cov.block<3, 3>(o + 6, o + 6));
    out.r_residual.push_back(cov.block<3, 3>(o + 9, o + 9));
    // Combined error Delta_a = Delta_b - A Delta_r is linear in the noise.
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3, inputs);
    k.block<3, 3>(0, static_cast<Eigen::Index>(6 * i)) = -s.truth.attitude.matrix();
    k.block<3, 3>(0, static_cast<Eigen::Index>(6 * i + 3)) = Mat3::Identity();
    out.attitude_noise_cross.push_back(jac.topRows(3) * r * k.transpose());
  }
  return out;
}

TEST(AttitudeCovariance, OrthonormalIsotropicHandValue) {
  // r_i = e_i, A = I, Q = s2 I: H = (I + s s^T / 3) / s2 with s = (1, 1, 1).
  const double s2 = 0.02 * 0.02 + 0.03 * 0.03;
  std::vector<ObservationPair> obs(3);
  for (int i = 0; i < 3; ++i) {
    obs[static_cast<std::size_t>(i)].r_tilde = Vec3::Unit(i);
    obs[static_cast<std::size_t>(i)].b_tilde = Vec3::Unit(i);
    obs[static_cast<std::size_t>(i)].noise = NoiseModel::isotropic(0.02, 0.03);
  }
  const Vec3 s = Vec3::Ones();
  const Mat3 h = (Mat3::Identity() + s * s.transpose() / 3.0) / s2;
  EXPECT_LE(rel(attitude_covariance(Rotation::identity(), obs), h.inverse()), 1e-14);
}

TEST(AttitudeCovariance, HomogeneousInNoiseScale) {
  const auto obs = paper_draw(1);
  std::vector<ObservationPair> scaled = obs;
  for (ObservationPair& o : scaled) o.noise = o.noise.scaled(7.5);
  const Rotation a = so3_exp(Vec3(1e-4, 0.0, -2e-4));
  EXPECT_LE(rel(attitude_covariance(a, scaled), 7.5 * attitude_covariance(a, obs)), 1e-13);
  EXPECT_LE(rel(translation_covariance(a, scaled, attitude_covariance(a, scaled)),
                7.5 * translation_covariance(a, obs, attitude_covariance(a, obs))),
            1e-13);
}

TEST(AttitudeCovariance, SingleObservationIsDegenerate) {
  std::mt19937_64 rng(2);
  const auto obs = random_observations(rng, 1, 0.1);
  EXPECT_THROW(attitude_covariance(random_rotation(rng), obs), DegenerateGeometryError);
}

TEST(TranslationCovariance, ZeroLeverArmGivesResidualWeight) {
  ObservationPair o;
  o.b_tilde = Vec3(0.1, 0.2, 0.3);
  std::mt19937_64 rng(3);
  o.noise = random_noise(rng, 0.01);
  const Rotation a = random_rotation(rng);
  const std::vector<ObservationPair> obs{o};
  EXPECT_LE(rel(translation_covariance(a, obs, Mat3::Identity()), q_lambda(a, o.noise)), 1e-14);
}

TEST(JointCovariance, EqualsFimInverseAndItsBlocks) {
  const auto results = app::check_fim(77, 100);
  ASSERT_EQ(results.size(), 5u);
  for (const app::CheckResult& r : results) {
    EXPECT_TRUE(r.passed()) << r.name << " " << r.worst << " " << r.detail;
  }
}

TEST(JointCovariance, PermutationInvariant) {
  std::mt19937_64 rng(4);
  auto obs = random_observations(rng, 6, 0.1);
  const Rotation a = random_rotation(rng);
  const Mat6 before = joint_covariance(a, obs);
  std::reverse(obs.begin(), obs.end());
  EXPECT_LE(rel(joint_covariance(a, obs), before), 1e-12);
}

TEST(Fim, BlocksMatchSumOfProjectedInformation) {
  std::mt19937_64 rng(5);
  const auto obs = random_observations(rng, 5, 0.1);
  const Rotation a = random_rotation(rng);
  const Fim f = fim(a, obs);
  Mat6 sum = Mat6::Zero();
  Mat3 info = Mat3::Zero();
  for (const ObservationPair& o : obs) {
    Eigen::Matrix<double, 3, 6> g;
    g << cross_matrix(a * o.r_tilde), -Mat3::Identity();
    const Mat3 w = q_lambda(a, o.noise).fullPivLu().inverse();
    sum += g.transpose() * w * g;
    info += w;
  }
  EXPECT_LE(rel(f.f, sum), 1e-12);
  EXPECT_LE(rel(f.f22, info), 1e-12);
  EXPECT_LE(rel(f.f22.inverse(), optimal_translation(a, obs).s_lambda), 1e-12);
  EXPECT_EQ(f.f12, f.f21.transpose());
  EXPECT_EQ(Mat3(f.f.topRightCorner<3, 3>()), f.f12);
  EXPECT_LE((f.f - f.f.transpose()).norm(), 1e-12 * f.f.norm());
}

TEST(Fim, SchurBlocksMatchStandaloneCovariances) {
  std::mt19937_64 rng(6);
  const auto obs = random_observations(rng, 4, 0.1);
  const Rotation a = random_rotation(rng);
  const FimInverseBlocks blocks = fim_inverse_blocks(fim(a, obs));
  const Mat3 p = attitude_covariance(a, obs);
  EXPECT_LE(rel(blocks.attitude, p), 1e-10);
  EXPECT_LE(rel(blocks.translation, translation_covariance(a, obs, p)), 1e-10);
}

TEST(Fim, SignErrorInCrossBlockIsCaught) {
  app::CheckHooks hooks;
  hooks.fim = [](const Rotation& a, Observations obs) {
    const Fim f = fim(a, obs);
    return Fim::from_blocks(f.f11, -f.f12, f.f21, f.f22);
  };
  const auto results = app::check_fim(77, 10, hooks);
  const auto failed = std::count_if(results.begin(), results.end(),
                                    [](const app::CheckResult& r) { return !r.passed(); });
  EXPECT_GT(failed, 0);
  EXPECT_FALSE(results[0].passed()) << results[0].name;
}

TEST(EstimateObservations, ZeroResidualKeepsMeasurements) {
  const Scenario s = paper_scenario();
  const auto obs = s.noiseless_observations();
  const auto rec = estimate_observations(s.truth, obs);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_LE((rec[i].b_hat - obs[i].b_tilde).norm(), 1e-16);
    EXPECT_LE((rec[i].r_hat - obs[i].r_tilde).norm(), 1e-16);
  }
}

TEST(EstimateObservations, IsotropicUpdateCoefficient) {
  std::mt19937_64 rng(7);
  auto obs = random_observations(rng, 4, 1.0);
  const double sr = 0.03;
  const double sb = 0.05;
  for (ObservationPair& o : obs) o.noise = NoiseModel::isotropic(sr, sb);
  const Pose pose{random_rotation(rng), random_vec(rng)};
  const auto rec = estimate_observations(pose, obs);
  const double kb = sb * sb / (sb * sb + sr * sr);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Vec3 e = residual(pose, obs[i]);
    EXPECT_LE((rec[i].b_hat - (obs[i].b_tilde - kb * e)).norm(), 1e-14);
  }
}

TEST(EstimateObservations, ReconstructionSatisfiesConstraint) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto obs = paper_draw(seed);
    const PoseEstimate e = solve_pose(obs);
    const auto rec = estimate_observations(e.pose, obs);
    for (const ObservationEstimate& o : rec) {
      EXPECT_LE((o.b_hat - (e.pose.attitude * o.r_hat - e.pose.p)).norm(), 1e-9);
    }
  }
}

TEST(ResidualCovariances, PerfectBodySensorLeavesBodyVectorUnchanged) {
  std::mt19937_64 rng(8);
  auto obs = random_observations(rng, 4, 0.1);
  for (ObservationPair& o : obs) {
    o.noise.r_b = Mat3::Zero();
    o.noise.r_rb = Mat3::Zero();
  }
  const Rotation a = random_rotation(rng);
  const auto resid = residual_covariances(a, obs, joint_covariance(a, obs));
  for (const ResidualCovariance& r : resid) EXPECT_LE(r.b.norm(), 1e-30);
}

TEST(ResidualCovariances, DominatedByResidualWeight) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const auto obs = random_observations(rng, 3 + k % 5, 0.1);
    const Rotation a = random_rotation(rng);
    const Mat6 p_f = joint_covariance(a, obs);
    for (const ObservationPair& o : obs) {
      Eigen::Matrix<double, 3, 6> g;
      g << cross_matrix(a * o.r_tilde), -Mat3::Identity();
      const Mat3 q = q_lambda(a, o.noise);
      EXPECT_GE(min_eigenvalue(q - g * p_f * g.transpose()), -1e-10 * q.norm());
    }
  }
}

TEST(ObservationEstimateCovariances, TermByTermReconstruction) {
  std::mt19937_64 rng(10);
  const auto obs = random_observations(rng, 4, 0.1);
  const Rotation rot = random_rotation(rng);
  const Mat3& a = rot.matrix();
  const Mat6 p_f = joint_covariance(rot, obs);
  const auto resid = residual_covariances(rot, obs, p_f);
  const auto uncorrelated = observation_estimate_covariances(rot, obs, p_f);
  const auto correlated = observation_estimate_covariances_correlated(rot, obs, p_f);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const NoiseModel& n = obs[i].noise;
    const Mat3 q = q_lambda(rot, n);
    const Mat3 qi = q.fullPivLu().inverse();
    const Mat3 c = (n.r_rb.transpose() * a.transpose() - n.r_b) * qi;
    const Mat3 d = (n.r_r * a.transpose() - n.r_rb) * qi;
    Eigen::Matrix<double, 3, 6> g;
    g << cross_matrix(a * obs[i].r_tilde), -Mat3::Identity();
    const Mat3 m = g * p_f * g.transpose();
    EXPECT_LE(rel(resid[i].b, c * (q - m) * c.transpose()), 1e-12);
    EXPECT_LE(rel(resid[i].r, d * (q - m) * d.transpose()), 1e-12);

    const Mat3 tb = c * n.r_b - c * m * qi * n.r_b;
    const Mat3 tr = -d * a * n.r_r + d * m * qi * a * n.r_r;
    EXPECT_LE(rel(uncorrelated[i].p_b, n.r_b + resid[i].b + tb + tb.transpose()), 1e-12);
    EXPECT_LE(rel(uncorrelated[i].p_r, n.r_r + resid[i].r + tr + tr.transpose()), 1e-12);

    const Mat3 cb = c * (Mat3::Identity() - m * qi) * (n.r_b - a * n.r_rb);
    const Mat3 cr = d * (Mat3::Identity() - m * qi) * (n.r_rb.transpose() - a * n.r_r);
    EXPECT_LE(rel(correlated[i].p_b, n.r_b + resid[i].b + cb + cb.transpose()), 1e-12);
    EXPECT_LE(rel(correlated[i].p_r, n.r_r + resid[i].r + cr + cr.transpose()), 1e-12);
  }
}

TEST(ObservationEstimateCovariances, FormsAgreeWithoutCrossCovariance) {
  std::mt19937_64 rng(11);
  auto obs = random_observations(rng, 5, 0.1);
  for (ObservationPair& o : obs) o.noise.r_rb = Mat3::Zero();
  const Rotation a = random_rotation(rng);
  const Mat6 p_f = joint_covariance(a, obs);
  const auto uncorrelated = observation_estimate_covariances(a, obs, p_f);
  const auto correlated = observation_estimate_covariances_correlated(a, obs, p_f);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_LE(rel(uncorrelated[i].p_b, correlated[i].p_b), 1e-12);
    EXPECT_LE(rel(uncorrelated[i].p_r, correlated[i].p_r), 1e-12);
  }
}

TEST(ObservationEstimateCovariances, VanishWithNoise) {
  const auto obs = paper_draw(12);
  std::vector<ObservationPair> tiny = obs;
  for (ObservationPair& o : tiny) o.noise = o.noise.scaled(1e-20);
  const Rotation a = Rotation::identity();
  const auto base = observation_estimate_covariances(a, obs, joint_covariance(a, obs));
  const auto scaled = observation_estimate_covariances(a, tiny, joint_covariance(a, tiny));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_LE(rel(scaled[i].p_b, 1e-20 * base[i].p_b), 1e-12);
    EXPECT_LE(scaled[i].p_r.norm(), 1e-25);
  }
}

TEST(CovarianceReport, MatchesLinearizedEstimatorAtTruth) {
  const Scenario s = paper_scenario();
  const Linearized lin = linearized_covariances(s, 1e-7);
  const CovarianceReport c = covariance_report(s.truth, s.noiseless_observations());
  EXPECT_LE(rel(c.p_delta_alpha, lin.attitude), 1e-5);
  EXPECT_LE(rel(c.cov_p, lin.translation), 1e-5);
  const auto cross = attitude_noise_cross_covariances(s.truth.attitude, s.noiseless_observations());
  for (std::size_t i = 0; i < 3; ++i) {
    const ObservationReport& o = c.observations[i];
    EXPECT_LE(rel(o.cov_resid_b, lin.b_residual[i]), 1e-5) << i;
    EXPECT_LE(rel(o.cov_resid_r, lin.r_residual[i]), 1e-5) << i;
    EXPECT_LE(rel(o.p_b_correlated, lin.b_estimate[i]), 1e-5) << i;
    EXPECT_LE(rel(o.p_r_correlated, lin.r_estimate[i]), 1e-5) << i;
    EXPECT_LE(rel(cross[i], lin.attitude_noise_cross[i]), 1e-5) << i;
    // The form neglecting R_rb in the cross terms does not describe this data.
    EXPECT_GT(rel(o.p_b, lin.b_estimate[i]), 1e-2) << i;
  }
}

TEST(CovarianceReport, SymmetricPositiveSemidefinite) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto obs = paper_draw(seed);
    const PoseEstimate e = solve_pose(obs);
    const CovarianceReport c = covariance_report(e.pose, obs);
    auto check = [](const Mat3& m) {
      EXPECT_LE((m - m.transpose()).norm(), 1e-10 * m.norm());
      EXPECT_GE(min_eigenvalue(m), -1e-10 * m.norm());
    };
    check(c.p_delta_alpha);
    check(c.cov_p);
    EXPECT_LE((c.p_f - c.p_f.transpose()).norm(), 1e-10 * c.p_f.norm());
    for (const ObservationReport& o : c.observations) {
      check(o.cov_resid_b);
      check(o.cov_resid_r);
      check(o.p_b_correlated);
      check(o.p_r_correlated);
    }
    EXPECT_LE(rel(Mat3(c.p_f.topLeftCorner<3, 3>()), c.p_delta_alpha), 1e-9);
    EXPECT_LE(rel(Mat3(c.p_f.bottomRightCorner<3, 3>()), c.cov_p), 1e-9);
  }
}

}  // namespace
}  // namespace tlspose
