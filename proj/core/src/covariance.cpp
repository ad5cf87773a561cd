#include "tlspose/covariance.hpp"

#include "tlspose/errors.hpp"

namespace tlspose {

namespace {

using Mat36 = Eigen::Matrix<double, 3, 6>;

Mat3 symmetrized(const Mat3& m) { return 0.5 * (m + m.transpose()); }
Mat6 symmetrized(const Mat6& m) { return 0.5 * (m + m.transpose()); }

Mat3 inverse_spd(const Mat3& m, const char* what) {
  const Eigen::LLT<Mat3> llt(m);
  if (!m.allFinite() || llt.info() != Eigen::Success) {
    throw DegenerateGeometryError(what);
  }
  return symmetrized(Mat3(llt.solve(Mat3::Identity())));
}

Mat36 design_block(const Mat3& lever) {
  Mat36 g;
  g << lever, -Mat3::Identity();
  return g;
}

// Per-pair quantities shared by the residual and estimate covariances.
struct PairTerms {
  Mat3 c;          // (R_rb^T A^T - R_b) Q^-1
  Mat3 d;          // (R_r A^T - R_rb) Q^-1
  Mat3 projected;  // G P G^T
  Mat3 q;
  Mat3 info;
};

std::vector<PairTerms> pair_terms(const Rotation& a, Observations obs, const Mat6& p_f) {
  const Mat3& am = a.matrix();
  std::vector<PairTerms> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const NoiseModel& n = obs[i].noise;
    const ResidualWeight w = residual_weight(a, n, i);
    const Mat36 g = design_block(cross_matrix(a * obs[i].r_tilde));
    out.push_back(PairTerms{
        (n.r_rb.transpose() * am.transpose() - n.r_b) * w.info,
        (n.r_r * am.transpose() - n.r_rb) * w.info,
        symmetrized(Mat3(g * p_f * g.transpose())),
        w.q,
        w.info,
    });
  }
  return out;
}

std::vector<EstimateCovariance> estimate_covariances(const Rotation& a,
                                                     Observations obs,
                                                     const Mat6& p_f,
                                                     bool with_cross_sensor_terms) {
  const Mat3& am = a.matrix();
  const std::vector<PairTerms> terms = pair_terms(a, obs, p_f);
  std::vector<EstimateCovariance> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const NoiseModel& n = obs[i].noise;
    const PairTerms& t = terms[i];
    const Mat3 remaining = t.q - t.projected;
    const Mat3 filter = Mat3::Identity() - t.projected * t.info;

    Mat3 b_noise = n.r_b;               // E{Delta_a Delta_b^T}
    Mat3 r_noise = -am * n.r_r;         // E{Delta_a Delta_r^T}
    if (with_cross_sensor_terms) {
      b_noise -= am * n.r_rb;
      r_noise += n.r_rb.transpose();
    }
    const Mat3 cross_b = t.c * filter * b_noise;
    const Mat3 cross_r = t.d * filter * r_noise;
    out.push_back(EstimateCovariance{
        symmetrized(Mat3(n.r_b + t.c * remaining * t.c.transpose() + cross_b +
                         cross_b.transpose())),
        symmetrized(Mat3(n.r_r + t.d * remaining * t.d.transpose() + cross_r +
                         cross_r.transpose())),
    });
  }
  return out;
}

}  // namespace

Fim Fim::from_blocks(const Mat3& f11, const Mat3& f12, const Mat3& f21,
                     const Mat3& f22) {
  Fim out{Mat6::Zero(), f11, f12, f21, f22};
  out.f << f11, f12, f21, f22;
  return out;
}

Mat3 attitude_covariance(const Rotation& a, Observations obs) {
  return inverse_spd(linearize(a, obs).hessian,
                     "attitude Hessian is singular; observations do not fix the attitude");
}

Mat3 translation_covariance(const Rotation& a, Observations obs,
                            const Mat3& p_delta_alpha) {
  const Linearization lin = linearize(a, obs);
  return symmetrized(Mat3(lin.s_lambda + lin.a_bar * p_delta_alpha * lin.a_bar.transpose()));
}

Fim fim(const Rotation& a, Observations obs) {
  Mat3 f11 = Mat3::Zero();
  Mat3 f21 = Mat3::Zero();
  Mat3 f22 = Mat3::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Mat3 info = residual_weight(a, obs[i].noise, i).info;
    const Mat3 lever = cross_matrix(a * obs[i].r_tilde);
    f11 += lever.transpose() * info * lever;
    f21 -= info * lever;
    f22 += info;
  }
  return Fim::from_blocks(symmetrized(f11), f21.transpose(), f21, symmetrized(f22));
}

Mat6 joint_covariance(const Rotation& a, Observations obs) {
  Mat6 information = Mat6::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Mat3 info = residual_weight(a, obs[i].noise, i).info;
    const Mat36 g = design_block(cross_matrix(a * obs[i].r_tilde));
    information += g.transpose() * info * g;
  }
  const Eigen::LLT<Mat6> llt(information);
  if (!information.allFinite() || llt.info() != Eigen::Success) {
    throw DegenerateGeometryError("pose information matrix is singular");
  }
  return symmetrized(Mat6(llt.solve(Mat6::Identity())));
}

FimInverseBlocks fim_inverse_blocks(const Fim& f) {
  const Mat3 f22_inv = inverse_spd(f.f22, "information block F22 is singular");
  const Mat3 f11_inv = inverse_spd(f.f11, "information block F11 is singular");
  return FimInverseBlocks{
      inverse_spd(symmetrized(Mat3(f.f11 - f.f12 * f22_inv * f.f21)),
                  "attitude Schur complement is singular"),
      inverse_spd(symmetrized(Mat3(f.f22 - f.f21 * f11_inv * f.f12)),
                  "translation Schur complement is singular"),
  };
}

std::vector<ObservationEstimate> estimate_observations(const Pose& pose,
                                                      Observations obs) {
  const Mat3& am = pose.attitude.matrix();
  std::vector<ObservationEstimate> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const NoiseModel& n = obs[i].noise;
    const ResidualWeight w = residual_weight(pose.attitude, n, i);
    const Vec3 weighted = w.llt.solve(residual(pose, obs[i]));
    out.push_back(ObservationEstimate{
        obs[i].b_tilde + (n.r_rb.transpose() * am.transpose() - n.r_b) * weighted,
        obs[i].r_tilde + (n.r_r * am.transpose() - n.r_rb) * weighted,
    });
  }
  return out;
}

std::vector<ResidualCovariance> residual_covariances(const Rotation& a,
                                                     Observations obs,
                                                     const Mat6& p_f) {
  const std::vector<PairTerms> terms = pair_terms(a, obs, p_f);
  std::vector<ResidualCovariance> out;
  out.reserve(obs.size());
  for (const PairTerms& t : terms) {
    const Mat3 remaining = t.q - t.projected;
    out.push_back(ResidualCovariance{
        symmetrized(Mat3(t.c * remaining * t.c.transpose())),
        symmetrized(Mat3(t.d * remaining * t.d.transpose())),
    });
  }
  return out;
}

std::vector<EstimateCovariance> observation_estimate_covariances(
    const Rotation& a, Observations obs, const Mat6& p_f) {
  return estimate_covariances(a, obs, p_f, false);
}

std::vector<EstimateCovariance> observation_estimate_covariances_correlated(
    const Rotation& a, Observations obs, const Mat6& p_f) {
  return estimate_covariances(a, obs, p_f, true);
}

std::vector<Mat3> attitude_noise_cross_covariances(const Rotation& a,
                                                   Observations obs) {
  const Linearization lin = linearize(a, obs);
  const Mat3 p = inverse_spd(lin.hessian,
                             "attitude Hessian is singular; observations do not fix the attitude");
  std::vector<Mat3> out;
  out.reserve(obs.size());
  for (const Mat3& lever : lin.lever) {
    out.push_back(p * (lever - lin.a_bar).transpose());
  }
  return out;
}

CovarianceReport covariance_report(const Pose& pose, Observations obs) {
  const Rotation& a = pose.attitude;
  const Linearization lin = linearize(a, obs);

  CovarianceReport report;
  report.p_delta_alpha = inverse_spd(
      lin.hessian, "attitude Hessian is singular; observations do not fix the attitude");
  report.a_bar = lin.a_bar;
  report.s_lambda = lin.s_lambda;
  report.cov_p = symmetrized(
      Mat3(lin.s_lambda + lin.a_bar * report.p_delta_alpha * lin.a_bar.transpose()));
  report.p_f = joint_covariance(a, obs);

  const std::vector<ObservationEstimate> estimates = estimate_observations(pose, obs);
  const std::vector<ResidualCovariance> residuals = residual_covariances(a, obs, report.p_f);
  const std::vector<EstimateCovariance> neglected =
      observation_estimate_covariances(a, obs, report.p_f);
  const std::vector<EstimateCovariance> correlated =
      observation_estimate_covariances_correlated(a, obs, report.p_f);

  report.observations.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    report.observations.push_back(ObservationReport{
        estimates[i].b_hat, estimates[i].r_hat, residuals[i].b, residuals[i].r,
        neglected[i].p_b, neglected[i].p_r, correlated[i].p_b, correlated[i].p_r});
  }
  return report;
}

}  // namespace tlspose
