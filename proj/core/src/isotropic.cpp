#include "tlspose/isotropic.hpp"

#include <cmath>

#include "tlspose/errors.hpp"

namespace tlspose {

namespace {

void check_sizes(Observations obs, IsotropicNoiseList noise) {
  if (obs.size() != noise.size()) {
    throw std::invalid_argument("observation and noise lists differ in length");
  }
  if (obs.empty()) {
    throw DegenerateGeometryError("no observations");
  }
  for (const IsotropicNoise& n : noise) n.validate();
}

Mat3 inverse_spd(const Mat3& m) {
  const Eigen::LLT<Mat3> llt(m);
  if (!m.allFinite() || llt.info() != Eigen::Success) {
    throw DegenerateGeometryError("attitude Hessian is singular; observations do not fix the attitude");
  }
  const Mat3 inv = llt.solve(Mat3::Identity());
  return 0.5 * (inv + inv.transpose());
}

Mat6 information_matrix(const Rotation& a, Observations obs, IsotropicNoiseList noise) {
  Mat6 f = Mat6::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double w = 1.0 / (noise[i].sigma() * noise[i].sigma());
    const Mat3 lever = cross_matrix(a * obs[i].r_tilde);
    Mat6 block;
    block << -lever * lever, lever, lever.transpose(), Mat3::Identity();
    f += w * block;
  }
  return f;
}

Mat6 inverse_information(const Rotation& a, Observations obs, IsotropicNoiseList noise) {
  const Mat6 f = information_matrix(a, obs, noise);
  const Eigen::LLT<Mat6> llt(f);
  if (llt.info() != Eigen::Success) {
    throw DegenerateGeometryError("pose information matrix is singular");
  }
  const Mat6 inv = llt.solve(Mat6::Identity());
  return 0.5 * (inv + inv.transpose());
}

Mat3 projected(const Rotation& a, const Vec3& r_tilde, const Mat6& p_f) {
  Eigen::Matrix<double, 3, 6> g;
  g << cross_matrix(a * r_tilde), -Mat3::Identity();
  return g * p_f * g.transpose();
}

// Residual and estimate covariances for one pair with explicit coefficient
// exponents, so the consistent and unreconciled variants share one body.
struct Exponents {
  int residual;       // power of sigma_b (sigma_r) in the residual prefactor
  int cross;          // power of sigma_b (sigma_r) in the estimate cross terms
  bool last_r_uses_b;  // last r cross term scaled by sigma_b instead of sigma_r
};

void pair_covariances(const Mat3& am, const Mat3& gpg, const IsotropicNoise& n,
                      const Exponents& ex, ResidualCovariance& resid,
                      EstimateCovariance& est) {
  const double sb = n.sigma_b;
  const double sr = n.sigma_r;
  const double s2 = sb * sb + sr * sr;
  const double s4 = s2 * s2;
  const Mat3 remaining = s2 * Mat3::Identity() - gpg;
  const Mat3 gpg_t = gpg.transpose();

  resid.b = std::pow(sb, ex.residual) / s4 * remaining;
  resid.r = std::pow(sr, ex.residual) / s4 * (am.transpose() * remaining * am);

  const double cb = std::pow(sb, ex.cross);
  const double cr = std::pow(sr, ex.cross);
  const double cr_last = ex.last_r_uses_b ? cb : cr;
  est.p_b = sb * sb * Mat3::Identity() + resid.b - 2.0 * cb / s2 * Mat3::Identity() +
            cb / s4 * gpg + cb / s4 * gpg_t;
  est.p_r = sr * sr * Mat3::Identity() + resid.r - 2.0 * cr / s2 * Mat3::Identity() +
            cr / s4 * (am.transpose() * gpg * am) +
            cr_last / s4 * (am.transpose() * gpg_t * am);
}

}  // namespace

double IsotropicNoise::sigma() const { return std::sqrt(sigma_r * sigma_r + sigma_b * sigma_b); }

NoiseModel IsotropicNoise::noise_model() const { return NoiseModel::isotropic(sigma_r, sigma_b); }

void IsotropicNoise::validate() const {
  if (!(std::isfinite(sigma_r) && std::isfinite(sigma_b) && sigma_r > 0.0 && sigma_b > 0.0)) {
    throw InvalidNoiseModelError("isotropic deviations must be finite and positive");
  }
}

double total_information(IsotropicNoiseList noise) {
  double total = 0.0;
  for (const IsotropicNoise& n : noise) total += 1.0 / (n.sigma() * n.sigma());
  return total;
}

WeightedCentroids weighted_centroids(Observations obs, IsotropicNoiseList noise) {
  check_sizes(obs, noise);
  const double total = total_information(noise);
  WeightedCentroids c{Vec3::Zero(), Vec3::Zero()};
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double w = 1.0 / (noise[i].sigma() * noise[i].sigma());
    c.b += w * obs[i].b_tilde;
    c.r += w * obs[i].r_tilde;
  }
  c.b /= total;
  c.r /= total;
  return c;
}

double isotropic_cost(const Rotation& a, Observations obs, IsotropicNoiseList noise) {
  check_sizes(obs, noise);
  // The two terms nearly cancel at small noise; accumulate in extended precision.
  using Vec3x = Eigen::Matrix<long double, 3, 1>;
  const Eigen::Matrix<long double, 3, 3> ax = a.matrix().cast<long double>();
  long double total = 0.0L;
  long double spread = 0.0L;
  Vec3x b_sum = Vec3x::Zero();
  Vec3x r_sum = Vec3x::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const long double sigma = noise[i].sigma();
    const long double w = 1.0L / (sigma * sigma);
    const Vec3x b = obs[i].b_tilde.cast<long double>();
    const Vec3x r = obs[i].r_tilde.cast<long double>();
    total += w;
    spread += w * (b - ax * r).squaredNorm();
    b_sum += w * b;
    r_sum += w * r;
  }
  const Vec3x centroid_gap = (b_sum - ax * r_sum) / total;
  return static_cast<double>(0.5L * spread - 0.5L * total * centroid_gap.squaredNorm());
}

Mat3 isotropic_hessian(const Rotation& a, Observations obs, IsotropicNoiseList noise) {
  check_sizes(obs, noise);
  const double total = total_information(noise);
  Mat3 curvature = Mat3::Zero();
  Mat3 lever_mean = Mat3::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double w = 1.0 / (noise[i].sigma() * noise[i].sigma());
    const Mat3 lever = cross_matrix(a * obs[i].r_tilde);
    curvature -= w * lever * lever;
    lever_mean += w * lever;
  }
  lever_mean /= total;
  const Mat3 h = curvature + total * lever_mean * lever_mean;
  return 0.5 * (h + h.transpose());
}

CovarianceReport isotropic_covariances(const Rotation& a, Observations obs,
                                       IsotropicNoiseList noise) {
  check_sizes(obs, noise);
  const Mat3& am = a.matrix();
  const double total = total_information(noise);
  const WeightedCentroids c = weighted_centroids(obs, noise);

  CovarianceReport report;
  Mat3 lever_mean = Mat3::Zero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double w = 1.0 / (noise[i].sigma() * noise[i].sigma());
    lever_mean += w * cross_matrix(a * obs[i].r_tilde);
  }
  lever_mean /= total;

  report.p_delta_alpha = inverse_spd(isotropic_hessian(a, obs, noise));
  report.a_bar = lever_mean;
  report.s_lambda = Mat3::Identity() / total;
  const Mat3 cov_p = report.s_lambda - lever_mean * report.p_delta_alpha * lever_mean;
  report.cov_p = 0.5 * (cov_p + cov_p.transpose());
  report.p_f = inverse_information(a, obs, noise);

  const Vec3 p_hat = a * c.r - c.b;
  const Exponents consistent{4, 4, false};
  report.observations.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const IsotropicNoise& n = noise[i];
    const double s2 = n.sigma() * n.sigma();
    const Vec3 e = obs[i].b_tilde - a * obs[i].r_tilde + p_hat;

    ResidualCovariance resid;
    EstimateCovariance est;
    pair_covariances(am, projected(a, obs[i].r_tilde, report.p_f), n, consistent, resid, est);

    ObservationReport o;
    o.b_hat = obs[i].b_tilde - (n.sigma_b * n.sigma_b / s2) * e;
    o.r_hat = obs[i].r_tilde + (n.sigma_r * n.sigma_r / s2) * (am.transpose() * e);
    o.cov_resid_b = 0.5 * (resid.b + resid.b.transpose());
    o.cov_resid_r = 0.5 * (resid.r + resid.r.transpose());
    o.p_b = 0.5 * (est.p_b + est.p_b.transpose());
    o.p_r = 0.5 * (est.p_r + est.p_r.transpose());
    o.p_b_correlated = o.p_b;
    o.p_r_correlated = o.p_r;
    report.observations.push_back(o);
  }
  return report;
}

UnreconciledIsotropicForms isotropic_unreconciled_forms(const Rotation& a,
                                                        Observations obs,
                                                        IsotropicNoiseList noise) {
  check_sizes(obs, noise);
  const Mat6 p_f = inverse_information(a, obs, noise);
  const Exponents unreconciled{2, 3, true};
  UnreconciledIsotropicForms out;
  out.residuals.resize(obs.size());
  out.estimates.resize(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    pair_covariances(a.matrix(), projected(a, obs[i].r_tilde, p_f), noise[i], unreconciled,
                     out.residuals[i], out.estimates[i]);
  }
  return out;
}

std::vector<ObservationPair> with_isotropic_noise(Observations obs,
                                                  IsotropicNoiseList noise) {
  check_sizes(obs, noise);
  std::vector<ObservationPair> out(obs.begin(), obs.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].noise = noise[i].noise_model();
  return out;
}

}  // namespace tlspose
