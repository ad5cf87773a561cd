#include "tlspose/simulate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

#include "tlspose/errors.hpp"

namespace tlspose {

namespace {

Mat6 builtin_covariance(std::initializer_list<double> micro) {
  Mat6 m;
  auto it = micro.begin();
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) m(r, c) = 1e-6 * *it++;
  }
  return m;
}

double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist;
  return dist(rng);
}

// Streaming sums for one 3-vector quantity.
struct Moments {
  Vec3 sum = Vec3::Zero();
  Mat3 outer = Mat3::Zero();
  Vec3 inside = Vec3::Zero();

  void add(const Vec3& x, const Vec3& bound) {
    sum += x;
    outer += x * x.transpose();
    for (int k = 0; k < 3; ++k) {
      if (std::abs(x(k)) <= bound(k)) inside(k) += 1.0;
    }
  }
};

Vec3 three_sigma(const Mat3& cov) { return 3.0 * cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }

}  // namespace

void Scenario::validate() const {
  if (landmarks.size() != noise.size()) {
    throw std::invalid_argument("scenario landmark and covariance lists differ in length");
  }
  if (landmarks.size() < 3) {
    throw std::invalid_argument("scenario needs at least three landmarks");
  }
  for (const NoiseModel& n : noise) n.validate();
}

std::vector<TruePair> Scenario::true_pairs() const {
  std::vector<TruePair> out;
  out.reserve(landmarks.size());
  for (const Landmark& l : landmarks) {
    const Vec3 other = derive_counterpart(truth, l.value, l.given);
    out.push_back(l.given == Side::body ? TruePair{other, l.value} : TruePair{l.value, other});
  }
  return out;
}

std::vector<ObservationPair> Scenario::noiseless_observations() const {
  const std::vector<TruePair> pairs = true_pairs();
  std::vector<ObservationPair> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.push_back(ObservationPair{pairs[i].r, pairs[i].b, noise[i]});
  }
  return out;
}

Vec3 derive_counterpart(const Pose& truth, const Vec3& v, Side given) {
  if (given == Side::body) {
    return truth.attitude.transpose() * (v + truth.p);
  }
  return truth.attitude * v - truth.p;
}

Scenario paper_scenario() {
  Scenario s;
  s.name = "paper";
  s.truth = Pose{Rotation::identity(), Vec3(0.3, -0.4, 0.5)};
  s.landmarks = {
      {Side::body, Vec3(0.0, 9.7590e-2, -1.4833e-1)},
      {Side::body, Vec3(0.0, 1.9518e-1, -1.2855e-2)},
      {Side::body, Vec3(1.0, 9.7590e-1, 9.8885e-1)},
  };
  s.noise = {
      NoiseModel::from_joint(builtin_covariance({
          0.1902, 0.0228, -0.0190, -0.0345, -0.0079, 0.0225,
          0.0228, 0.2288, -0.0003, 0.0145, 0.0483, -0.0161,
          -0.0190, -0.0003, 0.3554, 0.0765, -0.0180, 0.1386,
          -0.0345, 0.0145, 0.0765, 0.2566, -0.0201, 0.0408,
          -0.0079, 0.0483, -0.0180, -0.0201, 0.2621, -0.0800,
          0.0225, -0.0161, 0.1386, 0.0408, -0.0800, 0.3349})),
      NoiseModel::from_joint(builtin_covariance({
          0.1981, 0.0213, 0.0021, -0.0519, -0.0218, -0.0231,
          0.0213, 0.1980, -0.0264, 0.0023, -0.0116, 0.0030,
          0.0021, -0.0264, 0.2040, -0.0456, 0.0273, -0.0152,
          -0.0519, 0.0023, -0.0456, 0.2481, 0.0025, 0.0258,
          -0.0218, -0.0116, 0.0273, 0.0025, 0.1933, 0.0069,
          -0.0231, 0.0030, -0.0152, 0.0258, 0.0069, 0.1851})),
      NoiseModel::from_joint(builtin_covariance({
          0.1705, -0.0071, -0.0154, -0.0247, 0.0081, 0.0049,
          -0.0071, 0.2036, 0.0038, 0.0259, -0.0311, 0.0064,
          -0.0154, 0.0038, 0.1910, 0.0376, 0.0085, 0.0166,
          -0.0247, 0.0259, 0.0376, 0.2738, -0.0153, 0.0170,
          0.0081, -0.0311, 0.0085, -0.0153, 0.1850, -0.0114,
          0.0049, 0.0064, 0.0166, 0.0170, -0.0114, 0.2049})),
  };
  return s;
}

CorrelatedGaussian::CorrelatedGaussian(const NoiseModel& noise) {
  const Mat6 joint = noise.joint();
  const Eigen::LLT<Mat6> llt(joint);
  if (!joint.allFinite() || llt.info() != Eigen::Success) {
    throw InvalidNoiseModelError("noise covariance is not positive definite");
  }
  l_ = llt.matrixL();
}

Vec6 CorrelatedGaussian::operator()(Rng& rng) const {
  Vec6 z;
  for (int k = 0; k < 6; ++k) z(k) = standard_normal(rng);
  return l_ * z;
}

NoiseSample sample_noise(const NoiseModel& noise, Rng& rng) {
  const Vec6 x = CorrelatedGaussian(noise)(rng);
  return NoiseSample{x.head<3>(), x.tail<3>()};
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<ObservationPair> draw_observations(const Scenario& scenario, Rng& rng) {
  std::vector<ObservationPair> obs = scenario.noiseless_observations();
  for (ObservationPair& o : obs) {
    const NoiseSample s = sample_noise(o.noise, rng);
    o.r_tilde += s.delta_r;
    o.b_tilde += s.delta_b;
  }
  return obs;
}

Scenario random_scenario(int n, double snr, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("random_scenario needs n >= 3");
  if (!(snr > 0.0)) throw std::invalid_argument("random_scenario needs snr > 0");
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  Scenario s;
  s.name = "random";
  Eigen::Quaterniond q(standard_normal(rng), standard_normal(rng), standard_normal(rng),
                       standard_normal(rng));
  q.normalize();
  const Rotation attitude = project_to_rotation(q.toRotationMatrix());
  Vec3 p;
  for (int k = 0; k < 3; ++k) p(k) = uniform(rng);
  s.truth = Pose{attitude, p};

  double norm_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec3 b;
    for (int k = 0; k < 3; ++k) b(k) = standard_normal(rng);
    norm_sq += b.squaredNorm();
    s.landmarks.push_back({Side::body, b});
  }
  const double target_variance = snr * snr * norm_sq / n;

  for (int i = 0; i < n; ++i) {
    Mat6 m;
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 6; ++c) m(r, c) = standard_normal(rng);
    }
    Mat6 cov = m * m.transpose();
    cov += 1e-2 * (cov.trace() / 6.0) * Mat6::Identity();
    cov *= target_variance / (cov.trace() / 6.0);
    s.noise.push_back(NoiseModel::from_joint(0.5 * (cov + cov.transpose())));
  }
  return s;
}

const QuantityStatistics& MonteCarloReport::quantity(const std::string& name) const {
  for (const QuantityStatistics& q : quantities) {
    if (q.name == name) return q;
  }
  throw std::out_of_range("unknown Monte-Carlo quantity: " + name);
}

std::string quantity_name_attitude() { return "delta_alpha"; }
std::string quantity_name_translation() { return "delta_p"; }
std::string quantity_name_pair(const char* kind, std::size_t index) {
  return std::string(kind) + std::to_string(index + 1);
}

MonteCarloReport run_monte_carlo(const Scenario& scenario, std::size_t trials,
                                 std::uint64_t seed, const SolverConfig& config) {
  scenario.validate();
  config.validate();
  const std::vector<TruePair> truth_pairs = scenario.true_pairs();
  const std::vector<ObservationPair> noiseless = scenario.noiseless_observations();
  const std::size_t n = truth_pairs.size();
  const Rotation& a_true = scenario.truth.attitude;

  MonteCarloReport report;
  report.scenario = scenario.name;
  report.trials = trials;
  report.seed = seed;
  report.analytic_truth = covariance_report(scenario.truth, noiseless);

  std::vector<CorrelatedGaussian> samplers;
  samplers.reserve(n);
  for (const NoiseModel& m : scenario.noise) samplers.emplace_back(m);

  Mat3 attitude_sum = Mat3::Zero();
  std::vector<Vec3> r_tilde_sum(n, Vec3::Zero());
  std::vector<Vec3> b_tilde_sum(n, Vec3::Zero());

  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(substream_seed(seed, t));
    std::vector<ObservationPair> obs = noiseless;
    std::vector<Vec3> combined(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec6 x = samplers[i](rng);
      obs[i].r_tilde += x.head<3>();
      obs[i].b_tilde += x.tail<3>();
      combined[i] = x.tail<3>() - a_true * Vec3(x.head<3>());
    }

    PoseEstimate est;
    try {
      est = solve_pose(obs, config);
    } catch (const Error&) {
      report.diverged.push_back(t);
      continue;
    }
    if (!est.diagnostics.converged) {
      report.diverged.push_back(t);
      continue;
    }

    const Rotation& a_hat = est.pose.attitude;
    TrialRecord rec;
    rec.trial = t;
    rec.delta_alpha = -so3_log(a_hat * a_true.transpose());
    rec.rpy_error_deg = roll_pitch_yaw(a_true * a_hat.transpose()) * (180.0 / std::numbers::pi);
    rec.delta_p = est.pose.p - scenario.truth.p;
    rec.iterations = est.diagnostics.iterations;

    const std::vector<ObservationEstimate> hats = estimate_observations(est.pose, obs);
    rec.pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      rec.pairs.push_back(PairErrors{
          hats[i].b_hat - truth_pairs[i].b,
          hats[i].r_hat - truth_pairs[i].r,
          hats[i].b_hat - obs[i].b_tilde,
          hats[i].r_hat - obs[i].r_tilde,
          combined[i],
      });
      r_tilde_sum[i] += obs[i].r_tilde;
      b_tilde_sum[i] += obs[i].b_tilde;
    }
    attitude_sum += a_hat.matrix();
    report.records.push_back(std::move(rec));
  }

  const std::size_t used = report.records.size();
  if (used == 0) return report;
  const double count = static_cast<double>(used);

  std::vector<ObservationPair> mean_obs = noiseless;
  for (std::size_t i = 0; i < n; ++i) {
    mean_obs[i].r_tilde = r_tilde_sum[i] / count;
    mean_obs[i].b_tilde = b_tilde_sum[i] / count;
  }
  const Rotation mean_attitude = project_to_rotation(attitude_sum / count);
  const Pose mean_pose{mean_attitude, optimal_translation(mean_attitude, mean_obs).p_hat};
  report.analytic_estimate = covariance_report(mean_pose, mean_obs);

  // Quantity layout: attitude, translation, then per pair b_est, r_est, b_res, r_res.
  const CovarianceReport& at = report.analytic_truth;
  const CovarianceReport& ae = report.analytic_estimate;
  struct Spec {
    std::string name;
    Mat3 truth;
    Mat3 estimate;
  };
  std::vector<Spec> specs{{quantity_name_attitude(), at.p_delta_alpha, ae.p_delta_alpha},
                          {quantity_name_translation(), at.cov_p, ae.cov_p}};
  for (std::size_t i = 0; i < n; ++i) {
    const ObservationReport& ot = at.observations[i];
    const ObservationReport& oe = ae.observations[i];
    specs.push_back({quantity_name_pair("b_est", i), ot.p_b_correlated, oe.p_b_correlated});
    specs.push_back({quantity_name_pair("r_est", i), ot.p_r_correlated, oe.p_r_correlated});
    specs.push_back({quantity_name_pair("b_res", i), ot.cov_resid_b, oe.cov_resid_b});
    specs.push_back({quantity_name_pair("r_res", i), ot.cov_resid_r, oe.cov_resid_r});
  }

  std::vector<Moments> moments(specs.size());
  std::vector<Vec3> bounds;
  bounds.reserve(specs.size());
  for (const Spec& s : specs) bounds.push_back(three_sigma(s.truth));

  std::vector<Mat3> cross_sum(n, Mat3::Zero());
  std::vector<Mat3> cross_sq(n, Mat3::Zero());
  for (const TrialRecord& rec : report.records) {
    moments[0].add(rec.delta_alpha, bounds[0]);
    moments[1].add(rec.delta_p, bounds[1]);
    for (std::size_t i = 0; i < n; ++i) {
      const PairErrors& e = rec.pairs[i];
      const std::size_t base = 2 + 4 * i;
      moments[base].add(e.b_estimate, bounds[base]);
      moments[base + 1].add(e.r_estimate, bounds[base + 1]);
      moments[base + 2].add(e.b_residual, bounds[base + 2]);
      moments[base + 3].add(e.r_residual, bounds[base + 3]);
      const Mat3 product = rec.delta_alpha * e.combined_noise.transpose();
      cross_sum[i] += product;
      cross_sq[i] += product.cwiseProduct(product);
    }
  }

  for (std::size_t q = 0; q < specs.size(); ++q) {
    QuantityStatistics stats;
    stats.name = specs[q].name;
    stats.mean = moments[q].sum / count;
    stats.empirical = used > 1 ? Mat3((moments[q].outer - count * stats.mean * stats.mean.transpose()) /
                                      (count - 1.0))
                               : Mat3::Zero();
    stats.analytic_truth = specs[q].truth;
    stats.analytic_estimate = specs[q].estimate;
    stats.containment = moments[q].inside / count;
    report.quantities.push_back(std::move(stats));
  }

  const std::vector<Mat3> cross_analytic = attitude_noise_cross_covariances(a_true, noiseless);
  for (std::size_t i = 0; i < n; ++i) {
    CrossCovarianceCheck c;
    c.empirical = cross_sum[i] / count;
    const Mat3 variance = (cross_sq[i] / count - c.empirical.cwiseProduct(c.empirical)).cwiseMax(0.0);
    c.standard_error = (variance / count).cwiseSqrt();
    c.analytic = cross_analytic[i];
    report.cross_covariance.push_back(c);
  }
  return report;
}

}  // namespace tlspose
