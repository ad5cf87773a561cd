#ifndef TLSPOSE_SIMULATE_HPP
#define TLSPOSE_SIMULATE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tlspose/covariance.hpp"
#include "tlspose/solver.hpp"

namespace tlspose {

using Rng = std::mt19937_64;

/// Which frame a given landmark coordinate lives in.
enum class Side { body, reference };

/// A landmark specified on one side; the other side follows from the truth pose.
struct Landmark {
  Side given = Side::body;
  Vec3 value = Vec3::Zero();
};

/// Error-free pair (r, b) with b = A r - p.
struct TruePair {
  Vec3 r;
  Vec3 b;
};

struct Scenario {
  std::string name;
  Pose truth;
  std::vector<Landmark> landmarks;
  std::vector<NoiseModel> noise;

  /// Throws std::invalid_argument for mismatched lists or fewer than three
  /// landmarks, InvalidNoiseModelError for a bad covariance.
  void validate() const;

  std::vector<TruePair> true_pairs() const;

  /// The true pairs with their noise models and no measurement error.
  std::vector<ObservationPair> noiseless_observations() const;
};

/// Given b returns r = A^T (b + p); given r returns b = A r - p.
Vec3 derive_counterpart(const Pose& truth, const Vec3& v, Side given);

/// Three-landmark scenario with A = I, p = (0.3, -0.4, 0.5) m and fully
/// populated 6x6 covariances of order 1e-7 m^2.
Scenario paper_scenario();

/// Draws [dr; db] = L z with z ~ N(0, I6) and L the lower Cholesky factor of
/// the joint covariance.
class CorrelatedGaussian {
 public:
  /// Throws InvalidNoiseModelError if the joint covariance is not positive definite.
  explicit CorrelatedGaussian(const NoiseModel& noise);

  Vec6 operator()(Rng& rng) const;
  const Mat6& factor() const noexcept { return l_; }

 private:
  Mat6 l_;
};

struct NoiseSample {
  Vec3 delta_r;
  Vec3 delta_b;
};

NoiseSample sample_noise(const NoiseModel& noise, Rng& rng);

/// splitmix64 finalizer over (seed, index); the seed of one trial's generator.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// One noisy measurement set drawn from the scenario.
std::vector<ObservationPair> draw_observations(const Scenario& scenario, Rng& rng);

/// Random rotation, p uniform in [-1, 1]^3, landmarks with N(0, 1)
/// components and random positive definite covariances whose mean diagonal
/// equals (snr * rms |b|)^2.
Scenario random_scenario(int n, double snr, std::uint64_t seed);

/// Per-pair errors recorded for one trial.
struct PairErrors {
  Vec3 b_estimate;  // b^ - b
  Vec3 r_estimate;  // r^ - r
  Vec3 b_residual;  // b^ - b~
  Vec3 r_residual;  // r^ - r~
  Vec3 combined_noise;  // Delta_b - A Delta_r
};

struct TrialRecord {
  std::size_t trial = 0;
  Vec3 delta_alpha = Vec3::Zero();  // rad, A^ = exp(-[delta_alpha x]) A
  Vec3 rpy_error_deg = Vec3::Zero();  // roll, pitch, yaw of A A^T
  Vec3 delta_p = Vec3::Zero();
  std::vector<PairErrors> pairs;
  int iterations = 0;
};

/// One 3-vector error quantity tracked across trials.
struct QuantityStatistics {
  std::string name;
  Vec3 mean = Vec3::Zero();
  Mat3 empirical = Mat3::Zero();           // about the sample mean, N - 1 normalization
  Mat3 analytic_truth = Mat3::Zero();
  Mat3 analytic_estimate = Mat3::Zero();
  Vec3 containment = Vec3::Zero();          // fraction with |x_k| <= 3 sqrt(analytic_truth_kk)
};

/// Sample E{delta_alpha Delta_a_i^T} against its first-order prediction.
struct CrossCovarianceCheck {
  Mat3 empirical = Mat3::Zero();
  Mat3 standard_error = Mat3::Zero();
  Mat3 analytic = Mat3::Zero();
};

struct MonteCarloReport {
  std::string scenario;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<TrialRecord> records;  // converged trials, by trial index
  std::vector<std::size_t> diverged;  // indices of excluded trials
  std::vector<QuantityStatistics> quantities;
  std::vector<CrossCovarianceCheck> cross_covariance;  // one per pair
  CovarianceReport analytic_truth;
  CovarianceReport analytic_estimate;

  const QuantityStatistics& quantity(const std::string& name) const;
};

/// Names used in MonteCarloReport::quantities.
std::string quantity_name_attitude();
std::string quantity_name_translation();
std::string quantity_name_pair(const char* kind, std::size_t index);  // kind: b_est, r_est, b_res, r_res

/// Trials draw from generators seeded by substream_seed(seed, trial).
/// Trials whose solver does not converge or throws are counted in
/// `diverged` and left out of every statistic.
MonteCarloReport run_monte_carlo(const Scenario& scenario, std::size_t trials,
                                 std::uint64_t seed, const SolverConfig& config = {});

}  // namespace tlspose

#endif  // TLSPOSE_SIMULATE_HPP
