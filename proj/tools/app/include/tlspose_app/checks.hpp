#ifndef TLSPOSE_APP_CHECKS_HPP
#define TLSPOSE_APP_CHECKS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tlspose/covariance.hpp"
#include "tlspose/isotropic.hpp"
#include "tlspose/simulate.hpp"

namespace tlspose::app {

// Independent oracles used by the validate command and the test suites.

/// Central differences of the attitude-only cost along apply_error axes,
/// with the residual weights held at a.
Vec3 fd_gradient(const Rotation& a, Observations obs, double h = 1e-6);

/// Central second differences of the attitude-only cost (weights recomputed
/// at every probe) along apply_error axes.
Mat3 fd_hessian(const Rotation& a, Observations obs, double h = 1e-4);

/// Davenport q-method: the rotation minimizing
/// sum w_i |(b_i - b_bar) - A (r_i - r_bar)|^2 with w-weighted centroids.
Rotation weighted_wahba_q_method(Observations obs, std::span<const double> weights);

/// Inverse via full-pivot LU, independent of the Cholesky path.
Mat6 inverse_lu(const Mat6& m);

/// ||a - b||_F / max(||b||_F, floor).
double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1e-300);

/// Worst observed discrepancy of one invariant against its tolerance.
struct CheckResult {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  std::size_t cases = 0;
  std::string detail;  // failing case, if any

  bool passed() const { return worst <= tolerance; }
  double margin() const { return worst > 0.0 ? tolerance / worst : std::numeric_limits<double>::infinity(); }
};

/// Substitutable pieces for mutation testing of the checks themselves.
struct CheckHooks {
  std::function<Fim(const Rotation&, Observations)> fim = tlspose::fim;
};

/// Seed of the k-th case of a suite.
std::uint64_t case_seed(std::uint64_t seed, std::size_t k);

/// Random isotropic noise: sigma_r, sigma_b uniform in [lo, hi].
std::vector<IsotropicNoise> random_isotropic_noise(std::size_t n, double lo, double hi,
                                                   std::uint64_t seed);

/// Analytic g against fd_gradient at the true attitude of a noisy draw.
CheckResult check_gradient(std::uint64_t seed, std::size_t cases);

/// Analytic H against fd_hessian at the noiseless optimum.
CheckResult check_hessian(std::uint64_t seed, std::size_t cases);

/// joint_covariance against the LU inverse of F, Schur blocks of F against
/// the same inverse, and the standalone covariances against the joint blocks.
std::vector<CheckResult> check_fim(std::uint64_t seed, std::size_t cases,
                                   const CheckHooks& hooks = {});

/// Isotropic closed forms against the general path, and the solver against
/// the q-method on isotropic data.
std::vector<CheckResult> check_isotropic(std::uint64_t seed, std::size_t cases);

/// solve_pose on noiseless data for n in {3, 5, 50}.
std::vector<CheckResult> check_noiseless(std::uint64_t seed, std::size_t cases_per_size);

/// Every suite above, with the default case counts.
std::vector<CheckResult> run_validation(std::uint64_t seed, const CheckHooks& hooks = {});

}  // namespace tlspose::app

#endif  // TLSPOSE_APP_CHECKS_HPP
