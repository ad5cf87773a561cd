#ifndef TLSPOSE_SOLVER_HPP
#define TLSPOSE_SOLVER_HPP

#include <vector>

#include "tlspose/model.hpp"

namespace tlspose {

struct SolverConfig {
  int max_iterations = 100;
  double step_tolerance = 1e-12;  // on |delta_alpha|_inf, radians
  bool cost_decrease_required = true;
  int damping_halvings_max = 30;  // step cuts allowed per iteration

  /// Throws std::invalid_argument on non-positive limits or tolerances.
  void validate() const;
};

struct SolverDiagnostics {
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
  double final_gradient_norm = 0.0;  // |g|_inf at the returned attitude
  std::vector<double> step_history;  // |delta_alpha|_inf of each accepted step
  std::vector<double> cost_history;  // joint cost before each iteration, then the final cost
  // Cost after each accepted step with the weights held at the iterate the
  // step was computed from; never exceeds the matching cost_history entry
  // by more than rounding when damping is enabled.
  std::vector<double> reweighted_cost_history;
  std::vector<int> halvings;         // damping cuts (each at least a halving) per accepted step
};

struct PoseEstimate {
  Pose pose;
  SolverDiagnostics diagnostics;
};

/// Unweighted Kabsch seed. Throws DegenerateGeometryError for n < 3 or a
/// cross-dispersion of rank < 2 (collinear points).
Pose init_pose_kabsch(Observations obs);

struct GaussNewtonStep {
  Vec3 delta_alpha;
  Vec3 p_hat;
  Vec3 gradient;
  Mat3 hessian;
};

/// One Gauss-Newton step on the attitude-error vector about a_k, with the
/// residual weights evaluated at a_k. Throws DegenerateGeometryError when the
/// Hessian is not positive definite.
GaussNewtonStep gn_step(const Rotation& a_k, Observations obs);

/// Iteratively reweighted Gauss-Newton minimization of the joint TLS cost.
/// Non-convergence is reported through diagnostics.converged; degenerate
/// geometry and singular weights throw.
PoseEstimate solve_pose(Observations obs, const SolverConfig& config = {});

}  // namespace tlspose

#endif  // TLSPOSE_SOLVER_HPP
