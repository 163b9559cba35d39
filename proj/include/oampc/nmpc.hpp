#pragma once

// Unicycle NMPC with a terminal stop, solved by a feasible-iterate SQP over
// the first N-1 inputs (the last input is pinned to zero, so z_N = z_{N-1}).

#include <Eigen/Core>

#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "oampc/avoidance.hpp"
#include "oampc/lidar.hpp"
#include "oampc/types.hpp"

namespace oampc {

struct MpcParams {
  int N = 10;
  double dt = 0.1;
  Eigen::Matrix3d Q_z = Eigen::Vector3d(10.0, 10.0, 0.0).asDiagonal();
  Eigen::Matrix2d Q_u = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Q_du = Eigen::Matrix2d::Identity();
  double d_safe = 0.5;
  double d_safe_static = 0.1;
  double r_robot = 0.2;
  ControlInput u_min{0.0, -std::numbers::pi};
  ControlInput u_max{2.0, std::numbers::pi};
  Eigen::Vector3d z_min = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());
  Eigen::Vector3d z_max = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  double feas_tol = 1e-6;
  double opt_tol = 1e-6;
  int max_iter = 100;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct NlpProblem {
  RobotState z0;
  RobotState goal;
  ControlInput u_prev;  // input applied at the previous step
  ProjectionSet projections;
  std::vector<PointCloudCircle> static_circles;
  MpcParams params;
  OpenLoopPlan warm_start;
  double stamp = 0.0;
  // Recovery form: rows already violated at z0 may not get worse, instead of
  // having to hold. Results are not certified by check_feasibility.
  bool relax_violated = false;
};

enum class SolveStatus { kOptimal, kInfeasible, kMaxIter };

std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  OpenLoopPlan plan;
  double objective = 0.0;
  int iterations = 0;
  double wall_time = 0.0;      // seconds
  double max_violation = 0.0;  // over every constraint row, at the returned plan
};

struct FeasibilityReport {
  double dynamics = 0.0;         // max ||z_{k+1} - f(z_k, u_k)||
  double initial = 0.0;          // ||z_0 - z(t)||
  double state_bounds = 0.0;
  double input_bounds = 0.0;
  double terminal = 0.0;         // ||z_N - z_{N-1}||
  double complementarity = 0.0;  // max ||z_k - z_{k-1}|| * max(g_k, 0)
  std::vector<double> g;         // g_t(z_k) for k = 1..N

  double worst() const;
  bool feasible(double tol) const { return worst() <= tol; }
};

RobotState dynamics_step(const RobotState& z, const ControlInput& u, double dt);

/// States z_0..z_N produced by applying `inputs` from z0.
std::vector<RobotState> rollout(const RobotState& z0, const std::vector<ControlInput>& inputs, double dt);

OpenLoopPlan make_plan(const RobotState& z0, const std::vector<ControlInput>& inputs, double dt, double stamp = 0.0);

double total_cost(const OpenLoopPlan& plan, const RobotState& goal, const MpcParams& params,
                  const ControlInput& u_prev = {});

/// Gradient of total_cost(make_plan(z0, inputs)) with respect to
/// [v_0, delta_0, ..., v_{N-1}, delta_{N-1}].
Eigen::VectorXd cost_gradient(const RobotState& z0, const std::vector<ControlInput>& inputs, const RobotState& goal,
                              const MpcParams& params, const ControlInput& u_prev = {});

/// Constraint values c(u) <= 0 of the problem for the given input sequence
/// together with their Jacobian with respect to all 2N inputs. Exposed for
/// derivative checks.
struct ConstraintEval {
  Eigen::VectorXd c;
  Eigen::MatrixXd jac;
};
ConstraintEval evaluate_constraints(const NlpProblem& problem, const std::vector<ControlInput>& inputs);

SolveResult solve(const NlpProblem& problem);

FeasibilityReport check_feasibility(const OpenLoopPlan& plan, const RobotState& z0, const ProjectionSet& projections,
                                    const std::vector<PointCloudCircle>& static_circles, const MpcParams& params);

/// As above, with the sets of earlier steps: history[j - 1] was built j steps
/// ago. Each generation over-approximates the same agents, so avoidance is
/// judged against their intersection.
FeasibilityReport check_feasibility(const OpenLoopPlan& plan, const RobotState& z0, const ProjectionSet& projections,
                                    const std::vector<PointCloudCircle>& static_circles, const MpcParams& params,
                                    const std::vector<ReachableSets>& history);

/// Previous plan advanced one step with its last input repeated.
OpenLoopPlan fallback_plan(const OpenLoopPlan& prev, double dt);

/// All states at z0, all inputs zero.
OpenLoopPlan stationary_plan(const RobotState& z0, int N, double stamp = 0.0);

}  // namespace oampc
