#pragma once

// Closed-loop simulation: scripted agents, sensing, reachable sets,
// projection, NMPC solve with fallback, ground-truth collision checks.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "oampc/avoidance.hpp"
#include "oampc/lidar.hpp"
#include "oampc/nmpc.hpp"
#include "oampc/reachability.hpp"
#include "oampc/world.hpp"

namespace oampc {

enum class PlannerMode { kBaseline, kOcclusionAware };

std::string to_string(PlannerMode m);
PlannerMode parse_mode(const std::string& s);

/// Constant-speed walk along a waypoint polyline. The agent stands at the
/// first waypoint until start_time and leaves the scene at the last one.
struct AgentScript {
  std::vector<Point2d> path;
  double speed = 0.5;
  double start_time = 0.0;
  bool initially_hidden = false;
  double radius = 0.0;

  std::optional<Point2d> position(double t) const;
  bool operator==(const AgentScript&) const = default;
};

/// Agents drawn per run from the scenario seed: start -> via -> exit, each
/// point uniform in its box. Legs crossing the map are redrawn.
struct RandomAgents {
  int count = 0;
  Point2d start_lo = Point2d::Zero(), start_hi = Point2d::Zero();
  Point2d via_lo = Point2d::Zero(), via_hi = Point2d::Zero();
  Point2d exit_lo = Point2d::Zero(), exit_hi = Point2d::Zero();
  double speed_min = 0.0, speed_max = 0.0;
  double start_time_min = 0.0, start_time_max = 0.0;
  double radius = 0.0;

  bool operator==(const RandomAgents&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  World world;
  RobotState init;
  std::vector<Point2d> goals;
  std::vector<AgentScript> agents;
  std::optional<RandomAgents> random_agents;
  LidarParams lidar;
  MpcParams mpc;
  AgentModel agent_model;  // hidden agents; visible agents use their own radius
  PlannerMode mode = PlannerMode::kOcclusionAware;
  int max_steps = 300;
  std::uint64_t seed = 0;
  double goal_tolerance = 0.1;

  /// Throws std::invalid_argument on semantic errors.
  void validate() const;
};

bool operator==(const Scenario& a, const Scenario& b);

/// Agents actually walking in a run: scripted ones followed by random draws.
std::vector<AgentScript> resolve_agents(const Scenario& sc);

struct LogRow {
  int step = 0;
  double tau = 0.0;
  RobotState state;
  ControlInput input;
  SolveStatus status = SolveStatus::kOptimal;
  bool used_fallback = false;
  bool no_feasible = false;  // solve failed and fallback_plan failed check_feasibility
  bool recovery = false;     // applied plan came from the relaxed recovery solve
  double solve_time = 0.0;    // seconds, solver only
  double planner_time = 0.0;  // seconds, scan processing to applied plan
  double min_clearance = 0.0;           // robot edge to map and agents
  double static_clearance = 0.0;        // robot edge to map
  double boundary_clearance = 0.0;      // robot center to nearest occlusion boundary, +inf if none
  double set_clearance = 0.0;           // robot edge to nearest k = 1 set, +inf if none
  int num_boundaries = 0;
  int num_visible = 0;
  FeasibilityReport feasibility;        // of the applied plan under this step's sets
  bool collision = false;
};

struct Snapshot {
  struct CapsuleView {
    Segmentd axis;
    std::vector<double> radii;  // k = 1..N
  };
  struct DiskView {
    Point2d center;
    std::vector<double> radii;
  };
  struct AgentView {
    Point2d position;
    double radius = 0.0;
    bool visible = false;
  };
  int step = 0;
  double tau = 0.0;
  RobotState robot;
  std::vector<Point2d> hits;
  std::vector<PointCloudCircle> circles;
  std::vector<Segmentd> boundaries;
  std::vector<CapsuleView> capsules;
  std::vector<DiskView> disks;
  std::vector<RobotState> plan;
  std::vector<AgentView> agents;
};

struct Metrics {
  std::optional<double> time_to_goal;  // empty: did not finish
  int goals_reached = 0;
  int steps = 0;
  bool collision = false;
  bool contact_while_moving = false;
  double min_clearance = 0.0;
  double min_static_clearance = 0.0;
  double min_boundary_clearance = 0.0;
  double solve_avg = 0.0, solve_max = 0.0, solve_std = 0.0;
  double step_avg = 0.0, step_max = 0.0, step_std = 0.0;
  int infeasible_steps = 0;
  int fallback_steps = 0;
  int no_feasible_steps = 0;
  int recovery_steps = 0;
  int optimal_steps = 0;
  double max_terminal_residual = 0.0;  // over optimal plans
};

struct RunOptions {
  bool snapshots = false;
  unsigned projection_threads = 1;
};

struct RunResult {
  std::vector<LogRow> log;
  std::vector<Snapshot> snapshots;
  Metrics metrics;
  bool finished = false;  // every goal reached
};

/// Mutable closed-loop state.
class Simulation {
 public:
  explicit Simulation(const Scenario& scenario, RunOptions options = {});

  /// One sense-plan-act cycle. Returns false once the run is over.
  bool step();

  const std::vector<LogRow>& log() const { return log_; }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  const RobotState& robot() const { return robot_; }
  bool finished() const { return goal_index_ >= scenario_.goals.size(); }
  bool done() const { return done_; }
  std::vector<std::pair<Point2d, double>> agent_disks(double t) const;

 private:
  Scenario scenario_;
  RunOptions options_;
  std::vector<AgentScript> agents_;
  std::vector<std::optional<DiskFamily>> tracks_;
  std::deque<ReachableSets> history_;  // sets of earlier steps, newest first
  RobotState robot_;
  ControlInput u_prev_;
  OpenLoopPlan plan_;
  std::size_t goal_index_ = 0;
  int step_ = 0;
  double tau_ = 0.0;
  bool done_ = false;
  std::vector<LogRow> log_;
  std::vector<Snapshot> snapshots_;
  std::optional<double> finish_time_;
  friend RunResult run(const Scenario&, RunOptions);
};

RunResult run(const Scenario& scenario, RunOptions options = {});

/// True iff the robot disk touches an agent disk or a map edge (closed contact).
bool ground_truth_collision(const RobotState& robot, const std::vector<std::pair<Point2d, double>>& agents,
                            const World& world, double r_robot);

Metrics compute_metrics(const std::vector<LogRow>& log, double feas_tol = 1e-6);

}  // namespace oampc
