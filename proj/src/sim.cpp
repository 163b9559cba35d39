#include "oampc/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace oampc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool approx_equal(const World& a, const World& b) {
  if (a.walls != b.walls || a.obstacles.size() != b.obstacles.size()) return false;
  for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
    if (a.obstacles[i].vertices() != b.obstacles[i].vertices()) return false;
  }
  return true;
}

bool params_equal(const MpcParams& a, const MpcParams& b) {
  return a.N == b.N && a.dt == b.dt && a.Q_z == b.Q_z && a.Q_u == b.Q_u && a.Q_du == b.Q_du && a.d_safe == b.d_safe &&
         a.d_safe_static == b.d_safe_static && a.r_robot == b.r_robot && a.u_min == b.u_min && a.u_max == b.u_max &&
         a.z_min == b.z_min && a.z_max == b.z_max && a.feas_tol == b.feas_tol && a.opt_tol == b.opt_tol &&
         a.max_iter == b.max_iter;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Point2d uniform_box(std::mt19937_64& rng, const Point2d& lo, const Point2d& hi) {
  const double x = uniform(rng, lo.x(), hi.x());
  const double y = uniform(rng, lo.y(), hi.y());
  return {x, y};
}

struct Stats {
  double avg = 0.0, max = 0.0, std = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.avg = sum / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - s.avg) * (x - s.avg);
  s.std = std::sqrt(var / static_cast<double>(v.size()));
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

// Whether a plan comes within d_safe + r_robot of any set at k = 1..N-1.
bool intrudes(const OpenLoopPlan& plan, const ReachableSets& sets, const MpcParams& mp) {
  const double d_dyn = mp.d_safe + mp.r_robot;
  for (int k = 1; k < plan.horizon(); ++k) {
    const Point2d p = plan.states[static_cast<std::size_t>(k)].position();
    for (const auto& f : sets.capsules) {
      if (d_dyn - dist_point_capsule(p, f.at(k)).distance > 0.5 * mp.feas_tol) return true;
    }
    for (const auto& f : sets.disks) {
      if (d_dyn - dist_point_disk(p, f.at(k)).distance > 0.5 * mp.feas_tol) return true;
    }
  }
  return false;
}

}  // namespace

std::string to_string(PlannerMode m) { return m == PlannerMode::kBaseline ? "baseline" : "occlusion_aware"; }

PlannerMode parse_mode(const std::string& s) {
  if (s == "baseline") return PlannerMode::kBaseline;
  if (s == "occlusion_aware" || s == "oa") return PlannerMode::kOcclusionAware;
  throw std::invalid_argument("unknown mode '" + s + "' (expected baseline or occlusion_aware)");
}

std::optional<Point2d> AgentScript::position(double t) const {
  if (path.empty()) return std::nullopt;
  if (t < start_time) return path[0];  // waits at its first waypoint
  double remaining = (t - start_time) * speed;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double len = (path[i + 1] - path[i]).norm();
    if (remaining <= len) {
      return len > 0.0 ? Point2d(path[i] + (remaining / len) * (path[i + 1] - path[i])) : path[i];
    }
    remaining -= len;
  }
  if (path.size() == 1 && remaining <= 0.0) return path[0];
  return std::nullopt;  // left the scene
}

void Scenario::validate() const {
  lidar.validate();
  mpc.validate();
  if (!(agent_model.v_target >= 0.0)) throw std::invalid_argument("agent_model.v_target must be >= 0");
  if (!(agent_model.radius >= 0.0)) throw std::invalid_argument("agent_model.radius must be >= 0");
  if (goals.empty()) throw std::invalid_argument("goals must not be empty");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!(goal_tolerance > 0.0)) throw std::invalid_argument("goal_tolerance must be > 0");
  if (world.inside_obstacle(init.position())) throw std::invalid_argument("robot.init lies inside an obstacle");
  if (world.clearance(init.position()) <= mpc.r_robot) throw std::invalid_argument("robot.init touches the map");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string tag = "agents[" + std::to_string(i) + "]";
    if (a.path.empty()) throw std::invalid_argument(tag + ".path must not be empty");
    if (!(a.speed >= 0.0)) throw std::invalid_argument(tag + ".speed must be >= 0");
    if (!(a.radius >= 0.0)) throw std::invalid_argument(tag + ".radius must be >= 0");
  }
  if (random_agents) {
    const auto& r = *random_agents;
    if (r.count < 0) throw std::invalid_argument("random_agents.count must be >= 0");
    if (r.speed_min > r.speed_max || r.speed_min < 0.0) throw std::invalid_argument("random_agents.speed is invalid");
    if (r.start_time_min > r.start_time_max) throw std::invalid_argument("random_agents.start_time is invalid");
  }
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.name == b.name && approx_equal(a.world, b.world) && a.init == b.init && a.goals == b.goals &&
         a.agents == b.agents && a.random_agents == b.random_agents && a.lidar.num_rays == b.lidar.num_rays &&
         a.lidar.max_range == b.lidar.max_range && a.lidar.jump_threshold == b.lidar.jump_threshold &&
         a.lidar.downsample_spacing == b.lidar.downsample_spacing && a.lidar.coverage_radius == b.lidar.coverage_radius &&
         params_equal(a.mpc, b.mpc) && a.agent_model.v_target == b.agent_model.v_target &&
         a.agent_model.radius == b.agent_model.radius && a.mode == b.mode && a.max_steps == b.max_steps &&
         a.seed == b.seed && a.goal_tolerance == b.goal_tolerance;
}

std::vector<AgentScript> resolve_agents(const Scenario& sc) {
  std::vector<AgentScript> out = sc.agents;
  if (!sc.random_agents) return out;
  const RandomAgents& spec = *sc.random_agents;
  std::mt19937_64 rng(sc.seed);
  for (int i = 0; i < spec.count; ++i) {
    AgentScript a;
    for (int attempt = 0; attempt < 200; ++attempt) {
      const Point2d s = uniform_box(rng, spec.start_lo, spec.start_hi);
      const Point2d v = uniform_box(rng, spec.via_lo, spec.via_hi);
      const Point2d e = uniform_box(rng, spec.exit_lo, spec.exit_hi);
      a.path = {s, v, e};
      if (!sc.world.blocks(s, v) && !sc.world.blocks(v, e) && !sc.world.inside_obstacle(s)) break;
    }
    a.speed = uniform(rng, spec.speed_min, spec.speed_max);
    a.start_time = uniform(rng, spec.start_time_min, spec.start_time_max);
    a.radius = spec.radius;
    a.initially_hidden = true;
    out.push_back(a);
  }
  return out;
}

bool ground_truth_collision(const RobotState& robot, const std::vector<std::pair<Point2d, double>>& agents,
                            const World& world, double r_robot) {
  const Point2d p = robot.position();
  for (const auto& [c, r] : agents) {
    if ((p - c).norm() <= r + r_robot) return true;
  }
  return world.clearance(p) <= r_robot;
}

Simulation::Simulation(const Scenario& scenario, RunOptions options)
    : scenario_(scenario), options_(options), agents_(resolve_agents(scenario)), robot_(scenario.init) {
  scenario_.validate();
  tracks_.resize(agents_.size());
  plan_ = stationary_plan(robot_, scenario_.mpc.N);
}

std::vector<std::pair<Point2d, double>> Simulation::agent_disks(double t) const {
  std::vector<std::pair<Point2d, double>> out;
  for (const auto& a : agents_) {
    if (auto p = a.position(t)) out.emplace_back(*p, a.radius);
  }
  return out;
}

bool Simulation::step() {
  if (done_) return false;
  const Scenario& sc = scenario_;
  const MpcParams& mp = sc.mpc;
  const double tol = sc.goal_tolerance;
  while (goal_index_ < sc.goals.size() && (robot_.position() - sc.goals[goal_index_]).norm() <= tol) {
    ++goal_index_;
  }
  if (finished() || step_ >= sc.max_steps) {
    if (finished()) finish_time_ = tau_;
    done_ = true;
    return false;
  }

  const Scan sc_scan = scan(sc.world, robot_, sc.lidar);
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<OcclusionBoundary> boundaries = detect_occlusions(sc_scan, sc.lidar);
  const std::vector<PointCloudCircle> circles = downsample(sc_scan, sc.lidar);

  ReachableSets sets;
  if (sc.mode == PlannerMode::kOcclusionAware) {
    for (const auto& b : boundaries) sets.capsules.push_back(build_capsules(b, sc.agent_model, mp.dt, mp.N));
  }
  std::vector<Snapshot::AgentView> agent_views;
  int num_visible = 0;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto pos = agents_[i].position(tau_);
    if (!pos) {
      tracks_[i].reset();
      continue;
    }
    const bool visible = (*pos - robot_.position()).norm() <= sc.lidar.max_range && !sc.world.blocks(robot_.position(), *pos);
    agent_views.push_back({*pos, agents_[i].radius, visible});
    if (!visible) {
      tracks_[i].reset();
      continue;
    }
    ++num_visible;
    const Diskd sensed{*pos, agents_[i].radius};
    const Diskd initial = tracks_[i] ? fuse_measurement(tracks_[i]->at(1), sensed) : sensed;
    tracks_[i] = build_disks(initial, {sc.agent_model.v_target, agents_[i].radius}, mp.dt, mp.N);
    sets.disks.push_back(*tracks_[i]);
  }

  const std::vector<Point2d> shifted = shift_extrapolate(plan_);
  const ProjectionSet proj = project_plan(shifted, sets, options_.projection_threads);

  NlpProblem prob;
  prob.z0 = robot_;
  // Goal heading is the bearing to the goal, unwrapped next to the current
  // heading; it only matters when Q_z weights psi.
  const Point2d to_goal = sc.goals[goal_index_] - robot_.position();
  const double bearing = to_goal.norm() > 0.0 ? std::atan2(to_goal.y(), to_goal.x()) : robot_.psi;
  prob.goal = {sc.goals[goal_index_].x(), sc.goals[goal_index_].y(), robot_.psi + wrap_angle(bearing - robot_.psi)};
  prob.u_prev = u_prev_;
  prob.projections = proj;
  prob.static_circles = circles;
  prob.params = mp;
  prob.warm_start = fallback_plan(plan_, mp.dt);
  prob.stamp = tau_;
  SolveResult res = solve(prob);
  // The distance rows hold at fixed projections of the guess. A plan that
  // drifted into a set's true margin is projected again and re-solved, and
  // is dropped if it still intrudes.
  ProjectionSet used = proj;
  for (int round = 0; round < 3 && res.status == SolveStatus::kOptimal && intrudes(res.plan, sets, mp); ++round) {
    std::vector<Point2d> pts;
    for (std::size_t k = 1; k < res.plan.states.size(); ++k) pts.push_back(res.plan.states[k].position());
    NlpProblem again = prob;
    again.projections = project_plan(pts, sets, options_.projection_threads);
    again.warm_start = res.plan;
    SolveResult next = solve(again);
    next.wall_time += res.wall_time;
    res = std::move(next);
    used = std::move(again.projections);
  }
  if (res.status == SolveStatus::kOptimal && intrudes(res.plan, sets, mp)) res.status = SolveStatus::kInfeasible;
  const std::vector<ReachableSets> history_vec(history_.begin(), history_.end());

  LogRow row;
  row.step = step_;
  row.tau = tau_;
  row.state = robot_.wrapped();
  row.status = res.status;
  row.solve_time = res.wall_time;
  OpenLoopPlan applied;
  if (res.status == SolveStatus::kOptimal) {
    applied = res.plan;
  } else {
    OpenLoopPlan fb = fallback_plan(plan_, mp.dt);
    const bool fb_ok = check_feasibility(fb, robot_, proj, circles, mp, history_vec).feasible(mp.feas_tol);
    row.no_feasible = !fb_ok;
    const bool fb_moves = std::any_of(fb.states.begin(), fb.states.end(),
                                      [&](const RobotState& z) { return !(z == robot_); });
    // A visible agent close by is transient: wait for it stopped.
    const bool agent_near = std::any_of(sets.disks.begin(), sets.disks.end(), [&](const DiskFamily& f) {
      return dist_point_disk(robot_.position(), f.at(mp.N)).distance < mp.d_safe + mp.r_robot;
    });
    if (fb_ok && (fb_moves || agent_near)) {
      applied = std::move(fb);
      row.used_fallback = true;
    } else {
      // Stopping is always admissible but never frees the robot from a set
      // that has engulfed it; try to back out without worsening any row.
      NlpProblem rec = prob;
      rec.relax_violated = true;
      const SolveResult rr = solve(rec);
      if (rr.status == SolveStatus::kOptimal) {
        // One relaxed step, then stopped: the next fallback is a stop.
        std::vector<ControlInput> u(static_cast<std::size_t>(mp.N));
        u.front() = rr.plan.inputs.front();
        applied = make_plan(robot_, u, mp.dt, tau_);
        row.recovery = true;
      } else if (fb_ok) {
        applied = std::move(fb);
        row.used_fallback = true;
      } else {
        applied = stationary_plan(robot_, mp.N, tau_);
      }
    }
  }
  row.planner_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  row.feasibility = check_feasibility(applied, robot_, res.status == SolveStatus::kOptimal ? used : proj, circles, mp, history_vec);
  row.input = applied.inputs.front();

  const auto disks_now = agent_disks(tau_);
  row.collision = ground_truth_collision(robot_, disks_now, sc.world, mp.r_robot);
  row.static_clearance = sc.world.clearance(robot_.position()) - mp.r_robot;
  row.min_clearance = row.static_clearance;
  for (const auto& [c, r] : disks_now) {
    row.min_clearance = std::min(row.min_clearance, (robot_.position() - c).norm() - r - mp.r_robot);
  }
  row.boundary_clearance = kInf;
  for (const auto& b : boundaries) {
    row.boundary_clearance = std::min(row.boundary_clearance, dist_point_segment(robot_.position(), b.seg));
  }
  row.set_clearance = kInf;
  for (const auto& f : sets.capsules) {
    row.set_clearance = std::min(row.set_clearance, dist_point_capsule(robot_.position(), f.at(1)).distance - mp.r_robot);
  }
  for (const auto& f : sets.disks) {
    row.set_clearance = std::min(row.set_clearance, dist_point_disk(robot_.position(), f.at(1)).distance - mp.r_robot);
  }
  row.num_boundaries = static_cast<int>(boundaries.size());
  row.num_visible = num_visible;
  log_.push_back(row);

  if (options_.snapshots) {
    Snapshot snap;
    snap.step = step_;
    snap.tau = tau_;
    snap.robot = row.state;
    for (const auto& h : sc_scan.hits) {
      if (h) snap.hits.push_back(*h);
    }
    snap.circles = circles;
    for (const auto& b : boundaries) snap.boundaries.push_back(b.seg);
    for (const auto& f : sets.capsules) {
      Snapshot::CapsuleView v{f.boundary.seg, {}};
      for (const auto& c : f.capsules) v.radii.push_back(c.radius());
      snap.capsules.push_back(v);
    }
    for (const auto& f : sets.disks) {
      Snapshot::DiskView v{f.initial.center, {}};
      for (const auto& d : f.disks) v.radii.push_back(d.radius);
      snap.disks.push_back(v);
    }
    for (const auto& z : applied.states) snap.plan.push_back(z.wrapped());
    snap.agents = agent_views;
    snapshots_.push_back(std::move(snap));
  }

  ++step_;
  if (row.collision) {
    done_ = true;
    return false;
  }
  robot_ = dynamics_step(robot_, row.input, mp.dt);
  u_prev_ = row.input;
  plan_ = std::move(applied);
  history_.push_front(std::move(sets));
  if (static_cast<int>(history_.size()) > mp.N) history_.pop_back();
  tau_ += mp.dt;
  return true;
}

RunResult run(const Scenario& scenario, RunOptions options) {
  Simulation sim(scenario, options);
  while (sim.step()) {
  }
  RunResult out;
  out.finished = sim.finished();
  if (!sim.log_.empty()) out.metrics = compute_metrics(sim.log_, scenario.mpc.feas_tol);
  out.metrics.goals_reached = static_cast<int>(sim.goal_index_);
  out.metrics.time_to_goal = sim.finish_time_;
  out.log = std::move(sim.log_);
  out.snapshots = std::move(sim.snapshots_);
  return out;
}

Metrics compute_metrics(const std::vector<LogRow>& log, double feas_tol) {
  if (log.empty()) throw std::invalid_argument("compute_metrics: empty log");
  Metrics m;
  m.steps = static_cast<int>(log.size());
  m.min_clearance = kInf;
  m.min_static_clearance = kInf;
  m.min_boundary_clearance = kInf;
  std::vector<double> solve, step;
  for (const auto& r : log) {
    solve.push_back(r.solve_time);
    step.push_back(r.planner_time);
    m.min_clearance = std::min(m.min_clearance, r.min_clearance);
    m.min_static_clearance = std::min(m.min_static_clearance, r.static_clearance);
    m.min_boundary_clearance = std::min(m.min_boundary_clearance, r.boundary_clearance);
    if (r.collision) {
      m.collision = true;
      if (r.input.v > feas_tol) m.contact_while_moving = true;
    }
    if (r.status == SolveStatus::kOptimal) {
      ++m.optimal_steps;
      m.max_terminal_residual = std::max(m.max_terminal_residual, r.feasibility.terminal);
    } else {
      ++m.infeasible_steps;
    }
    if (r.used_fallback) ++m.fallback_steps;
    if (r.no_feasible) ++m.no_feasible_steps;
    if (r.recovery) ++m.recovery_steps;
  }
  const Stats s = stats(solve);
  m.solve_avg = s.avg;
  m.solve_max = s.max;
  m.solve_std = s.std;
  const Stats t = stats(step);
  m.step_avg = t.avg;
  m.step_max = t.max;
  m.step_std = t.std;
  return m;
}

}  // namespace oampc
