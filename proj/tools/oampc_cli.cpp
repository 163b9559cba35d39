// oampc: run, compare, render and validate occlusion-aware MPC scenarios.

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "oampc/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace oampc;

namespace {

struct Common {
  std::string scenario;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string mode;
  bool frames = false;
};

Scenario load(const Common& c) {
  std::vector<std::string> ov = c.overrides;
  if (c.seed) ov.push_back("seed=" + std::to_string(*c.seed));
  if (!c.mode.empty()) ov.push_back("mode=\"" + c.mode + "\"");
  return parse_scenario(c.scenario, ov);
}

void render_dir(const fs::path& dir) {
  const Scenario sc = parse_scenario(dir / "scenario.json");
  const std::vector<Snapshot> snaps = read_snapshots(dir / "snapshots.jsonl");
  const fs::path frames = dir / "frames";
  fs::create_directories(frames);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.svg", i);
    std::ofstream(frames / name) << render_svg(sc.world, snaps, i);
  }
  spdlog::info("rendered {} frames into {}", snaps.size(), frames.string());
}

int cmd_run(const Common& c) {
  const Scenario sc = load(c);
  spdlog::info("running '{}' in {} mode, N={}", sc.name, to_string(sc.mode), sc.mpc.N);
  const RunResult res = run(sc, {.snapshots = true});
  write_run_artifacts(sc, res, c.out);
  if (c.frames) render_dir(c.out);
  const Metrics& m = res.metrics;
  std::cout << "steps=" << m.steps << " goals=" << m.goals_reached << "/" << sc.goals.size()
            << " collision=" << (m.collision ? "yes" : "no") << " min_clearance=" << m.min_clearance
            << " step_avg_ms=" << m.step_avg * 1e3 << " fallback=" << m.fallback_steps
            << " no_feasible=" << m.no_feasible_steps << " recovery=" << m.recovery_steps << "\n";
  return res.finished && !m.collision ? 0 : 1;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_compare(const Common& c, const std::optional<std::string>& modes_arg,
                const std::optional<std::string>& speeds_arg) {
  if (!modes_arg && !speeds_arg) throw CLI::ValidationError("compare", "give --modes and/or --speeds");
  const Scenario base = load(c);
  std::vector<std::string> modes = modes_arg ? split(*modes_arg) : std::vector<std::string>{to_string(base.mode)};
  std::vector<double> speeds;
  if (speeds_arg) {
    for (const auto& s : split(*speeds_arg)) speeds.push_back(std::stod(s));
  } else {
    speeds.push_back(base.agent_model.v_target);
  }
  if (modes.empty() || speeds.empty()) throw CLI::ValidationError("compare", "empty variant list");

  fs::create_directories(c.out);
  std::ofstream table(fs::path(c.out) / "comparison.csv");
  const std::string header =
      "variant,mode,v_target,finished,collision,time_to_goal,min_clearance,min_boundary_clearance,"
      "min_static_clearance,solve_avg,solve_max,solve_std,step_avg,step_max,step_std,infeasible_steps,"
      "fallback_steps,no_feasible_steps,recovery_steps";
  table << header << '\n';
  std::cout << header << '\n';
  for (const auto& mode : modes) {
    for (double v : speeds) {
      Scenario sc = base;
      sc.mode = parse_mode(mode);
      sc.agent_model.v_target = v;
      std::ostringstream name;
      name << to_string(sc.mode) << "_v" << v;
      spdlog::info("variant {}", name.str());
      const RunResult res = run(sc, {.snapshots = true});
      write_run_artifacts(sc, res, fs::path(c.out) / name.str());
      const Metrics& m = res.metrics;
      std::ostringstream row;
      row << name.str() << ',' << to_string(sc.mode) << ',' << v << ',' << res.finished << ',' << m.collision << ','
          << (m.time_to_goal ? std::to_string(*m.time_to_goal) : "") << ',' << m.min_clearance << ','
          << m.min_boundary_clearance << ',' << m.min_static_clearance << ',' << m.solve_avg << ',' << m.solve_max
          << ',' << m.solve_std << ',' << m.step_avg << ',' << m.step_max << ',' << m.step_std << ','
          << m.infeasible_steps << ',' << m.fallback_steps << ',' << m.no_feasible_steps << ',' << m.recovery_steps;
      table << row.str() << '\n';
      std::cout << row.str() << '\n';
    }
  }
  return 0;
}

int cmd_validate(const Common& c) {
  const Scenario sc = load(c);
  std::cout << c.scenario << ": ok (" << sc.name << ", " << sc.world.obstacles.size() << " obstacles, "
            << sc.world.walls.size() << " walls, " << sc.goals.size() << " goals, " << resolve_agents(sc).size()
            << " agents)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("OAMPC_LOG_LEVEL")) spdlog::cfg::helpers::load_levels(lvl);

  CLI::App app{"Occlusion-aware NMPC scenario runner"};
  app.require_subcommand(1);
  Common c;
  std::optional<std::string> modes, speeds;
  std::string render_in;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", c.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--override", c.overrides, "dot.path=value edit, repeatable");
    sub->add_option("--seed", c.seed, "override the scenario seed");
    sub->add_option("--mode", c.mode, "baseline or occlusion_aware")
        ->check(CLI::IsMember({"baseline", "occlusion_aware", "oa"}));
  };
  auto* run_cmd = app.add_subcommand("run", "run one closed-loop scenario");
  add_common(run_cmd);
  run_cmd->add_option("--out", c.out, "output directory");
  run_cmd->add_flag("--frames", c.frames, "also render SVG frames");

  auto* cmp = app.add_subcommand("compare", "run mode/speed variants on a shared seed");
  add_common(cmp);
  cmp->add_option("--out", c.out, "output directory");
  cmp->add_option("--modes", modes, "comma-separated modes");
  cmp->add_option("--speeds", speeds, "comma-separated v_target values");

  auto* render = app.add_subcommand("render", "render SVG frames from a run directory");
  render->add_option("--out,run_dir", render_in, "run directory")->required();

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return cmd_run(c);
    if (*cmp) return cmd_compare(c, modes, speeds);
    if (*render) {
      render_dir(render_in);
      return 0;
    }
    if (*validate) return cmd_validate(c);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
