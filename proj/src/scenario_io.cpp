#include "oampc/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace oampc {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int line_at(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Best-effort line of a dotted field path: follows each key's first
// occurrence after the previous one.
int line_of_field(const std::string& text, const std::string& field) {
  std::size_t pos = 0;
  bool found = false;
  std::stringstream ss(field);
  std::string part;
  while (std::getline(ss, part, '.')) {
    const std::string key = part.substr(0, part.find('['));
    if (key.empty()) continue;
    const std::size_t at = text.find('"' + key + '"', pos);
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  return found ? line_at(text, pos) : 0;
}

struct Ctx {
  const std::string& text;
  const std::string& source;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ScenarioError(source, line_of_field(text, field), field, what);
  }
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double as_double(const Ctx& ctx, const json& j, const std::string& f) {
  if (!j.is_number()) ctx.fail(f, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) ctx.fail(f, "expected a finite number");
  return v;
}

int as_int(const Ctx& ctx, const json& j, const std::string& f) {
  if (!j.is_number_integer()) ctx.fail(f, "expected an integer");
  return j.get<int>();
}

bool as_bool(const Ctx& ctx, const json& j, const std::string& f) {
  if (!j.is_boolean()) ctx.fail(f, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const Ctx& ctx, const json& j, const std::string& f) {
  if (!j.is_string()) ctx.fail(f, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const Ctx& ctx, const json& j, const std::string& f, std::size_t size = 0) {
  if (!j.is_array()) ctx.fail(f, "expected an array");
  if (size != 0 && j.size() != size) ctx.fail(f, "expected an array of length " + std::to_string(size));
  return j;
}

Point2d as_point(const Ctx& ctx, const json& j, const std::string& f) {
  as_array(ctx, j, f, 2);
  return {as_double(ctx, j[0], f + "[0]"), as_double(ctx, j[1], f + "[1]")};
}

std::vector<Point2d> as_points(const Ctx& ctx, const json& j, const std::string& f) {
  as_array(ctx, j, f);
  std::vector<Point2d> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_point(ctx, j[i], f + "[" + std::to_string(i) + "]"));
  return out;
}

// [lo, hi] where null means unbounded on that side.
std::pair<double, double> as_interval(const Ctx& ctx, const json& j, const std::string& f) {
  as_array(ctx, j, f, 2);
  const double lo = j[0].is_null() ? -kInf : as_double(ctx, j[0], f + "[0]");
  const double hi = j[1].is_null() ? kInf : as_double(ctx, j[1], f + "[1]");
  if (lo > hi) ctx.fail(f, "lower bound exceeds upper bound");
  return {lo, hi};
}

template <int Dim>
Eigen::Matrix<double, Dim, Dim> as_weight(const Ctx& ctx, const json& j, const std::string& f) {
  as_array(ctx, j, f, Dim);
  Eigen::Matrix<double, Dim, Dim> Q = Eigen::Matrix<double, Dim, Dim>::Zero();
  if (j[0].is_number()) {
    for (int i = 0; i < Dim; ++i) Q(i, i) = as_double(ctx, j[static_cast<std::size_t>(i)], f + "[" + std::to_string(i) + "]");
    return Q;
  }
  for (int i = 0; i < Dim; ++i) {
    const std::string fi = f + "[" + std::to_string(i) + "]";
    const json& row = as_array(ctx, j[static_cast<std::size_t>(i)], fi, Dim);
    for (int c = 0; c < Dim; ++c) Q(i, c) = as_double(ctx, row[static_cast<std::size_t>(c)], fi + "[" + std::to_string(c) + "]");
  }
  return Q;
}

// Object view that rejects unknown keys once parsing of it is complete.
class Obj {
 public:
  Obj(const Ctx& ctx, const json& j, std::string path) : ctx_(ctx), j_(j), path_(std::move(path)) {
    if (!j.is_object()) ctx.fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* opt(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& req(const std::string& key) {
    const json* v = opt(key);
    if (!v) {
      // Reported at the enclosing object's line, since the key itself is absent.
      throw ScenarioError(ctx_.source, path_.empty() ? 0 : line_of_field(ctx_.text, path_), field(key),
                          "missing required field");
    }
    return *v;
  }
  std::string field(const std::string& key) const { return join(path_, key); }

  double num(const std::string& key, double def) {
    const json* v = opt(key);
    return v ? as_double(ctx_, *v, field(key)) : def;
  }
  int integer(const std::string& key, int def) {
    const json* v = opt(key);
    return v ? as_int(ctx_, *v, field(key)) : def;
  }

  void done() const {
    for (const auto& [k, _] : j_.items()) {
      if (!used_.count(k)) ctx_.fail(field(k), "unknown key '" + field(k) + "'");
    }
  }

 private:
  const Ctx& ctx_;
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

ConvexPolygond polygon(const Ctx& ctx, const json& j, const std::string& f) {
  std::vector<Point2d> v = as_points(ctx, j, f);
  if (v.size() < 3) ctx.fail(f, "polygon needs at least 3 vertices");
  double area = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) area += cross2<double>(v[i], v[(i + 1) % v.size()]);
  if (area < 0.0) std::reverse(v.begin(), v.end());
  try {
    return ConvexPolygond(std::move(v));
  } catch (const GeometryError& e) {
    ctx.fail(f, e.what());
  }
}

Scenario from_json(const Ctx& ctx, const json& doc) {
  Scenario sc;
  Obj root(ctx, doc, "");
  if (const json* v = root.opt("name")) sc.name = as_string(ctx, *v, "name");
  if (const json* v = root.opt("mode")) {
    try {
      sc.mode = parse_mode(as_string(ctx, *v, "mode"));
    } catch (const std::invalid_argument& e) {
      ctx.fail("mode", e.what());
    }
  }
  if (const json* v = root.opt("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      ctx.fail("seed", "expected a non-negative integer");
    }
    sc.seed = v->get<std::uint64_t>();
  }
  sc.max_steps = root.integer("max_steps", sc.max_steps);
  sc.goal_tolerance = root.num("goal_tolerance", sc.goal_tolerance);

  {
    Obj map(ctx, root.req("map"), "map");
    if (const json* v = map.opt("room")) {
      as_array(ctx, *v, "map.room", 4);
      double b[4];
      for (std::size_t i = 0; i < 4; ++i) b[i] = as_double(ctx, (*v)[i], "map.room[" + std::to_string(i) + "]");
      if (!(b[0] < b[2] && b[1] < b[3])) ctx.fail("map.room", "expected [xmin, ymin, xmax, ymax]");
      for (const auto& s : make_room(b[0], b[1], b[2], b[3])) sc.world.walls.push_back(s);
    }
    if (const json* v = map.opt("walls")) {
      as_array(ctx, *v, "map.walls");
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string f = "map.walls[" + std::to_string(i) + "]";
        const auto pts = as_points(ctx, (*v)[i], f);
        if (pts.size() != 2) ctx.fail(f, "a wall is a pair of points");
        if ((pts[0] - pts[1]).norm() <= kGeometryEps<double>) ctx.fail(f, "wall has zero length");
        sc.world.walls.push_back({pts[0], pts[1]});
      }
    }
    if (const json* v = map.opt("obstacles")) {
      as_array(ctx, *v, "map.obstacles");
      for (std::size_t i = 0; i < v->size(); ++i) {
        sc.world.obstacles.push_back(polygon(ctx, (*v)[i], "map.obstacles[" + std::to_string(i) + "]"));
      }
    }
    map.done();
  }

  {
    Obj robot(ctx, root.req("robot"), "robot");
    const json& init = as_array(ctx, robot.req("init"), "robot.init", 3);
    sc.init = {as_double(ctx, init[0], "robot.init[0]"), as_double(ctx, init[1], "robot.init[1]"),
               as_double(ctx, init[2], "robot.init[2]")};
    robot.done();
  }
  sc.goals = as_points(ctx, root.req("goals"), "goals");

  {
    Obj am(ctx, root.req("agent_model"), "agent_model");
    sc.agent_model.v_target = as_double(ctx, am.req("v_target"), "agent_model.v_target");
    sc.agent_model.radius = am.num("radius", 0.0);
    am.done();
  }

  if (const json* v = root.opt("agents")) {
    as_array(ctx, *v, "agents");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string f = "agents[" + std::to_string(i) + "]";
      Obj a(ctx, (*v)[i], f);
      AgentScript s;
      s.path = as_points(ctx, a.req("path"), f + ".path");
      s.speed = as_double(ctx, a.req("speed"), f + ".speed");
      s.start_time = a.num("start_time", 0.0);
      s.radius = a.num("radius", 0.0);
      if (const json* h = a.opt("initially_hidden")) s.initially_hidden = as_bool(ctx, *h, f + ".initially_hidden");
      a.done();
      sc.agents.push_back(s);
    }
  }

  if (const json* v = root.opt("random_agents")) {
    Obj r(ctx, *v, "random_agents");
    RandomAgents ra;
    ra.count = as_int(ctx, r.req("count"), "random_agents.count");
    const auto box = [&](const std::string& key, Point2d& lo, Point2d& hi) {
      const json& b = as_array(ctx, r.req(key), r.field(key), 2);
      lo = as_point(ctx, b[0], r.field(key) + "[0]");
      hi = as_point(ctx, b[1], r.field(key) + "[1]");
    };
    box("start_box", ra.start_lo, ra.start_hi);
    box("via_box", ra.via_lo, ra.via_hi);
    box("exit_box", ra.exit_lo, ra.exit_hi);
    std::tie(ra.speed_min, ra.speed_max) = as_interval(ctx, r.req("speed"), "random_agents.speed");
    std::tie(ra.start_time_min, ra.start_time_max) = as_interval(ctx, r.req("start_time"), "random_agents.start_time");
    ra.radius = r.num("radius", 0.0);
    r.done();
    sc.random_agents = ra;
  }

  if (const json* v = root.opt("lidar")) {
    Obj l(ctx, *v, "lidar");
    sc.lidar.num_rays = l.integer("num_rays", sc.lidar.num_rays);
    sc.lidar.max_range = l.num("max_range", sc.lidar.max_range);
    sc.lidar.jump_threshold = l.num("jump_threshold", sc.lidar.jump_threshold);
    sc.lidar.downsample_spacing = l.num("downsample_spacing", sc.lidar.downsample_spacing);
    sc.lidar.coverage_radius = l.num("coverage_radius", sc.lidar.coverage_radius);
    l.done();
  }

  if (const json* v = root.opt("mpc")) {
    Obj m(ctx, *v, "mpc");
    MpcParams& p = sc.mpc;
    p.N = m.integer("N", p.N);
    p.dt = m.num("dt", p.dt);
    if (const json* q = m.opt("Q_z")) p.Q_z = as_weight<3>(ctx, *q, "mpc.Q_z");
    if (const json* q = m.opt("Q_u")) p.Q_u = as_weight<2>(ctx, *q, "mpc.Q_u");
    if (const json* q = m.opt("Q_du")) p.Q_du = as_weight<2>(ctx, *q, "mpc.Q_du");
    p.d_safe = m.num("d_safe", p.d_safe);
    p.d_safe_static = m.num("d_safe_static", p.d_safe_static);
    p.r_robot = m.num("r_robot", p.r_robot);
    if (const json* b = m.opt("v_bounds")) std::tie(p.u_min.v, p.u_max.v) = as_interval(ctx, *b, "mpc.v_bounds");
    if (const json* b = m.opt("delta_bounds")) {
      std::tie(p.u_min.delta, p.u_max.delta) = as_interval(ctx, *b, "mpc.delta_bounds");
    }
    if (const json* b = m.opt("state_bounds")) {
      Obj sb(ctx, *b, "mpc.state_bounds");
      const char* names[3] = {"x", "y", "psi"};
      for (int a = 0; a < 3; ++a) {
        if (const json* iv = sb.opt(names[a])) {
          std::tie(p.z_min[a], p.z_max[a]) = as_interval(ctx, *iv, sb.field(names[a]));
        }
      }
      sb.done();
    }
    p.feas_tol = m.num("feas_tol", p.feas_tol);
    p.opt_tol = m.num("opt_tol", p.opt_tol);
    p.max_iter = m.integer("max_iter", p.max_iter);
    m.done();
  }
  root.done();

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    ctx.fail(what.substr(0, what.find(' ')), what);
  }
  return sc;
}

json interval_json(double lo, double hi) {
  return json::array({std::isfinite(lo) ? json(lo) : json(nullptr), std::isfinite(hi) ? json(hi) : json(nullptr)});
}

json point_json(const Point2d& p) { return json::array({p.x(), p.y()}); }

template <int Dim>
json matrix_json(const Eigen::Matrix<double, Dim, Dim>& Q) {
  json out = json::array();
  for (int i = 0; i < Dim; ++i) {
    json row = json::array();
    for (int c = 0; c < Dim; ++c) row.push_back(Q(i, c));
    out.push_back(row);
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

ScenarioError::ScenarioError(const std::string& source, int line, const std::string& field, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         (field.empty() ? std::string() : "field '" + field + "': ") + what),
      line_(line),
      field_(field) {}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (const std::exception&) {
        throw std::invalid_argument("override '" + key + "': '" + p + "' is not an array index");
      }
      if (idx >= node->size()) throw std::invalid_argument("override '" + key + "': index out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw std::invalid_argument("override '" + key + "': '" + p + "' has no children");
      node = &(*node)[p];
    }
    if (last) *node = value;
  }
}

Scenario parse_scenario_text(const std::string& text, const std::vector<std::string>& overrides,
                             const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(source, line_at(text, e.byte == 0 ? 0 : e.byte - 1), "", "syntax error: " + std::string(e.what()));
  }
  for (const auto& o : overrides) {
    try {
      apply_override(doc, o);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(source, 0, o.substr(0, o.find('=')), e.what());
    }
  }
  return from_json(Ctx{text, source}, doc);
}

Scenario parse_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string(), 0, "", "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), overrides, path.string());
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["mode"] = to_string(sc.mode);
  j["seed"] = sc.seed;
  j["max_steps"] = sc.max_steps;
  j["goal_tolerance"] = sc.goal_tolerance;
  json walls = json::array();
  for (const auto& w : sc.world.walls) walls.push_back(json::array({point_json(w.a), point_json(w.b)}));
  json obstacles = json::array();
  for (const auto& o : sc.world.obstacles) {
    json poly = json::array();
    for (const auto& v : o.vertices()) poly.push_back(point_json(v));
    obstacles.push_back(poly);
  }
  j["map"] = {{"walls", walls}, {"obstacles", obstacles}};
  j["robot"] = {{"init", json::array({sc.init.x, sc.init.y, sc.init.psi})}};
  j["goals"] = json::array();
  for (const auto& g : sc.goals) j["goals"].push_back(point_json(g));
  j["agent_model"] = {{"v_target", sc.agent_model.v_target}, {"radius", sc.agent_model.radius}};
  j["agents"] = json::array();
  for (const auto& a : sc.agents) {
    json path = json::array();
    for (const auto& p : a.path) path.push_back(point_json(p));
    j["agents"].push_back({{"path", path},
                           {"speed", a.speed},
                           {"start_time", a.start_time},
                           {"radius", a.radius},
                           {"initially_hidden", a.initially_hidden}});
  }
  if (sc.random_agents) {
    const auto& r = *sc.random_agents;
    j["random_agents"] = {{"count", r.count},
                          {"start_box", json::array({point_json(r.start_lo), point_json(r.start_hi)})},
                          {"via_box", json::array({point_json(r.via_lo), point_json(r.via_hi)})},
                          {"exit_box", json::array({point_json(r.exit_lo), point_json(r.exit_hi)})},
                          {"speed", json::array({r.speed_min, r.speed_max})},
                          {"start_time", json::array({r.start_time_min, r.start_time_max})},
                          {"radius", r.radius}};
  }
  j["lidar"] = {{"num_rays", sc.lidar.num_rays},
                {"max_range", sc.lidar.max_range},
                {"jump_threshold", sc.lidar.jump_threshold},
                {"downsample_spacing", sc.lidar.downsample_spacing},
                {"coverage_radius", sc.lidar.coverage_radius}};
  const MpcParams& p = sc.mpc;
  j["mpc"] = {{"N", p.N},
              {"dt", p.dt},
              {"Q_z", matrix_json<3>(p.Q_z)},
              {"Q_u", matrix_json<2>(p.Q_u)},
              {"Q_du", matrix_json<2>(p.Q_du)},
              {"d_safe", p.d_safe},
              {"d_safe_static", p.d_safe_static},
              {"r_robot", p.r_robot},
              {"v_bounds", interval_json(p.u_min.v, p.u_max.v)},
              {"delta_bounds", interval_json(p.u_min.delta, p.u_max.delta)},
              {"state_bounds",
               {{"x", interval_json(p.z_min[0], p.z_max[0])},
                {"y", interval_json(p.z_min[1], p.z_max[1])},
                {"psi", interval_json(p.z_min[2], p.z_max[2])}}},
              {"feas_tol", p.feas_tol},
              {"opt_tol", p.opt_tol},
              {"max_iter", p.max_iter}};
  return j;
}

void write_scenario(const Scenario& sc, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << scenario_to_json(sc).dump(2) << '\n';
}

void write_log_csv(const std::vector<LogRow>& log, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kLogHeader << '\n';
  for (const auto& r : log) {
    out << r.tau << ',' << r.state.x << ',' << r.state.y << ',' << r.state.psi << ',' << r.input.v << ','
        << r.input.delta << ',' << to_string(r.status) << ',' << r.solve_time * 1e3 << ',' << r.min_clearance << ','
        << (r.collision ? 1 : 0) << '\n';
  }
}

void write_diagnostics_csv(const std::vector<LogRow>& log, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "step,tau,planner_ms,static_clearance,boundary_clearance,set_clearance,used_fallback,no_feasible,recovery,"
         "feasibility_worst,terminal_residual,num_boundaries,num_visible\n";
  for (const auto& r : log) {
    out << r.step << ',' << r.tau << ',' << r.planner_time * 1e3 << ',' << r.static_clearance << ','
        << r.boundary_clearance << ',' << r.set_clearance << ',' << (r.used_fallback ? 1 : 0) << ','
        << (r.no_feasible ? 1 : 0) << ',' << (r.recovery ? 1 : 0) << ',' << r.feasibility.worst() << ',' << r.feasibility.terminal << ','
        << r.num_boundaries << ',' << r.num_visible << '\n';
  }
}

json metrics_to_json(const Metrics& m, bool finished) {
  const auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"finished", finished},
          {"time_to_goal", m.time_to_goal ? json(*m.time_to_goal) : json(nullptr)},
          {"goals_reached", m.goals_reached},
          {"steps", m.steps},
          {"collision", m.collision},
          {"contact_while_moving", m.contact_while_moving},
          {"min_clearance", finite(m.min_clearance)},
          {"min_static_clearance", finite(m.min_static_clearance)},
          {"min_boundary_clearance", finite(m.min_boundary_clearance)},
          {"solve_time", {{"avg", m.solve_avg}, {"max", m.solve_max}, {"std", m.solve_std}}},
          {"step_time", {{"avg", m.step_avg}, {"max", m.step_max}, {"std", m.step_std}}},
          {"infeasible_steps", m.infeasible_steps},
          {"fallback_steps", m.fallback_steps},
          {"no_feasible_steps", m.no_feasible_steps},
          {"recovery_steps", m.recovery_steps},
          {"optimal_steps", m.optimal_steps},
          {"max_terminal_residual", m.max_terminal_residual}};
}

json snapshot_to_json(const Snapshot& s) {
  json j;
  j["step"] = s.step;
  j["tau"] = s.tau;
  j["robot"] = json::array({s.robot.x, s.robot.y, s.robot.psi});
  j["hits"] = json::array();
  for (const auto& h : s.hits) j["hits"].push_back(point_json(h));
  j["circles"] = json::array();
  for (const auto& c : s.circles) j["circles"].push_back(json::array({c.center.x(), c.center.y(), c.radius}));
  j["boundaries"] = json::array();
  for (const auto& b : s.boundaries) j["boundaries"].push_back(json::array({point_json(b.a), point_json(b.b)}));
  j["capsules"] = json::array();
  for (const auto& c : s.capsules) {
    j["capsules"].push_back({{"axis", json::array({point_json(c.axis.a), point_json(c.axis.b)})}, {"radii", c.radii}});
  }
  j["disks"] = json::array();
  for (const auto& d : s.disks) j["disks"].push_back({{"center", point_json(d.center)}, {"radii", d.radii}});
  j["plan"] = json::array();
  for (const auto& z : s.plan) j["plan"].push_back(json::array({z.x, z.y, z.psi}));
  j["agents"] = json::array();
  for (const auto& a : s.agents) {
    j["agents"].push_back({{"position", point_json(a.position)}, {"radius", a.radius}, {"visible", a.visible}});
  }
  return j;
}

Snapshot snapshot_from_json(const json& j) {
  const auto pt = [](const json& p) { return Point2d(p.at(0).get<double>(), p.at(1).get<double>()); };
  Snapshot s;
  s.step = j.at("step").get<int>();
  s.tau = j.at("tau").get<double>();
  const json& r = j.at("robot");
  s.robot = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
  for (const auto& h : j.at("hits")) s.hits.push_back(pt(h));
  for (const auto& c : j.at("circles")) {
    s.circles.push_back({{c.at(0).get<double>(), c.at(1).get<double>()}, c.at(2).get<double>()});
  }
  for (const auto& b : j.at("boundaries")) s.boundaries.push_back({pt(b.at(0)), pt(b.at(1))});
  for (const auto& c : j.at("capsules")) {
    s.capsules.push_back({{pt(c.at("axis").at(0)), pt(c.at("axis").at(1))}, c.at("radii").get<std::vector<double>>()});
  }
  for (const auto& d : j.at("disks")) s.disks.push_back({pt(d.at("center")), d.at("radii").get<std::vector<double>>()});
  for (const auto& z : j.at("plan")) s.plan.push_back({z.at(0).get<double>(), z.at(1).get<double>(), z.at(2).get<double>()});
  for (const auto& a : j.at("agents")) {
    s.agents.push_back({pt(a.at("position")), a.at("radius").get<double>(), a.at("visible").get<bool>()});
  }
  return s;
}

void write_snapshots(const std::vector<Snapshot>& snaps, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& s : snaps) out << snapshot_to_json(s).dump() << '\n';
}

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing snapshot file " + path.string());
  std::vector<Snapshot> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(snapshot_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": corrupt snapshot: " + e.what());
    }
  }
  if (out.empty()) throw std::runtime_error("snapshot file " + path.string() + " is empty");
  return out;
}

std::string render_svg(const World& world, const std::vector<Snapshot>& snaps, std::size_t index) {
  const Snapshot& s = snaps.at(index);
  double xmin = kInf, ymin = kInf, xmax = -kInf, ymax = -kInf;
  const auto grow = [&](const Point2d& p) {
    xmin = std::min(xmin, p.x());
    ymin = std::min(ymin, p.y());
    xmax = std::max(xmax, p.x());
    ymax = std::max(ymax, p.y());
  };
  for (const auto& seg : world.segments()) {
    grow(seg.a);
    grow(seg.b);
  }
  grow(s.robot.position());
  const double pad = 0.3;
  xmin -= pad;
  ymin -= pad;
  xmax += pad;
  ymax += pad;

  std::ostringstream o;
  o << std::setprecision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << xmin << ' ' << -ymax << ' ' << (xmax - xmin) << ' '
    << (ymax - ymin) << "\" width=\"800\" height=\"" << 800.0 * (ymax - ymin) / (xmax - xmin) << "\">\n";
  o << "<title>step " << s.step << " t=" << s.tau << "</title>\n";
  o << "<g transform=\"scale(1,-1)\" stroke-linecap=\"round\">\n";
  for (const auto& poly : world.obstacles) {
    o << "<polygon class=\"obstacle\" fill=\"#4a6fa5\" points=\"";
    for (const auto& v : poly.vertices()) o << v.x() << ',' << v.y() << ' ';
    o << "\"/>\n";
  }
  for (const auto& w : world.walls) {
    o << "<line class=\"wall\" stroke=\"#222\" stroke-width=\"0.04\" x1=\"" << w.a.x() << "\" y1=\"" << w.a.y()
      << "\" x2=\"" << w.b.x() << "\" y2=\"" << w.b.y() << "\"/>\n";
  }
  for (const auto& c : s.capsules) {
    for (std::size_t k = c.radii.size(); k-- > 0;) {
      o << "<line class=\"reach\" stroke=\"#d62728\" stroke-opacity=\"0.08\" stroke-width=\"" << 2.0 * c.radii[k]
        << "\" x1=\"" << c.axis.a.x() << "\" y1=\"" << c.axis.a.y() << "\" x2=\"" << c.axis.b.x() << "\" y2=\""
        << c.axis.b.y() << "\"/>\n";
    }
  }
  for (const auto& d : s.disks) {
    for (std::size_t k = d.radii.size(); k-- > 0;) {
      o << "<circle class=\"reach-disk\" fill=\"#2ca02c\" fill-opacity=\"0.08\" cx=\"" << d.center.x() << "\" cy=\""
        << d.center.y() << "\" r=\"" << d.radii[k] << "\"/>\n";
    }
  }
  for (const auto& b : s.boundaries) {
    o << "<line class=\"boundary\" stroke=\"#d62728\" stroke-width=\"0.02\" x1=\"" << b.a.x() << "\" y1=\"" << b.a.y()
      << "\" x2=\"" << b.b.x() << "\" y2=\"" << b.b.y() << "\"/>\n";
  }
  for (const auto& h : s.hits) {
    o << "<circle class=\"hit\" fill=\"#9467bd\" cx=\"" << h.x() << "\" cy=\"" << h.y() << "\" r=\"0.015\"/>\n";
  }
  o << "<polyline class=\"path\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.02\" points=\"";
  for (std::size_t i = 0; i <= index; ++i) o << snaps[i].robot.x << ',' << snaps[i].robot.y << ' ';
  o << "\"/>\n";
  for (const auto& z : s.plan) {
    o << "<circle class=\"plan\" fill=\"#111\" cx=\"" << z.x << "\" cy=\"" << z.y << "\" r=\"0.025\"/>\n";
  }
  for (const auto& a : s.agents) {
    o << "<circle class=\"agent\" fill=\"" << (a.visible ? "#2ca02c" : "#aaaaaa") << "\" cx=\"" << a.position.x()
      << "\" cy=\"" << a.position.y() << "\" r=\"" << std::max(a.radius, 0.03) << "\"/>\n";
  }
  o << "<circle class=\"robot\" fill=\"#e377c2\" fill-opacity=\"0.7\" cx=\"" << s.robot.x << "\" cy=\"" << s.robot.y
    << "\" r=\"0.2\"/>\n";
  o << "</g>\n</svg>\n";
  return o.str();
}

void write_run_artifacts(const Scenario& sc, const RunResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_scenario(sc, dir / "scenario.json");
  write_log_csv(res.log, dir / "log.csv");
  write_diagnostics_csv(res.log, dir / "diagnostics.csv");
  write_snapshots(res.snapshots, dir / "snapshots.jsonl");
  auto out = open_out(dir / "metrics.json");
  json m = metrics_to_json(res.metrics, res.finished);
  m["scenario"] = sc.name;
  m["mode"] = to_string(sc.mode);
  m["v_target"] = sc.agent_model.v_target;
  out << m.dump(2) << '\n';
}

}  // namespace oampc
