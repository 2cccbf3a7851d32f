#include "gdg/envs/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gdg/errors.hpp"

namespace gdg::envs {

namespace {

constexpr int kMaxRejections = 10000;

bool inside(const Wall& w, double x, double y) {
  return x >= w.x_min && x <= w.x_max && y >= w.y_min && y <= w.y_max;
}

EnvSpec box_spec(int dim, double goal_radius, int horizon, double step_scale) {
  EnvSpec s;
  s.state_dim = dim;
  s.action_dim = dim;
  s.action_box.assign(dim, Bounds{-1.0, 1.0});
  s.goal_radius = goal_radius;
  s.horizon = horizon;
  s.step_scale = step_scale;
  return s;
}

}  // namespace

MapLayout parse_map(const std::string& text) {
  MapLayout map;
  bool have_world = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double v[4];
    int n = 0;
    while (n < 4 && fields >> v[n]) ++n;
    std::string extra;
    if (n != 4 || (fields >> extra)) {
      throw ConfigError("map line " + std::to_string(line_no) + ": expected four numbers");
    }
    Wall w{v[0], v[1], v[2], v[3]};
    if (!(w.x_max > w.x_min && w.y_max > w.y_min)) {
      throw ConfigError("map line " + std::to_string(line_no) + ": degenerate rectangle");
    }
    if (!have_world) {
      map.world = w;
      have_world = true;
    } else {
      map.walls.push_back(w);
    }
  }
  if (!have_world) throw ConfigError("map has no world bounds line");
  return map;
}

MapLayout load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str());
}

std::string format_map(const MapLayout& map) {
  std::ostringstream os;
  auto row = [&](const Wall& w) {
    os << w.x_min << ' ' << w.y_min << ' ' << w.x_max << ' ' << w.y_max << '\n';
  };
  row(map.world);
  for (const auto& w : map.walls) row(w);
  return os.str();
}

Environment::Environment(std::string name, MapLayout map, EnvSpec spec)
    : name_(std::move(name)), spec_(std::move(spec)), walls_(std::move(map.walls)) {
  if (spec_.state_dim != 2 || spec_.action_dim != 2) {
    throw ContractError("walled environments are two-dimensional");
  }
  lower_ = RealVec{{map.world.x_min, map.world.y_min}};
  upper_ = RealVec{{map.world.x_max, map.world.y_max}};
  build_grid();
}

Environment::Environment(std::string name, RealVec lower, RealVec upper, EnvSpec spec)
    : name_(std::move(name)), spec_(std::move(spec)), lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != spec_.state_dim || upper_.size() != spec_.state_dim) {
    throw ContractError("world bounds do not match state_dim");
  }
}

void Environment::build_grid() {
  const double s = spec_.step_scale;
  const int w = static_cast<int>(std::lround((upper_(0) - lower_(0)) / s));
  const int h = static_cast<int>(std::lround((upper_(1) - lower_(1)) / s));
  std::vector<std::uint8_t> free(static_cast<std::size_t>(w) * h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double cx = lower_(0) + (x + 0.5) * s;
      const double cy = lower_(1) + (y + 0.5) * s;
      for (const auto& wall : walls_) {
        if (inside(wall, cx, cy)) {
          free[static_cast<std::size_t>(y) * w + x] = 0;
          break;
        }
      }
    }
  }
  grid_ = OccupancyGrid(w, h, std::move(free));
}

const OccupancyGrid& Environment::grid() const {
  if (!grid_) throw ContractError(name_ + " has no grid; use the analytic distance");
  return *grid_;
}

Cell Environment::cell_of(const RealVec& p) const {
  const auto& g = grid();
  const double s = spec_.step_scale;
  const int x = std::clamp(static_cast<int>(std::floor((p(0) - lower_(0)) / s)), 0, g.width() - 1);
  const int y = std::clamp(static_cast<int>(std::floor((p(1) - lower_(1)) / s)), 0, g.height() - 1);
  return {x, y};
}

RealVec Environment::cell_center(Cell c) const {
  const double s = spec_.step_scale;
  return RealVec{{lower_(0) + (c.x + 0.5) * s, lower_(1) + (c.y + 0.5) * s}};
}

int Environment::bfs_distance(Cell a, Cell b) const { return grid().bfs_distance(a, b); }

double Environment::euclidean(const RealVec& a, const RealVec& b) const { return (a - b).norm(); }

bool Environment::is_free(const RealVec& p) const {
  if (p.size() != spec_.state_dim) return false;
  for (int i = 0; i < spec_.state_dim; ++i) {
    if (!(p(i) >= lower_(i) && p(i) <= upper_(i))) return false;
  }
  for (const auto& w : walls_) {
    if (inside(w, p(0), p(1))) return false;
  }
  return true;
}

RealVec Environment::sample_free(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealVec p(spec_.state_dim);
  for (int tries = 0; tries < kMaxRejections; ++tries) {
    for (int i = 0; i < spec_.state_dim; ++i) p(i) = lower_(i) + u(rng) * (upper_(i) - lower_(i));
    if (is_free(p)) return p;
  }
  throw ConfigError(name_ + ": no free space found after 10^4 samples");
}

void Environment::set_fixed_task(Task task) {
  if (!is_free(task.start) || !is_free(task.goal)) throw ConfigError("fixed task lies inside a wall");
  fixed_task_ = std::move(task);
}

EnvState Environment::reset(Rng& rng, const std::optional<Task>& task) const {
  const std::optional<Task>& chosen = task ? task : fixed_task_;
  if (chosen) {
    if (chosen->start.size() != spec_.state_dim || chosen->goal.size() != spec_.state_dim) {
      throw ContractError("task dimension mismatch");
    }
    return {chosen->start, 0, chosen->goal};
  }
  RealVec start = sample_free(rng);
  for (int tries = 0; tries < kMaxRejections; ++tries) {
    RealVec goal = sample_free(rng);
    if (goal != start) return {std::move(start), 0, std::move(goal)};
  }
  throw ConfigError(name_ + ": could not sample a goal distinct from the start");
}

RealVec Environment::clamp_action(const RealVec& action) const {
  if (action.size() != spec_.action_dim) throw ContractError("action dimension mismatch");
  RealVec a = action;
  for (int i = 0; i < spec_.action_dim; ++i) {
    const auto& b = spec_.action_box[i];
    a(i) = std::isfinite(a(i)) ? std::clamp(a(i), b.lo, b.hi) : 0.0;
  }
  return a;
}

bool Environment::blocked(const RealVec& from, int axis, double to) const {
  if (walls_.empty()) return false;
  const int other = 1 - axis;
  const double lo = std::min(from(axis), to);
  const double hi = std::max(from(axis), to);
  const double fixed = from(other);
  for (const auto& w : walls_) {
    const double w_lo = axis == 0 ? w.x_min : w.y_min;
    const double w_hi = axis == 0 ? w.x_max : w.y_max;
    const double o_lo = axis == 0 ? w.y_min : w.x_min;
    const double o_hi = axis == 0 ? w.y_max : w.x_max;
    if (fixed >= o_lo && fixed <= o_hi && hi >= w_lo && lo <= w_hi) return true;
  }
  return false;
}

StepResult Environment::step(const EnvState& state, const RealVec& action) const {
  const RealVec a = clamp_action(action);
  EnvState next = state;
  for (int axis = 0; axis < spec_.state_dim; ++axis) {
    const double target = std::clamp(next.position(axis) + spec_.step_scale * a(axis), lower_(axis), upper_(axis));
    if (!blocked(next.position, axis, target)) next.position(axis) = target;
  }
  next.steps_taken += 1;
  const bool reached = goal_reached(next.position, next.goal);
  return {std::move(next), reached};
}

bool Environment::goal_reached(const RealVec& position, const RealVec& goal) const {
  return (position - goal).norm() <= spec_.goal_radius;
}

namespace {

EnvSpec maze_spec() { return box_spec(2, 1.5, 500, 1.0); }

Environment from_asset(const std::string& name) {
  return Environment(name, parse_map(map_asset(name)), maze_spec());
}

}  // namespace

Environment make_four_rooms() { return from_asset("four_rooms"); }
Environment make_city() { return from_asset("city"); }
Environment make_city_desk() { return from_asset("city_desk"); }

Environment make_trap() {
  Environment env = from_asset("trap");
  env.set_fixed_task({RealVec{{2.5, 4.5}}, RealVec{{18.5, 4.5}}});
  env.set_trap_point(RealVec{{10.5, 4.5}});
  return env;
}

Environment make_reach3d() {
  return Environment("reach3d", RealVec::Constant(3, -1.0), RealVec::Constant(3, 1.0),
                     box_spec(3, 0.1, 50, 0.1));
}

std::vector<std::string> env_names() { return {"four_rooms", "city", "city_desk", "trap", "reach3d"}; }

Environment make_env(const std::string& name) {
  if (name == "four_rooms") return make_four_rooms();
  if (name == "city") return make_city();
  if (name == "city_desk") return make_city_desk();
  if (name == "trap") return make_trap();
  if (name == "reach3d") return make_reach3d();
  throw ConfigError("unknown environment: " + name);
}

}  // namespace gdg::envs
