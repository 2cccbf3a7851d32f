#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gdg/envs/grid.hpp"
#include "gdg/types.hpp"

namespace gdg::envs {

struct Bounds {
  double lo = -1.0;
  double hi = 1.0;
};

struct EnvSpec {
  int state_dim = 2;
  int action_dim = 2;
  std::vector<Bounds> action_box;
  double goal_radius = 1.5;
  int horizon = 500;
  double step_scale = 1.0;  // displacement per unit action
};

/// Axis-aligned rectangle in world units.
struct Wall {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

/// A parsed map asset: world bounds plus walls.
struct MapLayout {
  Wall world;
  std::vector<Wall> walls;
};

/// Map text: first non-comment line holds the world bounds
/// "x_min y_min x_max y_max", then one wall rectangle per line. '#' starts a comment.
MapLayout parse_map(const std::string& text);
MapLayout load_map_file(const std::string& path);
std::string format_map(const MapLayout& map);

struct EnvState {
  RealVec position;
  int steps_taken = 0;
  RealVec goal;
};

struct Task {
  RealVec start;
  RealVec goal;
};

struct StepResult {
  EnvState state;
  bool reached = false;
};

/// Point mass in a bounded box. Two-dimensional instances may carry walls;
/// movement is applied one axis at a time and an axis move that would cross
/// a wall is dropped, so the agent slides along obstacles.
class Environment {
 public:
  /// 2-D world with walls; walls must sit on whole-cell boundaries.
  Environment(std::string name, MapLayout map, EnvSpec spec);
  /// Wall-free box of arbitrary dimension.
  Environment(std::string name, RealVec lower, RealVec upper, EnvSpec spec);

  const std::string& name() const { return name_; }
  const EnvSpec& spec() const { return spec_; }
  const RealVec& lower() const { return lower_; }
  const RealVec& upper() const { return upper_; }
  const std::vector<Wall>& walls() const { return walls_; }

  /// Samples start and goal over free space, or uses `task` (or the
  /// environment's fixed task) verbatim. Throws ConfigError after 10^4
  /// rejected samples.
  EnvState reset(Rng& rng, const std::optional<Task>& task = std::nullopt) const;
  StepResult step(const EnvState& state, const RealVec& action) const;

  bool goal_reached(const RealVec& position, const RealVec& goal) const;
  bool is_free(const RealVec& position) const;
  RealVec sample_free(Rng& rng) const;
  RealVec clamp_action(const RealVec& action) const;

  std::optional<Task> fixed_task() const { return fixed_task_; }
  void set_fixed_task(Task task);

  /// Representative point of a local optimum, when the map defines one.
  std::optional<RealVec> trap_point() const { return trap_point_; }
  void set_trap_point(RealVec p) { trap_point_ = std::move(p); }

  bool has_grid() const { return grid_.has_value(); }
  const OccupancyGrid& grid() const;
  Cell cell_of(const RealVec& position) const;
  RealVec cell_center(Cell c) const;
  int bfs_distance(Cell a, Cell b) const;

  /// Euclidean ‖a−b‖₂. Exact shortest distance only for wall-free worlds.
  double euclidean(const RealVec& a, const RealVec& b) const;

 private:
  bool blocked(const RealVec& from, int axis, double to) const;
  void build_grid();

  std::string name_;
  EnvSpec spec_;
  RealVec lower_;
  RealVec upper_;
  std::vector<Wall> walls_;
  std::optional<OccupancyGrid> grid_;
  std::optional<Task> fixed_task_;
  std::optional<RealVec> trap_point_;
};

Environment make_four_rooms();
Environment make_city();
Environment make_city_desk();
Environment make_trap();
Environment make_reach3d();

/// four_rooms, city, city_desk, trap, reach3d
Environment make_env(const std::string& name);
std::vector<std::string> env_names();

/// Embedded text of a shipped map asset (four_rooms, city, city_desk, trap).
const std::string& map_asset(const std::string& name);

}  // namespace gdg::envs
