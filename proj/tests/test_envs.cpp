#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "gdg/envs/environment.hpp"
#include "gdg/errors.hpp"

using namespace gdg;
using namespace gdg::envs;

namespace {

RealVec v2(double x, double y) {
  RealVec v(2);
  v << x, y;
  return v;
}

EnvSpec planar_spec() {
  EnvSpec spec;
  spec.action_box = {{-1, 1}, {-1, 1}};
  return spec;
}

Environment open_room() { return Environment("open", parse_map("0 0 20 20\n"), planar_spec()); }

// Independent flood fill straight from the wall list, sharing no code with OccupancyGrid.
std::vector<int> flood_fill(const Environment& env, int sx, int sy) {
  const int w = static_cast<int>(env.upper()(0) - env.lower()(0));
  const int h = static_cast<int>(env.upper()(1) - env.lower()(1));
  auto open = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return false;
    const double cx = env.lower()(0) + x + 0.5, cy = env.lower()(1) + y + 0.5;
    for (const auto& wall : env.walls()) {
      if (cx >= wall.x_min && cx <= wall.x_max && cy >= wall.y_min && cy <= wall.y_max) return false;
    }
    return true;
  };
  std::vector<int> dist(static_cast<std::size_t>(w * h), -1);
  std::deque<std::pair<int, int>> q{{sx, sy}};
  dist[static_cast<std::size_t>(sy * w + sx)] = 0;
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop_front();
    const int d = dist[static_cast<std::size_t>(y * w + x)];
    const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k], ny = y + dy[k];
      if (open(nx, ny) && dist[static_cast<std::size_t>(ny * w + nx)] < 0) {
        dist[static_cast<std::size_t>(ny * w + nx)] = d + 1;
        q.emplace_back(nx, ny);
      }
    }
  }
  return dist;
}

}  // namespace

TEST(MapFormat, ParsesBoundsWallsAndComments) {
  const MapLayout m = parse_map("# demo\n0 0 10 8\n\n2 0 3 5  # a wall\n");
  EXPECT_DOUBLE_EQ(m.world.x_max, 10.0);
  EXPECT_DOUBLE_EQ(m.world.y_max, 8.0);
  ASSERT_EQ(m.walls.size(), 1u);
  EXPECT_DOUBLE_EQ(m.walls[0].y_max, 5.0);
}

TEST(MapFormat, RoundTrips) {
  const MapLayout m = parse_map(map_asset("four_rooms"));
  const MapLayout back = parse_map(format_map(m));
  ASSERT_EQ(back.walls.size(), m.walls.size());
  for (std::size_t i = 0; i < m.walls.size(); ++i) {
    EXPECT_DOUBLE_EQ(back.walls[i].x_min, m.walls[i].x_min);
    EXPECT_DOUBLE_EQ(back.walls[i].y_max, m.walls[i].y_max);
  }
}

TEST(MapFormat, RejectsDegenerateRectangles) {
  EXPECT_THROW(parse_map("0 0 10 10\n3 3 3 5\n"), ConfigError);
  EXPECT_THROW(parse_map("0 0 10 10\n1 2 3\n"), ConfigError);
  EXPECT_THROW(parse_map("# only a comment\n"), ConfigError);
}

TEST(Reset, FixedTaskReturnedExactly) {
  const Environment env = open_room();
  Rng rng(1);
  const EnvState s = env.reset(rng, Task{v2(1.5, 2.5), v2(9.5, 3.5)});
  EXPECT_EQ(s.position, v2(1.5, 2.5));
  EXPECT_EQ(s.goal, v2(9.5, 3.5));
  EXPECT_EQ(s.steps_taken, 0);
}

TEST(Reset, CityStartsNeverInsideWalls) {
  const Environment env = make_city();
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const EnvState s = env.reset(rng);
    ASSERT_TRUE(env.is_free(s.position));
    ASSERT_TRUE(env.is_free(s.goal));
    ASSERT_NE(s.position, s.goal);
  }
}

TEST(Reset, TrapIsSingleGoal) {
  const Environment env = make_trap();
  Rng rng(3);
  const auto task = env.fixed_task();
  ASSERT_TRUE(task.has_value());
  for (int i = 0; i < 20; ++i) {
    const EnvState s = env.reset(rng);
    EXPECT_EQ(s.position, task->start);
    EXPECT_EQ(s.goal, task->goal);
  }
}

TEST(Reset, NoFreeSpaceIsConfigurationError) {
  const Environment env("full", parse_map("0 0 4 4\n0 0 4 4\n"), planar_spec());
  Rng rng(4);
  EXPECT_THROW(env.reset(rng), ConfigError);
}

TEST(Step, ZeroActionStaysPut) {
  const Environment env = open_room();
  Rng rng(5);
  const EnvState s = env.reset(rng, Task{v2(5, 5), v2(15, 15)});
  const StepResult r = env.step(s, v2(0, 0));
  EXPECT_EQ(r.state.position, s.position);
  EXPECT_FALSE(r.reached);
  EXPECT_EQ(r.state.steps_taken, 1);
}

TEST(Step, SlidesAlongWall) {
  const Environment env("wall", parse_map("0 0 20 20\n10 0 11 20\n"), planar_spec());
  Rng rng(6);
  const EnvState s = env.reset(rng, Task{v2(9.5, 5.0), v2(2, 2)});
  const StepResult r = env.step(s, v2(1.0, 1.0));
  EXPECT_DOUBLE_EQ(r.state.position(0), 9.5);
  EXPECT_DOUBLE_EQ(r.state.position(1), 6.0);
}

TEST(Step, StraightLineKinematics) {
  const Environment env = open_room();
  Rng rng(7);
  EnvState s = env.reset(rng, Task{v2(2, 10), v2(19, 19)});
  for (int i = 0; i < 12; ++i) s = env.step(s, v2(1, 0)).state;
  EXPECT_NEAR(s.position(0), 14.0, 1e-12);
  EXPECT_EQ(s.steps_taken, 12);
}

TEST(Step, ClampsOutOfBoxActionsAndWorldBounds) {
  const Environment env = open_room();
  Rng rng(8);
  EnvState s = env.reset(rng, Task{v2(0.5, 0.5), v2(10, 10)});
  s = env.step(s, v2(-5, 3)).state;
  EXPECT_DOUBLE_EQ(s.position(0), 0.0);
  EXPECT_DOUBLE_EQ(s.position(1), 1.5);
  const RealVec nan_action = v2(std::numeric_limits<double>::quiet_NaN(), 0.2);
  EXPECT_TRUE(env.clamp_action(nan_action).allFinite());
}

TEST(Step, ReachedWithinGoalRadius) {
  const Environment env = open_room();
  Rng rng(9);
  const EnvState s = env.reset(rng, Task{v2(5, 5), v2(7.4, 5)});
  EXPECT_FALSE(env.step(s, v2(0.8, 0)).reached);
  EXPECT_TRUE(env.step(s, v2(1.0, 0)).reached);
}

TEST(Property, RandomActionsNeverEnterWalls) {
  const Environment env = make_city();
  Rng rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EnvState s = env.reset(rng);
  for (int i = 0; i < 1000000; ++i) {
    s = env.step(s, v2(u(rng), u(rng))).state;
    if (!env.is_free(s.position)) FAIL() << "inside wall at step " << i;
  }
}

TEST(Property, OpenSpaceReversibility) {
  const Environment env = open_room();
  Rng rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const EnvState s = env.reset(rng, Task{v2(10, 10), v2(0.5, 0.5)});
    const RealVec a = v2(u(rng), u(rng));
    const EnvState there = env.step(s, a).state;
    const EnvState back = env.step(there, -a).state;
    EXPECT_LT((back.position - s.position).norm(), 1e-6);
  }
}

TEST(Bfs, SameAndAdjacentCells) {
  const Environment env = make_four_rooms();
  EXPECT_EQ(env.bfs_distance({3, 3}, {3, 3}), 0);
  EXPECT_EQ(env.bfs_distance({3, 3}, {4, 3}), 1);
}

TEST(Bfs, WallCellIsContractViolation) {
  const Environment env = make_four_rooms();
  EXPECT_THROW(env.bfs_distance({30, 5}, {3, 3}), ContractError);
}

TEST(Bfs, DisconnectedIsUnreachable) {
  const Environment env("split", parse_map("0 0 10 4\n5 0 6 4\n"), planar_spec());
  EXPECT_EQ(env.bfs_distance({1, 1}, {8, 1}), kUnreachable);
}

TEST(Bfs, FourRoomsCornersMatchIndependentFloodFill) {
  const Environment env = make_four_rooms();
  const auto oracle = flood_fill(env, 0, 0);
  const int w = env.grid().width();
  const int h = env.grid().height();
  EXPECT_EQ(env.bfs_distance({0, 0}, {w - 1, h - 1}), oracle[static_cast<std::size_t>((h - 1) * w + w - 1)]);
  const auto ours = env.grid().bfs_from({0, 0});
  for (std::size_t i = 0; i < ours.size(); ++i) {
    EXPECT_EQ(ours[i] == kUnreachable ? -1 : ours[i], oracle[i]) << "cell " << i;
  }
}

TEST(Bfs, SymmetricAndTriangleOnAuthoredMaps) {
  Rng rng(12);
  for (const std::string name : {"four_rooms", "city", "city_desk", "trap"}) {
    const Environment env = make_env(name);
    const auto cells = env.grid().free_cells();
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    for (int t = 0; t < 30; ++t) {
      const Cell a = cells[pick(rng)], b = cells[pick(rng)], m = cells[pick(rng)];
      const auto from_a = env.grid().bfs_from(a);
      const auto from_m = env.grid().bfs_from(m);
      const int ab = from_a[env.grid().index(b)];
      EXPECT_EQ(ab, env.bfs_distance(b, a)) << name;
      EXPECT_LE(ab, from_a[env.grid().index(m)] + from_m[env.grid().index(b)]) << name;
    }
  }
}

TEST(Calibration, FourRoomsDiameter) {
  const GridDiameter d = grid_diameter(make_four_rooms().grid());
  EXPECT_TRUE(d.connected);
  EXPECT_GE(d.distance, 110);
  EXPECT_LE(d.distance, 130);
}

TEST(Calibration, CityDiameter) {
  const GridDiameter d = grid_diameter(make_city().grid());
  EXPECT_TRUE(d.connected);
  EXPECT_GE(d.distance, 220);
  EXPECT_LE(d.distance, 260);
}

TEST(Calibration, CityDeskDiameter) {
  const GridDiameter d = grid_diameter(make_city_desk().grid());
  EXPECT_TRUE(d.connected);
  EXPECT_GE(d.distance, 110);
  EXPECT_LE(d.distance, 130);
}

TEST(Calibration, TrapHopCounts) {
  const Environment env = make_trap();
  const Task task = *env.fixed_task();
  const Cell start = env.cell_of(task.start);
  EXPECT_LE(env.bfs_distance(start, env.cell_of(*env.trap_point())), 10);
  EXPECT_GE(env.bfs_distance(start, env.cell_of(task.goal)), 80);
  // The trap pocket sits closer to the goal than the start does.
  EXPECT_LT(env.euclidean(*env.trap_point(), task.goal), env.euclidean(task.start, task.goal));
}

TEST(Reach3d, OpenBoxWithoutGrid) {
  const Environment env = make_reach3d();
  EXPECT_FALSE(env.has_grid());
  EXPECT_EQ(env.spec().state_dim, 3);
  EXPECT_THROW(env.grid(), ContractError);
  RealVec a(3), b(3);
  a << 0.1, 0.2, 0.3;
  b << -0.5, 0.2, 0.7;
  EXPECT_DOUBLE_EQ(env.euclidean(a, b), (a - b).norm());
}

TEST(Factory, KnownNamesAndUnknownThrows) {
  for (const auto& name : env_names()) EXPECT_EQ(make_env(name).name(), name);
  EXPECT_THROW(make_env("nowhere"), ConfigError);
}
