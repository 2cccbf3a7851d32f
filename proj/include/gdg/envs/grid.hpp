#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace gdg::envs {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Occupancy grid at one cell per step_scale; 4-neighbour connectivity.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, std::vector<std::uint8_t> free);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool is_free(Cell c) const { return in_bounds(c) && free_[index(c)] != 0; }
  std::vector<Cell> free_cells() const;

  /// Hop counts from `from` to every cell (kUnreachable for walls and
  /// disconnected cells), indexed by y * width + x.
  std::vector<int> bfs_from(Cell from) const;
  int bfs_distance(Cell a, Cell b) const;

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> free_;
};

struct GridDiameter {
  int distance = 0;
  Cell from;
  Cell to;
  bool connected = true;
};

/// Exhaustive all-pairs BFS.
GridDiameter grid_diameter(const OccupancyGrid& grid);

}  // namespace gdg::envs
