#include "gdg/envs/grid.hpp"

#include <deque>

#include "gdg/errors.hpp"

namespace gdg::envs {

OccupancyGrid::OccupancyGrid(int width, int height, std::vector<std::uint8_t> free)
    : width_(width), height_(height), free_(std::move(free)) {
  if (width <= 0 || height <= 0 || free_.size() != static_cast<std::size_t>(width) * height) {
    throw ContractError("OccupancyGrid: inconsistent dimensions");
  }
}

std::vector<Cell> OccupancyGrid::free_cells() const {
  std::vector<Cell> out;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (free_[index({x, y})]) out.push_back({x, y});
    }
  }
  return out;
}

std::vector<int> OccupancyGrid::bfs_from(Cell from) const {
  if (!is_free(from)) throw ContractError("bfs_from: start cell is not free");
  std::vector<int> dist(free_.size(), kUnreachable);
  std::deque<Cell> queue{from};
  dist[index(from)] = 0;
  constexpr int dx[4] = {1, -1, 0, 0};
  constexpr int dy[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    const int d = dist[index(c)];
    for (int k = 0; k < 4; ++k) {
      const Cell n{c.x + dx[k], c.y + dy[k]};
      if (!is_free(n) || dist[index(n)] != kUnreachable) continue;
      dist[index(n)] = d + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

int OccupancyGrid::bfs_distance(Cell a, Cell b) const {
  if (!is_free(a) || !is_free(b)) throw ContractError("bfs_distance: cell inside a wall");
  if (a == b) return 0;
  return bfs_from(a)[index(b)];
}

GridDiameter grid_diameter(const OccupancyGrid& grid) {
  GridDiameter best;
  const auto cells = grid.free_cells();
  for (const Cell& c : cells) {
    const auto dist = grid.bfs_from(c);
    for (const Cell& o : cells) {
      const int d = dist[grid.index(o)];
      if (d == kUnreachable) {
        best.connected = false;
        continue;
      }
      if (d > best.distance) best = {d, c, o, best.connected};
    }
  }
  return best;
}

}  // namespace gdg::envs
