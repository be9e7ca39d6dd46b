#include "gridmapf/grid_map.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridmapf {

GridMap::GridMap(int height, int width) : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  obstacles_.assign(static_cast<std::size_t>(height) * width, 0);
}

GridMap GridMap::from_rows(const std::vector<std::string>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("map has no rows");
  }
  GridMap map(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < map.height_; ++r) {
    const std::string& line = rows[r];
    if (static_cast<int>(line.size()) != map.width_) {
      throw std::invalid_argument("map row " + std::to_string(r) + " has length " +
                                  std::to_string(line.size()) + ", expected " +
                                  std::to_string(map.width_));
    }
    for (int c = 0; c < map.width_; ++c) {
      switch (line[c]) {
        case '.': break;
        case '@': map.obstacles_[map.index({r, c})] = 1; break;
        default:
          throw std::invalid_argument("map row " + std::to_string(r) +
                                      ": unexpected character '" + line[c] + "'");
      }
    }
  }
  return map;
}

void GridMap::set_obstacle(Cell c, bool value) {
  if (!in_bounds(c)) throw std::out_of_range("cell outside map: " + to_string(c));
  obstacles_[index(c)] = value ? 1 : 0;
}

int GridMap::count_obstacles() const {
  return static_cast<int>(std::count(obstacles_.begin(), obstacles_.end(), 1));
}

std::vector<std::string> GridMap::to_rows() const {
  std::vector<std::string> rows(height_, std::string(width_, '.'));
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (obstacles_[index({r, c})]) rows[r][c] = '@';
    }
  }
  return rows;
}

}  // namespace gridmapf
