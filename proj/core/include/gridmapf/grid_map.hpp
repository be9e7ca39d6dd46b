#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridmapf/types.hpp"

namespace gridmapf {

/// Static obstacle layout of a rectangular 4-connected grid.
class GridMap {
 public:
  GridMap() = default;
  /// An obstacle-free height x width grid.
  GridMap(int height, int width);
  /// Parses rows of '.' (free) and '@' (obstacle). All rows must have equal
  /// length. Throws std::invalid_argument on any other character.
  static GridMap from_rows(const std::vector<std::string>& rows);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_cells() const { return width_ * height_; }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  /// Out-of-bounds cells count as blocked.
  bool blocked(Cell c) const { return !in_bounds(c) || obstacles_[index(c)] != 0; }
  bool passable(Cell c) const { return !blocked(c); }
  void set_obstacle(Cell c, bool value);

  int index(Cell c) const { return c.row * width_ + c.col; }
  Cell cell(int index) const { return {index / width_, index % width_}; }

  int count_obstacles() const;
  std::vector<std::string> to_rows() const;

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> obstacles_;
};

}  // namespace gridmapf
