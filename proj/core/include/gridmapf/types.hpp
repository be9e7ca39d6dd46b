#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace gridmapf {

/// A grid coordinate. Row 0 is the top row, column 0 the leftmost column.
struct Cell {
  int row = 0;
  int col = 0;

  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

constexpr int manhattan(Cell a, Cell b) {
  return (a.row > b.row ? a.row - b.row : b.row - a.row) +
         (a.col > b.col ? a.col - b.col : b.col - a.col);
}

/// The five agent actions. The integer encoding is part of the demo file
/// format and the external policy protocol and must never change.
enum class Action : std::uint8_t {
  Stay = 0,
  North = 1,
  East = 2,
  South = 3,
  West = 4,
};

inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Stay, Action::North, Action::East, Action::South, Action::West};

/// One boolean per action, indexed by the action encoding.
using ActionMask = std::array<bool, kNumActions>;

constexpr int to_index(Action a) { return static_cast<int>(a); }

/// Throws std::out_of_range for codes outside 0..4.
Action action_from_index(int code);

constexpr Cell apply(Cell c, Action a) {
  switch (a) {
    case Action::North: return {c.row - 1, c.col};
    case Action::East: return {c.row, c.col + 1};
    case Action::South: return {c.row + 1, c.col};
    case Action::West: return {c.row, c.col - 1};
    case Action::Stay: break;
  }
  return c;
}

/// The action that moves `from` to `to`, or nullopt if they are not equal or
/// 4-adjacent.
std::optional<Action> action_between(Cell from, Cell to);

std::string_view action_name(Action a);

std::string to_string(Cell c);

/// Format version tags written into every file this library emits.
inline constexpr std::string_view kScenarioFormatVersion = "gridmapf-scenario/1";
inline constexpr std::string_view kPlanFormatVersion = "gridmapf-plan/1";
inline constexpr std::string_view kDemoFormatVersion = "gridmapf-demo/1";
inline constexpr std::string_view kObservationLayoutVersion = "gridmapf-obs/1";
inline constexpr std::string_view kProtocolVersion = "gridmapf-wire/1";

}  // namespace gridmapf

template <>
struct std::hash<gridmapf::Cell> {
  std::size_t operator()(const gridmapf::Cell& c) const noexcept {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.row)) << 32) |
        static_cast<std::uint32_t>(c.col));
  }
};
