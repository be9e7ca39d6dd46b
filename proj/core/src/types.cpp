#include "gridmapf/types.hpp"

#include <stdexcept>

namespace gridmapf {

Action action_from_index(int code) {
  if (code < 0 || code >= kNumActions) {
    throw std::out_of_range("action code out of range: " + std::to_string(code));
  }
  return static_cast<Action>(code);
}

std::optional<Action> action_between(Cell from, Cell to) {
  for (Action a : kAllActions) {
    if (apply(from, a) == to) return a;
  }
  return std::nullopt;
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Stay: return "stay";
    case Action::North: return "north";
    case Action::East: return "east";
    case Action::South: return "south";
    case Action::West: return "west";
  }
  return "?";
}

std::string to_string(Cell c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

}  // namespace gridmapf
