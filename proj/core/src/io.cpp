#include "gridmapf/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gridmapf {

using nlohmann::json;

namespace {

json cell_json(Cell c) { return json::array({c.row, c.col}); }

Cell parse_cell(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw FormatError("expected a [row, col] pair, got " + j.dump());
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

void check_format(const json& j, std::string_view expected) {
  if (!j.contains("format")) return;
  if (j.at("format").get<std::string>() != expected) {
    throw FormatError("unsupported format '" + j.at("format").get<std::string>() + "', expected '" +
                      std::string(expected) + "'");
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

Scenario scenario_from_world(const GridWorld& world) {
  return {world.map(), world.positions(), world.goals(), std::nullopt, std::nullopt};
}

std::string map_to_text(const GridMap& map) {
  std::string out;
  for (const std::string& row : map.to_rows()) out += row + '\n';
  return out;
}

GridMap parse_map_text(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  try {
    return GridMap::from_rows(rows);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::string scenario_to_json(const Scenario& s) {
  json agents = json::array();
  for (std::size_t i = 0; i < s.starts.size(); ++i) {
    agents.push_back({{"id", i}, {"start", cell_json(s.starts[i])}, {"goal", cell_json(s.goals[i])}});
  }
  json j = {{"format", kScenarioFormatVersion},
            {"width", s.map.width()},
            {"height", s.map.height()},
            {"obstacles", s.map.to_rows()},
            {"agents", agents}};
  if (s.seed) j["seed"] = *s.seed;
  if (s.density) j["density"] = *s.density;
  return j.dump(2) + '\n';
}

Scenario parse_scenario_json(const std::string& text) {
  const json j = parse_json(text);
  try {
    check_format(j, kScenarioFormatVersion);
    Scenario s;
    s.map = GridMap::from_rows(j.at("obstacles").get<std::vector<std::string>>());
    if (s.map.width() != j.at("width").get<int>() || s.map.height() != j.at("height").get<int>()) {
      throw FormatError("scenario width/height do not match the obstacle rows");
    }
    const json& agents = j.at("agents");
    s.starts.resize(agents.size());
    s.goals.resize(agents.size());
    std::vector<bool> seen(agents.size(), false);
    for (const json& a : agents) {
      const auto id = a.at("id").get<std::size_t>();
      if (id >= agents.size() || seen[id]) throw FormatError("agent ids must be 0..n-1, each once");
      seen[id] = true;
      s.starts[id] = parse_cell(a.at("start"));
      s.goals[id] = parse_cell(a.at("goal"));
    }
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("density")) s.density = j["density"].get<double>();
    (void)s.world();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
}

std::string plan_to_json(const PlanFile& p) {
  json paths = json::array();
  for (const Path& path : p.plan.paths) {
    json cells = json::array();
    for (Cell c : path.positions) cells.push_back(cell_json(c));
    paths.push_back(std::move(cells));
  }
  const json j = {{"format", kPlanFormatVersion},
                  {"algorithm", p.algorithm},
                  {"mode", mode_name(p.mode)},
                  {"cost", p.plan.cost},
                  {"makespan", p.plan.makespan},
                  {"wall_seconds", p.wall_seconds},
                  {"paths", paths}};
  return j.dump() + '\n';
}

PlanFile parse_plan_json(const std::string& text) {
  const json j = parse_json(text);
  try {
    check_format(j, kPlanFormatVersion);
    PlanFile p;
    p.algorithm = j.value("algorithm", "");
    p.mode = parse_mode(j.value("mode", "standard"));
    p.wall_seconds = j.value("wall_seconds", 0.0);
    p.plan.cost = j.at("cost").get<int>();
    p.plan.makespan = j.at("makespan").get<int>();
    for (const json& cells : j.at("paths")) {
      Path path;
      for (const json& c : cells) path.positions.push_back(parse_cell(c));
      if (path.positions.empty()) throw FormatError("plan contains an empty path");
      p.plan.paths.push_back(std::move(path));
    }
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("plan: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("plan: ") + e.what());
  }
}

char agent_symbol(int agent) {
  static constexpr std::string_view kSymbols =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  return kSymbols[static_cast<std::size_t>(agent) % kSymbols.size()];
}

std::string render_frame(const GridMap& map, std::span<const Cell> positions,
                         std::span<const Cell> goals) {
  std::vector<std::string> rows = map.to_rows();
  for (Cell g : goals) {
    if (map.in_bounds(g)) rows[g.row][g.col] = '+';
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Cell p = positions[i];
    if (map.in_bounds(p)) rows[p.row][p.col] = agent_symbol(static_cast<int>(i));
  }
  std::string out;
  for (const std::string& r : rows) out += r + '\n';
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

}  // namespace gridmapf
