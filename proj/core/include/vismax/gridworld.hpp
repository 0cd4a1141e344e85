#pragma once

#include "vismax/mdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vismax {

struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Headings in clockwise order; turning right adds one.
enum class Orientation { East = 0, South = 1, West = 2, North = 3 };

/// Action indices of the gridworld.
enum GridAction : std::size_t { kTurnLeft = 0, kTurnRight = 1, kForward = 2, kStay = 3 };

inline constexpr std::size_t kGridActions = 4;
inline constexpr std::size_t kOrientations = 4;

struct FixedStart {
  Cell cell;
  Orientation orientation = Orientation::East;
};

/**
 * Rectangular grid of width x height cells. Cells outside the rectangle act
 * as walls. `start` unset means the initial state is uniform over every free
 * non-goal cell and orientation.
 */
struct GridSpec {
  int width = 0;
  int height = 0;
  std::vector<Cell> walls;
  std::optional<Cell> goal;
  std::optional<FixedStart> start;
  std::string layout_name;

  bool is_wall(Cell c) const;
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
};

/// Built environment. Feature k is the position `cells[k]`; state index is
/// position * 4 + orientation.
struct Gridworld {
  GridSpec spec;
  TabularMdp mdp;
  FeatureMap features;
  std::vector<Cell> cells;

  std::size_t state_of(Cell c, Orientation o) const;
  std::size_t cell_index(Cell c) const;
  std::size_t feature_of_state(std::size_t s) const { return s / kOrientations; }
  std::size_t n_features() const { return cells.size(); }
};

Gridworld build_gridworld(const GridSpec& spec, double gamma);

/**
 * Parses an ASCII map: rows separated by '/' or newlines, '#' wall, '.' free,
 * 'S' fixed start facing east, 'G' goal. A map without 'S' uses a uniform
 * random start.
 */
GridSpec parse_grid_map(const std::string& map, const std::string& name);

/// Renders the layout in the same ASCII alphabet parse_grid_map accepts.
std::string render_grid(const GridSpec& spec);

struct LayoutOptions {
  bool random_start = false;
  bool with_goal = false;
  /// Overrides for the resizable layouts (empty-room, corridor); 0 keeps the default.
  int width = 0;
  int height = 0;
};

/// Built-in layouts: empty-room, two-rooms, four-rooms, corridor. A "-random"
/// suffix on the name selects the uniform-random start variant.
GridSpec make_layout(const std::string& name, const LayoutOptions& options = {});

std::vector<std::string> builtin_layout_names();

}  // namespace vismax
