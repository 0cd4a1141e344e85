#include "vismax/gridworld.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vismax {

namespace {

Cell ahead(Cell c, Orientation o) {
  switch (o) {
    case Orientation::East: return {c.x + 1, c.y};
    case Orientation::South: return {c.x, c.y + 1};
    case Orientation::West: return {c.x - 1, c.y};
    case Orientation::North: return {c.x, c.y - 1};
  }
  return c;
}

Orientation turn(Orientation o, int delta) {
  return static_cast<Orientation>((static_cast<int>(o) + delta + 4) % 4);
}

constexpr std::string_view kRandomSuffix = "-random";

}  // namespace

bool GridSpec::is_wall(Cell c) const {
  if (!in_bounds(c)) return true;
  return std::find(walls.begin(), walls.end(), c) != walls.end();
}

std::size_t Gridworld::cell_index(Cell c) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), c, [](Cell a, Cell b) {
    return std::pair(a.y, a.x) < std::pair(b.y, b.x);
  });
  if (it == cells.end() || !(*it == c)) throw std::out_of_range("cell is not a free grid cell");
  return static_cast<std::size_t>(it - cells.begin());
}

std::size_t Gridworld::state_of(Cell c, Orientation o) const {
  return cell_index(c) * kOrientations + static_cast<std::size_t>(o);
}

Gridworld build_gridworld(const GridSpec& spec, double gamma) {
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("grid dimensions must be positive");

  // Row-major cell order (y, then x) keeps Gridworld::cell_index a binary search.
  std::vector<Cell> cells;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      if (!spec.is_wall({x, y})) cells.push_back({x, y});
  if (cells.empty()) throw std::invalid_argument("grid '" + spec.layout_name + "' has no free cell");
  if (spec.goal && spec.is_wall(*spec.goal)) throw std::invalid_argument("goal cell is a wall");
  if (spec.start && spec.is_wall(spec.start->cell)) throw std::invalid_argument("start cell is a wall");

  std::map<std::pair<int, int>, std::size_t> index_of;
  for (std::size_t i = 0; i < cells.size(); ++i) index_of[{cells[i].x, cells[i].y}] = i;

  const std::size_t n_states = cells.size() * kOrientations;
  const auto n_pairs = static_cast<Eigen::Index>(n_states * kGridActions);
  Table transition = Table::Zero(n_pairs, static_cast<Eigen::Index>(n_states));
  Table reward = Table::Zero(static_cast<Eigen::Index>(n_states), kGridActions);
  Table h = Table::Zero(n_pairs, static_cast<Eigen::Index>(cells.size()));

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell c = cells[ci];
    const bool at_goal = spec.goal && *spec.goal == c;
    for (std::size_t oi = 0; oi < kOrientations; ++oi) {
      const auto o = static_cast<Orientation>(oi);
      const std::size_t s = ci * kOrientations + oi;
      for (std::size_t a = 0; a < kGridActions; ++a) {
        std::size_t next = s;
        if (!at_goal) {
          switch (a) {
            case kTurnLeft: next = ci * kOrientations + static_cast<std::size_t>(turn(o, -1)); break;
            case kTurnRight: next = ci * kOrientations + static_cast<std::size_t>(turn(o, +1)); break;
            case kForward: {
              const Cell target = ahead(c, o);
              if (!spec.is_wall(target)) next = index_of.at({target.x, target.y}) * kOrientations + oi;
              break;
            }
            default: break;
          }
        }
        const auto row = static_cast<Eigen::Index>(s * kGridActions + a);
        transition(row, static_cast<Eigen::Index>(next)) = 1.0;
        h(row, static_cast<Eigen::Index>(ci)) = 1.0;
        if (at_goal) reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = 1.0;
      }
    }
  }

  Vector p0 = Vector::Zero(static_cast<Eigen::Index>(n_states));
  if (spec.start) {
    const std::size_t ci = index_of.at({spec.start->cell.x, spec.start->cell.y});
    p0(static_cast<Eigen::Index>(ci * kOrientations + static_cast<std::size_t>(spec.start->orientation))) = 1.0;
  } else {
    std::size_t count = 0;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      if (spec.goal && *spec.goal == cells[ci] && cells.size() > 1) continue;
      for (std::size_t oi = 0; oi < kOrientations; ++oi) p0(static_cast<Eigen::Index>(ci * kOrientations + oi)) = 1.0;
      count += kOrientations;
    }
    p0 /= static_cast<double>(count);
  }

  return Gridworld{spec, TabularMdp(std::move(transition), std::move(p0), std::move(reward), gamma),
                   FeatureMap(std::move(h)), std::move(cells)};
}

GridSpec parse_grid_map(const std::string& map, const std::string& name) {
  std::vector<std::string> rows;
  std::string current;
  for (char ch : map) {
    if (ch == '/' || ch == '\n') {
      if (!current.empty()) rows.push_back(current);
      current.clear();
    } else if (ch != ' ' && ch != '\r' && ch != '\t') {
      current.push_back(ch);
    }
  }
  if (!current.empty()) rows.push_back(current);
  if (rows.empty()) throw std::invalid_argument("empty grid map");

  GridSpec spec;
  spec.layout_name = name;
  spec.height = static_cast<int>(rows.size());
  spec.width = static_cast<int>(rows.front().size());
  for (int y = 0; y < spec.height; ++y) {
    const auto& row = rows[static_cast<std::size_t>(y)];
    if (static_cast<int>(row.size()) != spec.width) throw std::invalid_argument("grid map rows differ in length");
    for (int x = 0; x < spec.width; ++x) {
      switch (row[static_cast<std::size_t>(x)]) {
        case '#': spec.walls.push_back({x, y}); break;
        case '.': break;
        case 'S': spec.start = FixedStart{{x, y}, Orientation::East}; break;
        case 'G': spec.goal = Cell{x, y}; break;
        default: throw std::invalid_argument(std::string("unknown grid map character '") + row[static_cast<std::size_t>(x)] + "'");
      }
    }
  }
  return spec;
}

std::string render_grid(const GridSpec& spec) {
  std::ostringstream os;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Cell c{x, y};
      char ch = '.';
      if (spec.is_wall(c)) ch = '#';
      else if (spec.goal && *spec.goal == c) ch = 'G';
      else if (spec.start && spec.start->cell == c) ch = 'S';
      os << ch;
    }
    os << '\n';
  }
  return os.str();
}

GridSpec make_layout(const std::string& name, const LayoutOptions& options) {
  std::string base = name;
  bool random_start = options.random_start;
  if (base.size() > kRandomSuffix.size() && base.ends_with(kRandomSuffix)) {
    base.resize(base.size() - kRandomSuffix.size());
    random_start = true;
  }

  GridSpec spec;
  spec.layout_name = random_start ? base + std::string(kRandomSuffix) : base;
  Cell start{0, 0};
  Cell goal{0, 0};

  if (base == "empty-room") {
    spec.width = options.width > 0 ? options.width : 5;
    spec.height = options.height > 0 ? options.height : 5;
    goal = {spec.width - 1, spec.height - 1};
  } else if (base == "two-rooms") {
    // Two 3x5 rooms joined by a single doorway in the middle of the wall.
    spec.width = 7;
    spec.height = 5;
    for (int y = 0; y < spec.height; ++y)
      if (y != 2) spec.walls.push_back({3, y});
    start = {0, 2};
    goal = {6, 4};
  } else if (base == "four-rooms") {
    spec.width = 9;
    spec.height = 9;
    for (int i = 0; i < 9; ++i) {
      if (i != 1 && i != 6) spec.walls.push_back({4, i});
      if (i != 2 && i != 7 && i != 4) spec.walls.push_back({i, 4});
    }
    start = {0, 0};
    goal = {8, 8};
  } else if (base == "corridor") {
    spec.width = options.width > 0 ? options.width : 12;
    spec.height = options.height > 0 ? options.height : 1;
    goal = {spec.width - 1, spec.height - 1};
  } else {
    throw std::invalid_argument("unknown layout '" + name + "'");
  }

  if (!random_start) spec.start = FixedStart{start, Orientation::East};
  if (options.with_goal) spec.goal = goal;
  return spec;
}

std::vector<std::string> builtin_layout_names() {
  return {"empty-room", "two-rooms", "four-rooms", "corridor"};
}

}  // namespace vismax
