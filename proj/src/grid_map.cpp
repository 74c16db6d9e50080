#include "plgrim/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace plgrim {

GridMap::GridMap(int width, int height, double cell_size)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      occ_(static_cast<std::size_t>(width) * height, Occupancy::Occupied),
      hazard_(static_cast<std::size_t>(width) * height, 1.0) {
  if (width <= 0 || height <= 0) throw GridError("map dimensions must be positive");
}

std::size_t GridMap::checked(Cell c) const {
  if (!in_bounds(c)) {
    std::ostringstream os;
    os << "cell " << c << " out of bounds " << width_ << 'x' << height_;
    throw GridError(os.str());
  }
  return index(c);
}

void GridMap::set_free(Cell c, double hazard) {
  const auto i = checked(c);
  occ_[i] = Occupancy::Free;
  hazard_[i] = hazard;
}

void GridMap::set_occupied(Cell c) {
  const auto i = checked(c);
  occ_[i] = Occupancy::Occupied;
  hazard_[i] = 1.0;
}

std::size_t GridMap::free_count() const {
  return static_cast<std::size_t>(std::count(occ_.begin(), occ_.end(), Occupancy::Free));
}

std::string GridMap::to_text() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(width_ + 1) * height_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Cell c{x, y};
      if (occ_[index(c)] == Occupancy::Occupied) {
        out += '#';
      } else if (start_ && *start_ == c) {
        out += 'S';
      } else {
        const int digit = static_cast<int>(std::lround(hazard_[index(c)] * 10.0));
        out += digit <= 0 ? '.' : static_cast<char>('0' + std::min(digit, 9));
      }
    }
    out += '\n';
  }
  return out;
}

GridMap load_map(std::string_view text, double cell_size) {
  std::vector<std::string_view> rows;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto row = text.substr(0, nl);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    rows.push_back(row);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  if (rows.empty() || rows.front().empty())
    throw MapParseError(MapParseError::Kind::Empty, "map is empty");

  const auto width = rows.front().size();
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != width) {
      std::ostringstream os;
      os << "ragged rows: row " << y << " has " << rows[y].size() << " cells, expected " << width;
      throw MapParseError(MapParseError::Kind::RaggedRows, os.str());
    }
  }

  GridMap map(static_cast<int>(width), static_cast<int>(rows.size()), cell_size);
  bool any_free = false;
  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const Cell c{static_cast<int>(x), static_cast<int>(y)};
      const char ch = rows[y][x];
      if (ch == '#') continue;
      if (ch == '.') {
        map.set_free(c, 0.0);
      } else if (ch >= '1' && ch <= '9') {
        map.set_free(c, (ch - '0') / 10.0);
      } else if (ch == 'S') {
        if (map.start())
          throw MapParseError(MapParseError::Kind::MultipleStarts, "more than one 'S' cell");
        map.set_free(c, 0.0);
        map.set_start(c);
      } else {
        std::ostringstream os;
        os << "unknown character '" << ch << "' at " << c;
        throw MapParseError(MapParseError::Kind::UnknownCharacter, os.str());
      }
      any_free = true;
    }
  }
  if (!any_free) throw MapParseError(MapParseError::Kind::NoFreeCell, "map has no free cell");
  return map;
}

bool line_of_sight(const GridMap& map, Cell a, Cell b) {
  if (!map.in_bounds(a) || !map.in_bounds(b)) throw GridError("line_of_sight: cell out of bounds");
  bool clear = true;
  supercover(a, b, [&](Cell c) {
    if (c != a && c != b && map.at(c) == Occupancy::Occupied) clear = false;
  });
  return clear;
}

VisibilityTable::VisibilityTable(double radius_cells) : radius_(std::max(0.0, radius_cells)) {
  const int r = static_cast<int>(std::floor(radius_ + 1e-9));
  const double r2 = radius_ * radius_ + 1e-9;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const Cell off{dx, dy};
      Ray ray{off, static_cast<std::uint32_t>(between_.size()), 0, std::hypot(dx, dy)};
      supercover(Cell{0, 0}, off, [&](Cell c) {
        if (c != Cell{0, 0} && c != off) between_.push_back(c);
      });
      ray.count = static_cast<std::uint32_t>(between_.size() - ray.first);
      rays_.push_back(ray);
    }
  }
  // Nearer rays first: consumers that stop early see the closest cells.
  std::stable_sort(rays_.begin(), rays_.end(),
                   [](const Ray& l, const Ray& r) { return l.distance < r.distance; });
}

std::shared_ptr<const VisibilityTable> VisibilityTable::get(double radius_cells) {
  static std::mutex mu;
  static std::map<double, std::shared_ptr<const VisibilityTable>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[radius_cells];
  if (!slot) slot = std::make_shared<const VisibilityTable>(radius_cells);
  return slot;
}

Observation sense(const GridMap& map, const RobotState& q, double r_sense) {
  if (!map.is_free(q.cell)) throw GridError("sense: robot cell is not free");
  const auto table = VisibilityTable::get(r_sense / map.cell_size());
  Observation z{q.cell, {}};
  z.sensed.reserve(table->rays().size());
  for (const auto& ray : table->rays()) {
    const Cell c = q.cell + ray.offset;
    if (!map.in_bounds(c)) continue;
    bool clear = true;
    for (Cell d : table->between(ray)) {
      const Cell m = q.cell + d;
      if (!map.in_bounds(m) || map.at(m) == Occupancy::Occupied) {
        clear = false;
        break;
      }
    }
    if (clear) z.sensed.push_back({c, map.at(c), map.hazard(c)});
  }
  std::sort(z.sensed.begin(), z.sensed.end(),
            [](const SensedCell& l, const SensedCell& r) { return l.cell < r.cell; });
  return z;
}

RobotState step(const GridMap& map, const RobotState& q, Cell target) {
  if (!adjacent8(q.cell, target)) throw GridError("step: target is not 8-adjacent");
  if (!map.is_free(target)) throw GridError("step: target is occupied");
  RobotState next = q;
  next.cell = target;
  next.distance_traveled += move_length_cells(q.cell, target) * map.cell_size();
  return next;
}

}  // namespace plgrim
