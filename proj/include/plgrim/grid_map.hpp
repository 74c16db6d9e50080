#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plgrim/cell.hpp"

namespace plgrim {

enum class Occupancy : std::uint8_t { Free, Occupied };

class MapParseError : public std::runtime_error {
 public:
  enum class Kind { Empty, RaggedRows, UnknownCharacter, NoFreeCell, MultipleStarts };
  MapParseError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Out-of-bounds queries and illegal moves.
class GridError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Ground-truth occupancy and hazard. Everything outside the bounds counts as
/// Occupied, which closes the world even when the border row is Free.
class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height, double cell_size = 0.5);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t i) const {
    return {static_cast<int>(i % width_), static_cast<int>(i / width_)};
  }
  std::size_t size() const { return occ_.size(); }

  Occupancy at(Cell c) const { return occ_[checked(c)]; }
  bool is_free(Cell c) const { return in_bounds(c) && occ_[index(c)] == Occupancy::Free; }
  double hazard(Cell c) const { return hazard_[checked(c)]; }

  /// Occupied cells always carry hazard 1.0.
  void set_free(Cell c, double hazard = 0.0);
  void set_occupied(Cell c);

  std::optional<Cell> start() const { return start_; }
  void set_start(Cell c) { start_ = c; }

  std::size_t free_count() const;

  /// Serializes in the map-file alphabet.
  std::string to_text() const;

 private:
  std::size_t checked(Cell c) const;

  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.5;
  std::vector<Occupancy> occ_;
  std::vector<double> hazard_;
  std::optional<Cell> start_;
};

struct RobotState {
  Cell cell;
  double distance_traveled = 0.0;  // m
  double speed = 1.0;              // m/s
};

struct SensedCell {
  Cell cell;
  Occupancy occupancy;
  double hazard;
};

struct Observation {
  Cell origin;
  std::vector<SensedCell> sensed;
};

/// Parses the map-file alphabet: '#' Occupied, '.' Free, '1'-'9' Free with
/// hazard digit/10, 'S' Free start cell.
GridMap load_map(std::string_view text, double cell_size = 0.5);

/// Visits every cell touched by the segment between the centers of a and b,
/// in order from a to b. At exact corner crossings both side cells are
/// visited before the diagonal one.
template <typename Visit>
void supercover(Cell a, Cell b, Visit&& visit) {
  const int nx = b.x > a.x ? b.x - a.x : a.x - b.x;
  const int ny = b.y > a.y ? b.y - a.y : a.y - b.y;
  const int sx = b.x > a.x ? 1 : -1;
  const int sy = b.y > a.y ? 1 : -1;
  Cell c = a;
  visit(c);
  for (int ix = 0, iy = 0; ix < nx || iy < ny;) {
    const long long decision =
        static_cast<long long>(1 + 2 * ix) * ny - static_cast<long long>(1 + 2 * iy) * nx;
    if (decision == 0) {
      visit(Cell{c.x + sx, c.y});
      visit(Cell{c.x, c.y + sy});
      c.x += sx;
      c.y += sy;
      ++ix;
      ++iy;
    } else if (decision < 0) {
      c.x += sx;
      ++ix;
    } else {
      c.y += sy;
      ++iy;
    }
    visit(c);
  }
}

/// True iff no Occupied cell lies strictly between a and b on the supercover.
bool line_of_sight(const GridMap& map, Cell a, Cell b);

/// Precomputed disk of offsets with the intermediate supercover cells of each
/// ray, so visibility tests reduce to table lookups.
class VisibilityTable {
 public:
  struct Ray {
    Cell offset;
    std::uint32_t first;  // into between()
    std::uint32_t count;
    double distance;      // cells
  };

  explicit VisibilityTable(double radius_cells);

  double radius() const { return radius_; }
  std::span<const Ray> rays() const { return rays_; }
  std::span<const Cell> between(const Ray& r) const { return {between_.data() + r.first, r.count}; }

  /// Shared table for a radius; safe to call concurrently.
  static std::shared_ptr<const VisibilityTable> get(double radius_cells);

 private:
  double radius_;
  std::vector<Ray> rays_;
  std::vector<Cell> between_;
};

/// Truthful disk sensing: every in-bounds cell within r_sense (m) of q.cell
/// that is in line of sight.
Observation sense(const GridMap& map, const RobotState& q, double r_sense);

/// Deterministic motion onto an 8-adjacent Free cell.
RobotState step(const GridMap& map, const RobotState& q, Cell target);

}  // namespace plgrim
