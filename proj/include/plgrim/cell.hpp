#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <ostream>

namespace plgrim {

/// Integer lattice coordinate. Ordering is lexicographic on (x, y).
struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
  friend constexpr Cell operator+(Cell a, Cell b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Cell operator-(Cell a, Cell b) { return {a.x - b.x, a.y - b.y}; }
  friend std::ostream& operator<<(std::ostream& os, Cell c) {
    return os << '(' << c.x << ',' << c.y << ')';
  }
};

// Direction order N, E, S, W, NE, SE, SW, NW. +y is south (row index grows
// downward in map files).
inline constexpr std::array<Cell, 8> kNeighbors8 = {{
    {0, -1}, {1, 0}, {0, 1}, {-1, 0}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1},
}};
inline constexpr std::array<Cell, 4> kNeighbors4 = {{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

constexpr int chebyshev(Cell a, Cell b) {
  const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx > dy ? dx : dy;
}

constexpr bool adjacent8(Cell a, Cell b) { return chebyshev(a, b) == 1; }

inline double euclid_cells(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

/// Length in cells of a single lattice move (1 or sqrt 2).
inline double move_length_cells(Cell a, Cell b) {
  return (a.x != b.x && a.y != b.y) ? std::sqrt(2.0) : 1.0;
}

}  // namespace plgrim

template <>
struct std::hash<plgrim::Cell> {
  std::size_t operator()(plgrim::Cell c) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                                      static_cast<std::uint32_t>(c.y));
  }
};
