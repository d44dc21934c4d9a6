/*
 * Copyright 2026 The kvis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kvis/grid.hpp"

namespace kvis {

/// Ordered list of cells a center-to-center segment passes through.
struct RayPath {
  std::vector<CellIndex> cells;
};

/// Supercover traversal of the segment joining the centers of cells a and b:
/// every cell whose closed square the segment intersects is reported, in
/// order of first contact. When the segment passes exactly through a lattice
/// corner, both diagonal side cells are included -- the x-step cell first,
/// then the y-step cell, then the diagonal cell. All crossing comparisons use
/// exact integer arithmetic, so the result is independent of floating-point
/// rounding.
inline RayPath traverse(CellIndex a, CellIndex b, int width, int height) {
  detail::check_dims(width, height);
  for (CellIndex e : {a, b}) {
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height) {
      throw std::out_of_range("ray endpoint (" + std::to_string(e.x) + ", " +
                              std::to_string(e.y) + ") outside " +
                              std::to_string(width) + "x" +
                              std::to_string(height) + " grid");
    }
  }

  RayPath path;
  const int dx = b.x - a.x;
  const int dy = b.y - a.y;
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;
  const std::int64_t adx = std::abs(dx);
  const std::int64_t ady = std::abs(dy);
  path.cells.reserve(static_cast<std::size_t>(adx + ady + 1));

  int x = a.x;
  int y = a.y;
  path.cells.push_back(a);

  // The i-th vertical gridline ahead of the start is crossed at parameter
  // t = (2i - 1) / (2 adx); horizontal ones at (2j - 1) / (2 ady). The next
  // crossing in x is compared against the next in y by cross-multiplying, so
  // ties (exact corner hits) are detected exactly.
  std::int64_t ix = 0;  // vertical crossings consumed
  std::int64_t iy = 0;  // horizontal crossings consumed
  while (ix < adx || iy < ady) {
    bool step_x = false;
    bool step_y = false;
    if (iy >= ady) {
      step_x = true;
    } else if (ix >= adx) {
      step_y = true;
    } else {
      const std::int64_t lhs = (2 * ix + 1) * ady;
      const std::int64_t rhs = (2 * iy + 1) * adx;
      step_x = lhs <= rhs;
      step_y = lhs >= rhs;
    }
    if (step_x && step_y) {
      // Corner hit: the two side cells, then the diagonal cell.
      path.cells.push_back({x + sx, y});
      path.cells.push_back({x, y + sy});
      x += sx;
      y += sy;
      ++ix;
      ++iy;
      path.cells.push_back({x, y});
    } else if (step_x) {
      x += sx;
      ++ix;
      path.cells.push_back({x, y});
    } else {
      y += sy;
      ++iy;
      path.cells.push_back({x, y});
    }
  }
  return path;
}

namespace detail {

/// Number of maximal contiguous wall runs strictly between the endpoints of
/// the path, so a wall several cells thick is counted once. Wall cells that
/// touch the previous wall cell (8-adjacency) extend its run even when a
/// corner-inserted free cell sits between them in path order: touching wall
/// cells belong to one obstacle, and a straight segment meets that obstacle
/// once.
inline int wall_runs_interior(const Floorplan& plan,
                              const std::vector<CellIndex>& cells) {
  int runs = 0;
  bool have_last = false;
  CellIndex last_wall{0, 0};
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
    if (!plan.is_wall(cells[i])) continue;
    const CellIndex c = cells[i];
    if (!have_last || std::max(std::abs(c.x - last_wall.x),
                               std::abs(c.y - last_wall.y)) > 1) {
      ++runs;
    }
    last_wall = c;
    have_last = true;
  }
  return runs;
}

}  // namespace detail

/// Number of distinct walls the segment from a to b passes through. Both
/// endpoints must be free cells; walls touching an endpoint cell are not
/// counted.
inline int count_wall_crossings(const Floorplan& plan, CellIndex a,
                                CellIndex b) {
  for (CellIndex e : {a, b}) {
    if (plan.is_wall(e)) {
      throw std::domain_error("segment endpoint (" + std::to_string(e.x) +
                              ", " + std::to_string(e.y) +
                              ") is a wall cell");
    }
  }
  const RayPath path = traverse(a, b, plan.width(), plan.height());
  return detail::wall_runs_interior(plan, path.cells);
}

/// Wall-crossing counts from one router to every cell of a plan. Wall cells
/// hold the sentinel kWall.
struct KField {
  static constexpr int kWall = -1;

  CellIndex router;
  Grid<int> values;
};

inline KField k_field(const Floorplan& plan, CellIndex router) {
  if (!plan.in_bounds(router) || plan.is_wall(router)) {
    throw std::domain_error("router (" + std::to_string(router.x) + ", " +
                            std::to_string(router.y) +
                            ") must be a free in-bounds cell");
  }
  KField field{router, Grid<int>(plan.width(), plan.height(), KField::kWall)};
  for (int y = 0; y < plan.height(); ++y) {
    for (int x = 0; x < plan.width(); ++x) {
      const CellIndex c{x, y};
      if (!plan.is_wall(c)) {
        field.values[c] = count_wall_crossings(plan, router, c);
      }
    }
  }
  return field;
}

/// Writes a k-field as CSV: a comment line recording the router cell, then
/// one row of comma-separated counts per grid row (-1 marks wall cells).
inline void write_kfield_csv(const KField& field, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "# router," << field.router.x << "," << field.router.y << "\n";
  for (int y = 0; y < field.values.height(); ++y) {
    for (int x = 0; x < field.values.width(); ++x) {
      out << field.values[{x, y}];
      out << (x + 1 == field.values.width() ? '\n' : ',');
    }
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

inline KField read_kfield_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  CellIndex router{-1, -1};
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string tag;
      if (std::getline(header, tag, ',') &&
          tag.find("router") != std::string::npos) {
        std::string sx, sy;
        if (std::getline(header, sx, ',') && std::getline(header, sy)) {
          router = {std::stoi(sx), std::stoi(sy)};
        }
      }
      continue;
    }
    std::vector<int> row;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      row.push_back(std::stoi(cell));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path + ": ragged CSV row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error(path + ": empty k-field CSV");
  }
  KField field{router, Grid<int>(static_cast<int>(rows.front().size()),
                                 static_cast<int>(rows.size()))};
  for (int y = 0; y < field.values.height(); ++y) {
    for (int x = 0; x < field.values.width(); ++x) {
      field.values[{x, y}] = rows[y][x];
    }
  }
  return field;
}

}  // namespace kvis
