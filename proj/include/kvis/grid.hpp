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

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kvis {

/// Integer cell coordinates. The origin is the top-left cell; y grows downward.
struct CellIndex {
  int x = 0;
  int y = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Metric position in the map frame, in meters. x spans columns, y spans rows.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle of cells, inclusive at both corners.
struct CellRect {
  CellIndex min;
  CellIndex max;

  bool contains(CellIndex c) const {
    return c.x >= min.x && c.x <= max.x && c.y >= min.y && c.y <= max.y;
  }
  bool on_perimeter(CellIndex c) const {
    return contains(c) &&
           (c.x == min.x || c.x == max.x || c.y == min.y || c.y == max.y);
  }
};

namespace detail {

inline void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("grid dimensions must be at least 1x1, got " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

}  // namespace detail

/// Dense row-major 2-D array addressed by CellIndex.
template <typename T>
class Grid {
 public:
  Grid() = default;

  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    detail::check_dims(width, height);
    cells_.assign(static_cast<std::size_t>(width_) * height_, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(CellIndex c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }

  /// Unchecked access; the caller guarantees c is in bounds.
  T& operator[](CellIndex c) { return cells_[offset(c)]; }
  const T& operator[](CellIndex c) const { return cells_[offset(c)]; }

  /// Checked access.
  T& at(CellIndex c) {
    check(c);
    return cells_[offset(c)];
  }
  const T& at(CellIndex c) const {
    check(c);
    return cells_[offset(c)];
  }

  std::span<const T> cells() const { return cells_; }
  std::span<T> cells() { return cells_; }

 private:
  std::size_t offset(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * width_ + c.x;
  }

  void check(CellIndex c) const {
    if (c.x < 0 || c.x >= width_) {
      throw std::out_of_range("cell x=" + std::to_string(c.x) +
                              " outside [0, " + std::to_string(width_) + ")");
    }
    if (c.y < 0 || c.y >= height_) {
      throw std::out_of_range("cell y=" + std::to_string(c.y) +
                              " outside [0, " + std::to_string(height_) + ")");
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> cells_;
};

/// Smallest rectangle containing every point in the set. The result does not
/// depend on the order of the points.
inline CellRect bounding_box(std::span<const CellIndex> points) {
  if (points.empty()) {
    throw std::domain_error("bounding_box: empty point set");
  }
  CellRect r{points[0], points[0]};
  for (const CellIndex& p : points) {
    r.min.x = std::min(r.min.x, p.x);
    r.min.y = std::min(r.min.y, p.y);
    r.max.x = std::max(r.max.x, p.x);
    r.max.y = std::max(r.max.y, p.y);
  }
  return r;
}

/// Ground-truth occupancy grid: binary wall mask, metric resolution, and the
/// router sites placed in it. Routers must sit on free cells.
class Floorplan {
 public:
  Floorplan(int width, int height, double resolution)
      : walls_(width, height, std::uint8_t{0}), resolution_(resolution) {
    if (!(resolution > 0.0)) {
      throw std::invalid_argument("resolution must be positive, got " +
                                  std::to_string(resolution));
    }
  }

  int width() const { return walls_.width(); }
  int height() const { return walls_.height(); }
  double resolution() const { return resolution_; }

  bool in_bounds(CellIndex c) const { return walls_.in_bounds(c); }
  bool is_wall(CellIndex c) const { return walls_.at(c) != 0; }
  void set_wall(CellIndex c, bool wall = true) {
    walls_.at(c) = wall ? std::uint8_t{1} : std::uint8_t{0};
  }

  const Grid<std::uint8_t>& walls() const { return walls_; }

  const std::vector<CellIndex>& routers() const { return routers_; }

  void add_router(CellIndex c) {
    if (!walls_.in_bounds(c)) {
      throw std::invalid_argument(
          "router (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
          ") outside " + std::to_string(width()) + "x" +
          std::to_string(height()) + " grid");
    }
    if (is_wall(c)) {
      throw std::invalid_argument("router (" + std::to_string(c.x) + ", " +
                                  std::to_string(c.y) + ") sits on a wall cell");
    }
    routers_.push_back(c);
  }

  int free_cell_count() const {
    int n = 0;
    for (std::uint8_t v : walls_.cells()) n += (v == 0);
    return n;
  }

  /// Total free-space area in square meters.
  double free_area_m2() const {
    return free_cell_count() * resolution_ * resolution_;
  }

 private:
  Grid<std::uint8_t> walls_;
  double resolution_;
  std::vector<CellIndex> routers_;
};

/// Per-cell probability of free space with an attached observation variance.
/// Unobserved cells hold exactly 0.5 and a zero variance slot; every update
/// must supply a positive variance.
class BeliefMap {
 public:
  static constexpr double kUnknown = 0.5;

  BeliefMap(int width, int height)
      : prob_(width, height, kUnknown), variance_(width, height, 0.0) {}

  int width() const { return prob_.width(); }
  int height() const { return prob_.height(); }
  bool in_bounds(CellIndex c) const { return prob_.in_bounds(c); }

  double prob_free(CellIndex c) const { return prob_.at(c); }

  /// Variance of the fused estimate; 0 means nothing has been observed yet.
  double variance(CellIndex c) const { return variance_.at(c); }
  bool observed(CellIndex c) const { return variance_.at(c) > 0.0; }

  void set(CellIndex c, double prob_free, double variance) {
    if (!(prob_free >= 0.0 && prob_free <= 1.0)) {
      throw std::domain_error("prob_free=" + std::to_string(prob_free) +
                              " outside [0, 1]");
    }
    if (!(variance > 0.0)) {
      throw std::domain_error("variance must be positive, got " +
                              std::to_string(variance));
    }
    prob_.at(c) = prob_free;
    variance_.at(c) = variance;
  }

  std::span<const double> probs() const { return prob_.cells(); }

 private:
  Grid<double> prob_;
  Grid<double> variance_;
};

/// Maps a metric point to the cell containing it. Points on an interior cell
/// boundary belong to the cell with the larger index; the map's far edge is
/// exclusive.
inline CellIndex world_to_cell(WorldPoint p, const Floorplan& plan) {
  const double res = plan.resolution();
  const double ext_x = plan.width() * res;
  const double ext_y = plan.height() * res;
  if (!(p.x >= 0.0 && p.x < ext_x)) {
    throw std::out_of_range("world x=" + std::to_string(p.x) +
                            " outside [0, " + std::to_string(ext_x) + ")");
  }
  if (!(p.y >= 0.0 && p.y < ext_y)) {
    throw std::out_of_range("world y=" + std::to_string(p.y) +
                            " outside [0, " + std::to_string(ext_y) + ")");
  }
  // Guard against the quotient rounding up to the exclusive edge.
  const int cx = std::min(static_cast<int>(p.x / res), plan.width() - 1);
  const int cy = std::min(static_cast<int>(p.y / res), plan.height() - 1);
  return {cx, cy};
}

/// Metric center of a cell.
inline WorldPoint cell_to_world(CellIndex c, const Floorplan& plan) {
  const double res = plan.resolution();
  return {(c.x + 0.5) * res, (c.y + 0.5) * res};
}

}  // namespace kvis
