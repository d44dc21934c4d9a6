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
#include <string>

#include "kvis/grid.hpp"
#include "kvis/raycast.hpp"

namespace kvis {

/// Recovers a wall mask from a complete wall-count field by walking rays from
/// the router to every boundary cell. Along a ray the count can only change
/// where a wall stands, so cells whose count is unreadable (the wall
/// sentinel) are flagged as walls exactly when the readable count increases
/// across them; a count increase with no sentinel gap in between is left
/// unmarked, since it cannot be localized to a wall cell without risking a
/// false positive.
inline Grid<std::uint8_t> dense_inverse(const KField& field) {
  const int width = field.values.width();
  const int height = field.values.height();
  if (!field.values.in_bounds(field.router) ||
      field.values[field.router] != 0) {
    throw std::runtime_error(
        "k-field is inconsistent: router cell must hold count 0");
  }

  Grid<std::uint8_t> walls(width, height, std::uint8_t{0});
  std::vector<CellIndex> pending;  // sentinel cells awaiting a readable count

  auto scan_ray = [&](CellIndex target) {
    const RayPath path =
        traverse(field.router, target, width, height);
    int prev_k = 0;
    pending.clear();
    for (std::size_t i = 1; i < path.cells.size(); ++i) {
      const CellIndex c = path.cells[i];
      const int v = field.values[c];
      if (v == KField::kWall) {
        pending.push_back(c);
        continue;
      }
      if (v < 0) {
        throw std::runtime_error("k-field is inconsistent: negative count " +
                                 std::to_string(v) + " at (" +
                                 std::to_string(c.x) + ", " +
                                 std::to_string(c.y) + ")");
      }
      if (v > prev_k && !pending.empty()) {
        // The wall sits in the sentinel gap between the two known counts.
        // An increase with no gap cannot be localized to a wall cell (the
        // two cells' direct router segments diverge around an off-ray
        // wall), and marking either free cell would break soundness.
        for (CellIndex p : pending) walls[p] = 1;
      }
      prev_k = v;
      pending.clear();
    }
  };

  for (int x = 0; x < width; ++x) {
    scan_ray({x, 0});
    scan_ray({x, height - 1});
  }
  for (int y = 1; y + 1 < height; ++y) {
    scan_ray({0, y});
    scan_ray({width - 1, y});
  }
  return walls;
}

}  // namespace kvis
