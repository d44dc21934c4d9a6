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

// Independent reference implementations ("oracles") used only by tests.
// These are written against the definitions, not against the library code,
// so agreement between the two is meaningful evidence of correctness.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "kvis/grid.hpp"

namespace oracle {

/// Brute-force supercover traversal: samples the center-to-center segment on
/// an exact rational lattice and records every cell touched, in first-touch
/// order. The sample count D is a multiple of 2*|dx| and 2*|dy|, so every
/// cell-boundary crossing lands exactly on a sample (no floating point, no
/// tie-break guesswork); samples are at least 64 per cell along each axis,
/// capped for very long segments. A sample on a cell boundary belongs to
/// both adjacent cells; a sample on a lattice corner belongs to all four
/// (the conservative corner convention).
inline std::vector<kvis::CellIndex> supersample_ray(kvis::CellIndex a,
                                                    kvis::CellIndex b,
                                                    int width, int height) {
  const std::int64_t dx = b.x - a.x;
  const std::int64_t dy = b.y - a.y;
  const std::int64_t adx = std::max<std::int64_t>(std::llabs(dx), 1);
  const std::int64_t ady = std::max<std::int64_t>(std::llabs(dy), 1);
  std::int64_t scale = 64;
  while (scale > 2 && scale * adx * ady > (std::int64_t{1} << 20)) {
    scale /= 2;
  }
  const std::int64_t D = scale * adx * ady;  // samples: q = 0..D

  std::vector<kvis::CellIndex> order;
  std::vector<std::uint8_t> seen(
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  auto touch = [&](std::int64_t cx, std::int64_t cy) {
    if (cx < 0 || cy < 0 || cx >= width || cy >= height) return;
    std::uint8_t& flag = seen[static_cast<std::size_t>(cy) * width + cx];
    if (!flag) {
      flag = 1;
      order.push_back({static_cast<int>(cx), static_cast<int>(cy)});
    }
  };

  // Cell (x, y) spans [x, x+1) x [y, y+1) in cell units; its center is at
  // (x + 1/2, y + 1/2). Work in units of 1/(2D) cells so all sample
  // positions are integers: position(q) = (2*a + 1) * D + q * 2 * d.
  for (std::int64_t q = 0; q <= D; ++q) {
    const std::int64_t px = (2 * a.x + 1) * D + q * 2 * dx;
    const std::int64_t py = (2 * a.y + 1) * D + q * 2 * dy;
    const bool on_vert = px % (2 * D) == 0;
    const bool on_horz = py % (2 * D) == 0;
    const std::int64_t cx = px / (2 * D);  // px, py > 0 always
    const std::int64_t cy = py / (2 * D);

    // first = cell occupied before the crossing (in motion order),
    // second = cell entered after it.
    const std::int64_t fx = on_vert ? (dx > 0 ? cx - 1 : cx) : cx;
    const std::int64_t sx = on_vert ? (dx > 0 ? cx : cx - 1) : cx;
    const std::int64_t fy = on_horz ? (dy > 0 ? cy - 1 : cy) : cy;
    const std::int64_t sy = on_horz ? (dy > 0 ? cy : cy - 1) : cy;

    if (on_vert && on_horz) {
      // Corner. Emission order matches the documented traversal convention:
      // the x-step cell, then the y-step cell, then the diagonal.
      touch(fx, fy);
      touch(sx, fy);
      touch(fx, sy);
      touch(sx, sy);
    } else if (on_vert) {
      touch(fx, fy);
      touch(sx, fy);
    } else if (on_horz) {
      touch(fx, fy);
      touch(fx, sy);
    } else {
      touch(cx, cy);
    }
  }
  return order;
}

/// Counts wall-obstacle contacts strictly between the endpoints of a cell
/// sequence: a wall cell that touches the previously seen wall cell
/// (8-adjacency) continues the same contact even if a corner-inserted free
/// cell separates them in sequence order, since touching wall cells form one
/// obstacle and a straight segment meets it once.
inline int count_wall_runs(const kvis::Floorplan& plan,
                           const std::vector<kvis::CellIndex>& path) {
  int runs = 0;
  bool have_last = false;
  kvis::CellIndex last{0, 0};
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    if (!plan.is_wall(path[i])) continue;
    const kvis::CellIndex c = path[i];
    if (!have_last ||
        std::max(std::abs(c.x - last.x), std::abs(c.y - last.y)) > 1) {
      ++runs;
    }
    last = c;
    have_last = true;
  }
  return runs;
}

struct KmeansSolution {
  double cost = 0.0;
  std::vector<double> centroids;  // descending, to match the library order
};

/// Exact optimal 1-D k-means by dynamic programming over the sorted samples
/// (clusters of an optimal 1-D solution are contiguous in sorted order).
/// O(n^2 k); fine for test-sized inputs.
inline KmeansSolution optimal_kmeans_1d(std::vector<double> xs, int k) {
  if (k < 1 || xs.size() < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("optimal_kmeans_1d: need at least k samples");
  }
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::vector<double> sum(n + 1, 0.0), sumsq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i + 1] = sum[i] + xs[i];
    sumsq[i + 1] = sumsq[i] + xs[i] * xs[i];
  }
  // Squared deviation of xs[i..j] (inclusive) about its mean.
  auto cost = [&](std::size_t i, std::size_t j) {
    const double s = sum[j + 1] - sum[i];
    const double ss = sumsq[j + 1] - sumsq[i];
    const double m = static_cast<double>(j - i + 1);
    return std::max(0.0, ss - s * s / m);
  };

  const double inf = std::numeric_limits<double>::infinity();
  // best[m][j]: optimal cost of splitting xs[0..j-1] into m clusters.
  std::vector<std::vector<double>> best(
      k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(
      k + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;
  for (int m = 1; m <= k; ++m) {
    for (std::size_t j = m; j <= n; ++j) {
      for (std::size_t i = m - 1; i < j; ++i) {
        if (best[m - 1][i] == inf) continue;
        const double c = best[m - 1][i] + cost(i, j - 1);
        if (c < best[m][j]) {
          best[m][j] = c;
          cut[m][j] = i;
        }
      }
    }
  }

  KmeansSolution sol;
  sol.cost = best[k][n];
  std::size_t j = n;
  for (int m = k; m >= 1; --m) {
    const std::size_t i = cut[m][j];
    sol.centroids.push_back((sum[j] - sum[i]) /
                            static_cast<double>(j - i));
    j = i;
  }
  // Backtracking yields clusters right-to-left, i.e. already descending.
  return sol;
}

/// Within-cluster squared error of assigning each sample to its nearest
/// centroid; lets tests compare a k-means output against the DP optimum.
inline double assignment_cost(const std::vector<double>& xs,
                              const std::vector<double>& centroids) {
  double total = 0.0;
  for (double x : xs) {
    double best = std::numeric_limits<double>::infinity();
    for (double c : centroids) {
      best = std::min(best, (x - c) * (x - c));
    }
    total += best;
  }
  return total;
}

}  // namespace oracle
