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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kvis/grid.hpp"
#include "kvis/raycast.hpp"
#include "kvis/rssi.hpp"
#include "kvis/trajectory.hpp"

namespace kvis {

/// How wall probability is distributed over a subsegment. The midpoint mode
/// places a Gaussian bump (or a mixture of them) peaked between the
/// endpoints; the literal mode uses the raw distance-proportional form, which
/// instead grows toward the endpoints. Both share the same peak magnitude.
enum class WallMode {
  kGaussianMidpoint,
  kLiteralEq4,
};

inline WallMode wall_mode_from_string(const std::string& s) {
  if (s == "gaussian-midpoint") return WallMode::kGaussianMidpoint;
  if (s == "literal-eq4") return WallMode::kLiteralEq4;
  throw std::invalid_argument("unknown wall mode '" + s +
                              "' (expected gaussian-midpoint or literal-eq4)");
}

inline std::string to_string(WallMode m) {
  return m == WallMode::kGaussianMidpoint ? "gaussian-midpoint" : "literal-eq4";
}

struct MapperConfig {
  double sigma_step = 0.1;    // free-space belief increment per observation
  double base_variance = 1.0; // variance of a single free-space observation
  WallMode wall_mode = WallMode::kGaussianMidpoint;
  int k_max = 2;              // must match the classifier's k_max
};

inline void validate(const MapperConfig& cfg) {
  if (!(cfg.sigma_step > 0.0 && cfg.sigma_step <= 0.5)) {
    throw std::invalid_argument("sigma_step must be in (0, 0.5], got " +
                                std::to_string(cfg.sigma_step));
  }
  if (!(cfg.base_variance > 0.0)) {
    throw std::invalid_argument("base_variance must be positive, got " +
                                std::to_string(cfg.base_variance));
  }
  if (cfg.k_max < 1) {
    throw std::invalid_argument("k_max must be >= 1, got " +
                                std::to_string(cfg.k_max));
  }
}

/// Contiguous stretch of samples [begin, end) that share one wall count for a
/// given router without a break in pose continuity.
struct TrajectoryRun {
  std::size_t begin = 0;
  std::size_t end = 0;
  int k = 0;
};

/// Splits a trajectory into maximal runs of constant wall count. A run breaks
/// where the count changes, where the count is missing, or where consecutive
/// poses are more than step_bound cells apart (Chebyshev distance).
inline std::vector<TrajectoryRun> segment_trajectory(const Trajectory& traj,
                                                     int router,
                                                     int step_bound = 2) {
  if (router < 0 || router >= traj.router_count) {
    throw std::invalid_argument("router index " + std::to_string(router) +
                                " out of range [0, " +
                                std::to_string(traj.router_count) + ")");
  }
  if (step_bound < 1) {
    throw std::invalid_argument("step_bound must be >= 1, got " +
                                std::to_string(step_bound));
  }
  std::vector<TrajectoryRun> runs;
  bool open = false;
  std::size_t run_begin = 0;
  int run_k = 0;
  auto close = [&](std::size_t end) {
    if (open) runs.push_back({run_begin, end, run_k});
    open = false;
  };
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const TrajectorySample& s = traj.samples[i];
    const std::optional<int> k =
        router < static_cast<int>(s.k.size()) ? s.k[router] : std::nullopt;
    if (!k) {
      close(i);
      continue;
    }
    if (open) {
      const CellIndex prev = traj.samples[i - 1].pose;
      const int gap = std::max(std::abs(s.pose.x - prev.x),
                               std::abs(s.pose.y - prev.y));
      if (*k != run_k || gap > step_bound) close(i);
    }
    if (!open) {
      open = true;
      run_begin = i;
      run_k = *k;
    }
  }
  close(traj.samples.size());
  return runs;
}

/// Index of the strongest reading at a sample; ties go to the lowest index.
/// Empty when the sample has no readings at all.
inline std::optional<int> select_focused_router(const TrajectorySample& s) {
  std::optional<int> best;
  for (std::size_t r = 0; r < s.rssi_dbm.size(); ++r) {
    if (!s.rssi_dbm[r]) continue;
    if (!best || *s.rssi_dbm[r] > *s.rssi_dbm[*best]) {
      best = static_cast<int>(r);
    }
  }
  return best;
}

/// Inverse-variance fusion of two probability estimates: the lower-variance
/// operand gets the larger weight, and the combined variance is the harmonic
/// sum (so certainty only ever grows). Returns (mu, sigma).
inline std::pair<double, double> fuse(double mu1, double sigma1, double mu2,
                                      double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw std::domain_error("fuse: sigma values must be positive");
  }
  const double v1 = sigma1 * sigma1;
  const double v2 = sigma2 * sigma2;
  const double mu = (v1 / (v1 + v2)) * mu2 + (v2 / (v1 + v2)) * mu1;
  const double variance = 1.0 / (1.0 / v1 + 1.0 / v2);
  return {mu, std::sqrt(variance)};
}

/// Per-cell lookup of the wall counts observed at trajectory poses, for one
/// router. Used to find where a ray crosses the trajectory.
class RouterIntersections {
 public:
  RouterIntersections(const Trajectory& traj, int router, int width,
                      int height)
      : has_k0_(width, height, std::uint8_t{0}), min_k1_(width, height, 0) {
    for (const TrajectorySample& s : traj.samples) {
      if (router < 0 || router >= static_cast<int>(s.k.size()) ||
          !s.k[router]) {
        continue;
      }
      if (!has_k0_.in_bounds(s.pose)) {
        throw std::out_of_range("trajectory pose (" +
                                std::to_string(s.pose.x) + ", " +
                                std::to_string(s.pose.y) + ") outside " +
                                std::to_string(width) + "x" +
                                std::to_string(height) + " grid");
      }
      const int k = *s.k[router];
      if (k == 0) {
        has_k0_[s.pose] = 1;
      } else {
        int& slot = min_k1_[s.pose];
        if (slot == 0 || k < slot) slot = k;
      }
    }
  }

  bool has_k0(CellIndex c) const { return has_k0_[c] != 0; }

  /// Smallest wall count >= 1 observed at the cell; 0 when none.
  int min_k1(CellIndex c) const { return min_k1_[c]; }

  /// Smallest wall count of any kind observed at the cell.
  std::optional<int> marker_k(CellIndex c) const {
    if (has_k0_[c]) return 0;
    if (min_k1_[c] > 0) return min_k1_[c];
    return std::nullopt;
  }

 private:
  Grid<std::uint8_t> has_k0_;
  Grid<int> min_k1_;
};

/// A router->pose ray narrowed by the trajectory poses it crosses: the lower
/// endpoint is the farthest crossing known to be wall-free, the upper
/// endpoint the nearest crossing that already sees a wall.
struct RefinedRay {
  CellIndex lower;
  CellIndex upper;
  int k_lower = 0;
  int k_upper = 0;
  std::vector<CellIndex> cells;  // path from lower to upper, inclusive
};

/// Narrows the ray from the router to the target pose. The lower endpoint
/// advances to the farthest on-ray pose with k = 0; the upper endpoint
/// retreats to the nearest on-ray pose whose count equals the smallest
/// count >= 1 seen anywhere on the ray (the target itself by default).
inline RefinedRay refine_endpoints(CellIndex router, CellIndex target,
                                   int target_k,
                                   const RouterIntersections& intersections,
                                   int width, int height) {
  if (target_k < 1) {
    throw std::invalid_argument("endpoint refinement requires a target k >= 1, got " +
                                std::to_string(target_k));
  }
  const RayPath path = traverse(router, target, width, height);
  const std::size_t last = path.cells.size() - 1;

  std::size_t upper = last;
  int k_upper = target_k;
  for (std::size_t i = 1; i <= last; ++i) {
    const int k = intersections.min_k1(path.cells[i]);
    if (k > 0 && (k < k_upper || (k == k_upper && i < upper))) {
      k_upper = k;
      upper = i;
    }
  }

  std::size_t lower = 0;
  for (std::size_t i = 1; i < upper; ++i) {
    if (intersections.has_k0(path.cells[i])) lower = i;
  }

  RefinedRay ray;
  ray.lower = path.cells[lower];
  ray.upper = path.cells[upper];
  ray.k_lower = 0;
  ray.k_upper = k_upper;
  ray.cells.assign(path.cells.begin() + lower,
                   path.cells.begin() + upper + 1);
  return ray;
}

inline RefinedRay refine_endpoints(CellIndex router_cell,
                                   const Trajectory& traj, std::size_t sample,
                                   int router, int width, int height) {
  if (sample >= traj.samples.size()) {
    throw std::out_of_range("sample index " + std::to_string(sample) +
                            " out of range");
  }
  const TrajectorySample& s = traj.samples[sample];
  if (router < 0 || router >= static_cast<int>(s.k.size()) || !s.k[router]) {
    throw std::invalid_argument("target sample has no k value for router " +
                                std::to_string(router));
  }
  const RouterIntersections intersections(traj, router, width, height);
  return refine_endpoints(router_cell, s.pose, *s.k[router], intersections,
                          width, height);
}

/// One part of a refined ray between two consecutive trajectory crossings
/// (or an endpoint). delta_k counts the walls inside the part; M is the
/// number of cells strictly between the part's endpoints; L = M + 1 is the
/// part's length in path steps.
struct Subsegment {
  std::size_t begin = 0;  // index into RefinedRay::cells
  std::size_t end = 0;    // index into RefinedRay::cells, inclusive
  CellIndex start;
  CellIndex finish;
  int delta_k = 0;
  int intermediate_count = 0;  // M
  int length = 0;              // L
};

/// Partitions a refined ray at its interior trajectory crossings. Each part
/// carries the count difference of its two delimiting crossings. Crossings
/// whose count would force a negative difference somewhere (possible under
/// measurement noise) are treated as spurious and skipped.
inline std::vector<Subsegment> subsegment_deltas(
    const RefinedRay& ray, const RouterIntersections& intersections) {
  if (ray.cells.size() < 2) {
    throw std::invalid_argument("refined ray must span at least two cells");
  }
  if (ray.k_upper < ray.k_lower) {
    throw std::invalid_argument("refined ray has k_upper < k_lower");
  }
  std::vector<Subsegment> parts;
  std::size_t begin = 0;
  int k_begin = ray.k_lower;
  const std::size_t last = ray.cells.size() - 1;
  auto emit = [&](std::size_t end, int k_end) {
    Subsegment sub;
    sub.begin = begin;
    sub.end = end;
    sub.start = ray.cells[begin];
    sub.finish = ray.cells[end];
    sub.delta_k = k_end - k_begin;
    sub.length = static_cast<int>(end - begin);
    sub.intermediate_count = sub.length - 1;
    parts.push_back(sub);
    begin = end;
    k_begin = k_end;
  };
  for (std::size_t i = 1; i < last; ++i) {
    const std::optional<int> k = intersections.marker_k(ray.cells[i]);
    if (k && *k >= k_begin && *k <= ray.k_upper) emit(i, *k);
  }
  emit(last, ray.k_upper);
  return parts;
}

inline std::vector<Subsegment> subsegment_deltas(const RefinedRay& ray,
                                                 const Trajectory& traj,
                                                 int router, int width,
                                                 int height) {
  return subsegment_deltas(ray,
                           RouterIntersections(traj, router, width, height));
}

/// Wall probability for each interior cell of a subsegment, plus the shared
/// observation uncertainty. Offsets index from the subsegment's start cell.
struct WallEvidence {
  std::vector<std::pair<std::size_t, double>> mu;
  double sigma = 0.0;
};

/// Distributes the subsegment's wall count over its interior cells.
///
/// With delta_k = 0 the part is wall-free and carries no mass. Otherwise the
/// default mode places delta_k Gaussian bumps at fractions i/(delta_k+1) of
/// the part, each of radius half the bump spacing, scaled so the strongest cell
/// receives the peak value p* = exp(-(1/M)^2); the literal mode assigns
/// p* * d_j / L where d_j is the cell's distance to the part's midpoint.
/// The shared sigma grows linearly with M (reference length 10), so long
/// parts carry weak evidence. Adjacent endpoints (M = 0) leave no interior
/// cell; the wall is pinned to the far endpoint cell with the minimal sigma.
inline WallEvidence wall_probability(const Subsegment& sub,
                                     const MapperConfig& cfg) {
  validate(cfg);
  if (sub.delta_k < 0) {
    throw std::domain_error("subsegment delta_k must be >= 0, got " +
                            std::to_string(sub.delta_k));
  }
  WallEvidence ev;
  if (sub.delta_k == 0) {
    return ev;  // wall-free span
  }
  const int M = sub.intermediate_count;
  const int L = sub.length;
  if (L < 1 || M != L - 1) {
    throw std::domain_error("malformed subsegment: L=" + std::to_string(L) +
                            ", M=" + std::to_string(M));
  }
  if (M == 0) {
    ev.sigma = std::sqrt(cfg.base_variance) * 0.1;
    ev.mu.emplace_back(1, std::exp(-1.0));
    return ev;
  }
  ev.sigma = std::sqrt(cfg.base_variance) * (static_cast<double>(M) / 10.0);
  const double peak = std::exp(-1.0 / (static_cast<double>(M) * M));
  ev.mu.reserve(M);
  if (cfg.wall_mode == WallMode::kLiteralEq4) {
    for (int j = 1; j <= M; ++j) {
      const double dj = std::abs(j - 0.5 * L);
      ev.mu.emplace_back(j, peak * dj / L);
    }
  } else {
    // One Gaussian bump per expected wall, centered at the fractions
    // i/(c+1). The radius is half the center spacing so the mixture keeps a
    // distinct peak per wall; for c = 1 this is exactly the L/4 midpoint
    // bump of the single-wall case.
    const int c = sub.delta_k;
    const double bump_width = 0.5 * L / (c + 1);
    std::vector<double> f(M);
    double f_max = 0.0;
    for (int j = 1; j <= M; ++j) {
      double g = 0.0;
      for (int i = 1; i <= c; ++i) {
        const double center = static_cast<double>(L) * i / (c + 1);
        const double z = (j - center) / bump_width;
        g += std::exp(-z * z);
      }
      f[j - 1] = g;
      f_max = std::max(f_max, g);
    }
    for (int j = 1; j <= M; ++j) {
      ev.mu.emplace_back(j, peak * f[j - 1] / f_max);
    }
  }
  return ev;
}

/// Builds a belief map from a classified trajectory.
///
/// Per sample, in trajectory order: the pose itself is marked free; the
/// strongest router at that sample drives a ray update -- a count of 0 marks
/// the whole router->pose ray free, a count >= 1 narrows the ray by its
/// trajectory crossings, marks equal-count parts free, and fuses wall
/// probability into the cells of wall-bearing parts. Trajectory cells never
/// receive wall mass (the robot stood there). Finally the perimeter of the
/// bounding box of every updated cell is stamped as wall where still
/// unobserved, approximating the building envelope.
inline BeliefMap run_mapper(const Trajectory& traj,
                            const std::vector<CellIndex>& routers,
                            const RssiThresholds& th, const MapperConfig& cfg,
                            int width, int height) {
  validate(cfg);
  validate(th);
  if (th.k_max != cfg.k_max) {
    throw std::invalid_argument(
        "config error: mapper k_max " + std::to_string(cfg.k_max) +
        " does not match threshold k_max " + std::to_string(th.k_max));
  }
  if (routers.empty()) {
    throw std::invalid_argument("config error: at least one router required");
  }
  for (std::size_t r = 0; r < routers.size(); ++r) {
    const CellIndex c = routers[r];
    if (c.x < 0 || c.x >= width || c.y < 0 || c.y >= height) {
      throw std::invalid_argument(
          "config error: router " + std::to_string(r) + " at (" +
          std::to_string(c.x) + ", " + std::to_string(c.y) + ") outside " +
          std::to_string(width) + "x" + std::to_string(height) + " grid");
    }
  }

  BeliefMap map(width, height);
  if (traj.samples.empty()) {
    return map;
  }
  if (traj.router_count != static_cast<int>(routers.size())) {
    throw std::invalid_argument(
        "config error: trajectory carries " +
        std::to_string(traj.router_count) + " reading columns for " +
        std::to_string(routers.size()) + " routers");
  }

  Grid<std::uint8_t> on_trajectory(width, height, std::uint8_t{0});
  for (const TrajectorySample& s : traj.samples) {
    if (!on_trajectory.in_bounds(s.pose)) {
      throw std::out_of_range("trajectory pose (" + std::to_string(s.pose.x) +
                              ", " + std::to_string(s.pose.y) + ") outside " +
                              std::to_string(width) + "x" +
                              std::to_string(height) + " grid");
    }
    on_trajectory[s.pose] = 1;
  }

  std::vector<RouterIntersections> intersections;
  intersections.reserve(routers.size());
  for (std::size_t r = 0; r < routers.size(); ++r) {
    intersections.emplace_back(traj, static_cast<int>(r), width, height);
  }

  Grid<std::uint8_t> touched(width, height, std::uint8_t{0});

  auto merged_variance = [&](CellIndex c, double observation_variance) {
    const double v = map.variance(c);
    return v > 0.0 ? 1.0 / (1.0 / v + 1.0 / observation_variance)
                   : observation_variance;
  };
  auto apply_free = [&](CellIndex c) {
    const double p = std::min(1.0, map.prob_free(c) + cfg.sigma_step);
    map.set(c, p, merged_variance(c, cfg.base_variance));
    touched[c] = 1;
  };
  // The robot's own cells are free by definition: wall evidence may have
  // landed there before the visit, so lift from at least the unknown level.
  auto apply_pose = [&](CellIndex c) {
    const double floor = std::max(map.prob_free(c), BeliefMap::kUnknown);
    map.set(c, std::min(1.0, floor + cfg.sigma_step),
            merged_variance(c, cfg.base_variance));
    touched[c] = 1;
  };
  auto apply_wall = [&](CellIndex c, double mu_wall, double sigma_obs) {
    if (on_trajectory[c]) return;
    const double free_estimate = 1.0 - mu_wall;
    if (!map.observed(c)) {
      map.set(c, free_estimate, sigma_obs * sigma_obs);
    } else {
      const auto [mu, sigma] =
          fuse(map.prob_free(c), std::sqrt(map.variance(c)), free_estimate,
               sigma_obs);
      map.set(c, std::clamp(mu, 0.0, 1.0), sigma * sigma);
    }
    touched[c] = 1;
  };

  for (const TrajectorySample& s : traj.samples) {
    apply_pose(s.pose);
    const std::optional<int> focused = select_focused_router(s);
    if (!focused) continue;
    const int r = *focused;
    if (r >= static_cast<int>(s.k.size()) || !s.k[r]) {
      throw std::invalid_argument(
          "sample has a reading but no wall count for router " +
          std::to_string(r) + "; classify the trajectory first");
    }
    const int k = *s.k[r];
    if (k == 0) {
      const RayPath ray = traverse(routers[r], s.pose, width, height);
      for (CellIndex c : ray.cells) apply_free(c);
      continue;
    }
    const RefinedRay ray =
        refine_endpoints(routers[r], s.pose, k, intersections[r], width,
                         height);
    for (const Subsegment& part : subsegment_deltas(ray, intersections[r])) {
      if (part.delta_k == 0) {
        for (std::size_t i = part.begin + 1; i < part.end; ++i) {
          apply_free(ray.cells[i]);
        }
      } else {
        const WallEvidence ev = wall_probability(part, cfg);
        for (const auto& [offset, mu] : ev.mu) {
          apply_wall(ray.cells[part.begin + offset], mu, ev.sigma);
        }
      }
    }
  }

  // Outer-wall approximation: stamp the bounding box of everything seen,
  // without overwriting observed cells.
  std::vector<CellIndex> seen;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (touched[{x, y}]) seen.push_back({x, y});
    }
  }
  const CellRect box = bounding_box(seen);
  for (int y = box.min.y; y <= box.max.y; ++y) {
    for (int x = box.min.x; x <= box.max.x; ++x) {
      const CellIndex c{x, y};
      if (!box.on_perimeter(c)) continue;
      if (!map.observed(c) && map.prob_free(c) == BeliefMap::kUnknown) {
        map.set(c, 0.0, cfg.base_variance);
      }
    }
  }
  return map;
}

}  // namespace kvis
