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
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kvis/grid.hpp"
#include "kvis/raycast.hpp"

namespace kvis {

/// Log-distance path-loss model with a fixed per-wall attenuation and
/// optional Gaussian measurement noise.
struct RssiModelParams {
  double p0_dbm = -40.0;             // received power at the reference distance
  double d0_m = 1.0;                 // reference distance; closer ranges clamp
  double path_loss_exponent = 2.2;   // free-space decay rate
  double wall_attenuation_db = 8.0;  // loss per wall crossed
  double noise_sigma_db = 0.0;       // std. dev. of additive noise, 0 = exact
};

inline void validate(const RssiModelParams& p) {
  if (!(p.d0_m > 0.0)) {
    throw std::invalid_argument("d0_m must be positive, got " +
                                std::to_string(p.d0_m));
  }
  if (!(p.path_loss_exponent > 0.0)) {
    throw std::invalid_argument("path_loss_exponent must be positive, got " +
                                std::to_string(p.path_loss_exponent));
  }
  if (!(p.wall_attenuation_db >= 0.0)) {
    throw std::invalid_argument("wall_attenuation_db must be >= 0, got " +
                                std::to_string(p.wall_attenuation_db));
  }
  if (!(p.noise_sigma_db >= 0.0)) {
    throw std::invalid_argument("noise_sigma_db must be >= 0, got " +
                                std::to_string(p.noise_sigma_db));
  }
}

/// Simulated received power in dBm at a pose for one router: reference power
/// minus log-distance decay minus one attenuation step per wall crossed, plus
/// optional Gaussian noise. With noise_sigma_db = 0 the result is exact and
/// the generator is left untouched.
inline double simulate_rssi(const Floorplan& plan, CellIndex router,
                            CellIndex pose, const RssiModelParams& params,
                            std::mt19937_64& rng) {
  validate(params);
  for (CellIndex e : {router, pose}) {
    if (!plan.in_bounds(e) || plan.is_wall(e)) {
      throw std::domain_error("rssi endpoint (" + std::to_string(e.x) + ", " +
                              std::to_string(e.y) +
                              ") must be a free in-bounds cell");
    }
  }
  const int k = count_wall_crossings(plan, router, pose);
  const double dx = (pose.x - router.x) * plan.resolution();
  const double dy = (pose.y - router.y) * plan.resolution();
  const double d = std::max(std::hypot(dx, dy), params.d0_m);
  double rssi = params.p0_dbm -
                10.0 * params.path_loss_exponent * std::log10(d / params.d0_m) -
                params.wall_attenuation_db * k;
  if (params.noise_sigma_db > 0.0) {
    std::normal_distribution<double> noise(0.0, params.noise_sigma_db);
    rssi += noise(rng);
  }
  return rssi;
}

/// Lloyd's algorithm on scalars with farthest-point seeding. The seeding, the
/// iteration order, and all tie-breaks are deterministic functions of the
/// seed, so identical inputs yield identical centroids. Returns the centroids
/// sorted in descending order.
inline std::vector<double> kmeans_1d(std::span<const double> samples,
                                     int clusters, std::uint64_t seed) {
  if (clusters < 1) {
    throw std::invalid_argument("cluster count must be >= 1, got " +
                                std::to_string(clusters));
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || sorted[i] != sorted[i - 1]) ++distinct;
  }
  if (distinct < static_cast<std::size_t>(clusters)) {
    throw std::invalid_argument(
        "need at least " + std::to_string(clusters) +
        " distinct samples, got " + std::to_string(distinct));
  }

  // Farthest-point seeding: the first centroid is a seeded draw, each later
  // one the sample farthest from every centroid chosen so far (lowest index
  // on ties).
  std::mt19937_64 rng(seed);
  std::vector<double> centroids;
  centroids.reserve(clusters);
  centroids.push_back(
      sorted[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> nearest(n);
  while (centroids.size() < static_cast<std::size_t>(clusters)) {
    std::size_t best = 0;
    double best_dist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dist = std::abs(sorted[i] - centroids[0]);
      for (double c : centroids) {
        dist = std::min(dist, std::abs(sorted[i] - c));
      }
      if (dist > best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    centroids.push_back(sorted[best]);
  }
  std::sort(centroids.begin(), centroids.end());

  // Lloyd iterations; on scalars each cluster is a contiguous slice of the
  // sorted samples, so assignment is a boundary sweep.
  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t nearest_c = 0;
      double nearest_d = std::abs(sorted[i] - centroids[0]);
      for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = std::abs(sorted[i] - centroids[c]);
        if (d < nearest_d) {
          nearest_d = d;
          nearest_c = c;
        }
      }
      if (assign[i] != nearest_c) {
        assign[i] = nearest_c;
        changed = true;
      }
    }
    std::vector<double> sum(centroids.size(), 0.0);
    std::vector<std::size_t> count(centroids.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] += sorted[i];
      ++count[assign[i]];
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (count[c] > 0) {
        centroids[c] = sum[c] / count[c];
      } else {
        // Reseat an emptied cluster at the sample farthest from its nearest
        // surviving centroid.
        std::size_t best = 0;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          double dist = std::numeric_limits<double>::infinity();
          for (std::size_t c2 = 0; c2 < centroids.size(); ++c2) {
            if (count[c2] > 0) {
              dist = std::min(dist, std::abs(sorted[i] - centroids[c2]));
            }
          }
          if (dist > best_dist) {
            best_dist = dist;
            best = i;
          }
        }
        centroids[c] = sorted[best];
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::sort(centroids.begin(), centroids.end(), std::greater<>());
  return centroids;
}

/// Decision thresholds mapping an RSSI reading to a wall count in [0, k_max].
/// Centroids are the fitted cluster means in descending order (strongest
/// signal = fewest walls); bound k separates count k-1 from count k.
struct RssiThresholds {
  int k_max = 0;
  std::vector<double> centroids;  // size k_max + 1, strictly decreasing
  std::vector<double> bounds;     // size k_max, strictly decreasing
};

inline void validate(const RssiThresholds& th) {
  if (th.k_max < 1) {
    throw std::invalid_argument("k_max must be >= 1, got " +
                                std::to_string(th.k_max));
  }
  if (th.bounds.size() != static_cast<std::size_t>(th.k_max)) {
    throw std::invalid_argument("expected " + std::to_string(th.k_max) +
                                " bounds, got " +
                                std::to_string(th.bounds.size()));
  }
  for (std::size_t i = 1; i < th.bounds.size(); ++i) {
    if (!(th.bounds[i] < th.bounds[i - 1])) {
      throw std::invalid_argument("bounds must be strictly decreasing");
    }
  }
  if (!th.centroids.empty()) {
    if (th.centroids.size() != static_cast<std::size_t>(th.k_max) + 1) {
      throw std::invalid_argument("expected " + std::to_string(th.k_max + 1) +
                                  " centroids, got " +
                                  std::to_string(th.centroids.size()));
    }
    for (std::size_t i = 1; i < th.centroids.size(); ++i) {
      if (!(th.centroids[i] < th.centroids[i - 1])) {
        throw std::invalid_argument("centroids must be strictly decreasing");
      }
    }
  }
}

/// Fits k_max + 1 clusters to pooled RSSI samples and derives each decision
/// bound as the midpoint of adjacent centroids. Fails loudly if the fitted
/// clusters do not yield strictly decreasing bounds.
inline RssiThresholds fit_thresholds(std::span<const double> samples,
                                     int k_max, std::uint64_t seed) {
  if (k_max < 1) {
    throw std::invalid_argument("k_max must be >= 1, got " +
                                std::to_string(k_max));
  }
  RssiThresholds th;
  th.k_max = k_max;
  th.centroids = kmeans_1d(samples, k_max + 1, seed);
  th.bounds.resize(k_max);
  for (int k = 1; k <= k_max; ++k) {
    th.bounds[k - 1] = 0.5 * (th.centroids[k - 1] + th.centroids[k]);
  }
  validate(th);
  return th;
}

/// Classifies a reading into a wall count: 0 above the first bound, k between
/// bounds k and k+1 (a reading exactly on a bound takes the larger count),
/// k_max at or below the last bound.
inline int classify_k(double rssi_dbm, const RssiThresholds& th) {
  validate(th);
  int k = 0;
  for (double bound : th.bounds) {
    if (rssi_dbm <= bound) ++k;
  }
  return k;
}

/// Centered sliding median. The window must be odd; near the series edges it
/// shrinks symmetrically so it stays centered and odd. The output is always
/// an element of the window, never an invented in-between value, so a spike
/// adjacent to a series edge cannot leak into its neighbour's estimate.
inline std::vector<double> sliding_filter(std::span<const double> series,
                                          int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("window must be odd and >= 1, got " +
                                std::to_string(window));
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(series.size());
  std::vector<double> out(series.size());
  std::vector<double> scratch;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t half =
        std::min<std::ptrdiff_t>({window / 2, i, n - 1 - i});
    scratch.assign(series.begin() + (i - half), series.begin() + (i + half + 1));
    std::sort(scratch.begin(), scratch.end());
    out[i] = scratch[scratch.size() / 2];
  }
  return out;
}

}  // namespace kvis
