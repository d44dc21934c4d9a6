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
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>

#include "kvis/grid.hpp"

namespace kvis {

/// Map-quality summary for one experiment run. mse is on the normalized
/// [0,1] intensity scale; mse_raw_px2 is the same error on the raw 8-bit
/// scale (multiplied by 255^2).
struct EvalReport {
  double area_m2 = 0.0;
  int n_routers = 0;
  int n_points = 0;
  int k_true = 0;
  int k_false = 0;
  double k_accuracy_pct = 0.0;
  double iou = 0.0;
  double mse = 0.0;
  double mse_raw_px2 = 0.0;
};

struct KAccuracy {
  int true_count = 0;
  int false_count = 0;
  double pct = 0.0;
};

/// Element-by-element comparison of estimated vs. ground-truth wall counts.
/// The denominator is the number of evaluated points.
inline KAccuracy k_accuracy(std::span<const int> est, std::span<const int> gt) {
  if (est.size() != gt.size()) {
    throw std::domain_error("k_accuracy: length mismatch, " +
                            std::to_string(est.size()) + " vs " +
                            std::to_string(gt.size()));
  }
  if (est.empty()) {
    throw std::domain_error("k_accuracy: no points to evaluate");
  }
  KAccuracy acc;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i] == gt[i]) {
      ++acc.true_count;
    } else {
      ++acc.false_count;
    }
  }
  acc.pct = 100.0 * acc.true_count / (acc.true_count + acc.false_count);
  return acc;
}

namespace detail {

inline void check_same_dims(int ew, int eh, int gw, int gh) {
  if (ew != gw || eh != gh) {
    throw std::domain_error("map dimension mismatch: " + std::to_string(ew) +
                            "x" + std::to_string(eh) + " vs " +
                            std::to_string(gw) + "x" + std::to_string(gh));
  }
}

}  // namespace detail

/// Intersection-over-union of the free space, restricted to cells known in
/// both maps (estimate belief != 0.5; ground truth is always known). Free
/// means prob_free > 0.5 in the estimate and non-wall in the ground truth.
inline double iou(const BeliefMap& est, const Floorplan& gt) {
  detail::check_same_dims(est.width(), est.height(), gt.width(), gt.height());
  long long inter = 0;
  long long uni = 0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const CellIndex c{x, y};
      const double p = est.prob_free(c);
      if (p == BeliefMap::kUnknown) continue;  // masked out
      const bool est_free = p > BeliefMap::kUnknown;
      const bool gt_free = !gt.is_wall(c);
      if (est_free && gt_free) ++inter;
      if (est_free || gt_free) ++uni;
    }
  }
  if (uni == 0) {
    throw std::domain_error("iou undefined: union of free space is empty");
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct MseScore {
  double normalized = 0.0;  // [0,1] intensity scale
  double raw_px2 = 0.0;     // 8-bit intensity scale
};

/// Mean squared intensity difference over all cells after encoding both maps
/// to the trinary 8-bit convention (wall 0, unknown 127, free 255).
inline MseScore mse(const BeliefMap& est, const Floorplan& gt) {
  detail::check_same_dims(est.width(), est.height(), gt.width(), gt.height());
  double sum = 0.0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const CellIndex c{x, y};
      const double p = est.prob_free(c);
      const int est_px =
          p == BeliefMap::kUnknown ? 127 : (p > BeliefMap::kUnknown ? 255 : 0);
      const int gt_px = gt.is_wall(c) ? 0 : 255;
      const double d = est_px - gt_px;
      sum += d * d;
    }
  }
  const double n = static_cast<double>(gt.width()) * gt.height();
  MseScore score;
  score.raw_px2 = sum / n;
  score.normalized = score.raw_px2 / (255.0 * 255.0);
  return score;
}

/// Renders the report as an aligned two-column text table. raw_scale selects
/// the 8-bit px^2 MSE row instead of the normalized one.
inline std::string report_table(const EvalReport& r, bool raw_scale = false) {
  char buf[64];
  std::string out;
  auto row = [&out, &buf](const char* label, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-26s", label);
    out += buf;
    out += value;
    out += '\n';
  };
  auto num = [&buf](const char* fmt, double v) {
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  row("Area of Map", num("%.2f", r.area_m2) + " m^2");
  row("#Router", std::to_string(r.n_routers));
  row("#Data points", std::to_string(r.n_points));
  row("k-value Prediction True", std::to_string(r.k_true));
  row("k-value Prediction False", std::to_string(r.k_false));
  row("k-value Accuracy %", num("%.2f", r.k_accuracy_pct));
  row("IOU Score", num("%.4f", r.iou));
  row("MSE Score", raw_scale ? num("%.4f", r.mse_raw_px2) + " px^2"
                             : num("%.6f", r.mse));
  return out;
}

}  // namespace kvis
