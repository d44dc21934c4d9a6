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

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "kvis/dense.hpp"
#include "kvis/grid.hpp"
#include "kvis/image_io.hpp"
#include "kvis/metrics.hpp"
#include "kvis/raycast.hpp"
#include "kvis/rssi.hpp"
#include "kvis/sparse.hpp"
#include "kvis/trajectory.hpp"

namespace kvis {

/// How decision thresholds are obtained: fitted from the pooled filtered
/// readings, or supplied explicitly.
struct ThresholdSpec {
  bool fit = true;
  int k_max = 2;               // used when fitting
  std::vector<double> bounds;  // used when not fitting; strictly decreasing
};

struct ExperimentConfig {
  std::string floorplan_path;
  double resolution = 0.05;
  std::vector<CellIndex> routers;
  std::string trajectory_file;  // empty: generate from the pattern below
  std::string trajectory_pattern = "perimeter";
  RssiModelParams rssi;
  ThresholdSpec thresholds;
  int filter_window = 5;
  MapperConfig mapper;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

/// Parses and validates an experiment config. File paths inside the config
/// are resolved relative to the config file's directory; out_dir stays
/// relative to the working directory. A seed is mandatory.
inline ExperimentConfig load_config(const std::string& path) {
  namespace fs = std::filesystem;
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open config");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }

  ExperimentConfig cfg;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  try {
    cfg.floorplan_path = resolve(j.at("floorplan").get<std::string>());
    cfg.resolution = j.at("resolution").get<double>();
    for (const auto& r : j.at("routers")) {
      cfg.routers.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
    }
    if (!j.contains("seed")) {
      throw std::runtime_error("missing required key 'seed'");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("trajectory")) {
      const auto& t = j.at("trajectory");
      if (t.contains("file")) {
        cfg.trajectory_file = resolve(t.at("file").get<std::string>());
      } else {
        cfg.trajectory_pattern = t.at("pattern").get<std::string>();
      }
    }

    if (j.contains("rssi")) {
      const auto& r = j.at("rssi");
      cfg.rssi.p0_dbm = r.value("p0_dbm", cfg.rssi.p0_dbm);
      cfg.rssi.d0_m = r.value("d0_m", cfg.rssi.d0_m);
      cfg.rssi.path_loss_exponent =
          r.value("path_loss_exponent", cfg.rssi.path_loss_exponent);
      cfg.rssi.wall_attenuation_db =
          r.value("wall_attenuation_db", cfg.rssi.wall_attenuation_db);
      cfg.rssi.noise_sigma_db =
          r.value("noise_sigma_db", cfg.rssi.noise_sigma_db);
    }
    if (j.contains("thresholds")) {
      const auto& th = j.at("thresholds");
      if (th.contains("bounds")) {
        cfg.thresholds.fit = false;
        cfg.thresholds.bounds = th.at("bounds").get<std::vector<double>>();
        cfg.thresholds.k_max = static_cast<int>(cfg.thresholds.bounds.size());
      } else {
        cfg.thresholds.fit = true;
        cfg.thresholds.k_max = th.value("k_max", cfg.thresholds.k_max);
      }
    }
    cfg.filter_window = j.value("filter_window", cfg.filter_window);
    if (j.contains("mapper")) {
      const auto& m = j.at("mapper");
      cfg.mapper.sigma_step = m.value("sigma_step", cfg.mapper.sigma_step);
      cfg.mapper.base_variance =
          m.value("base_variance", cfg.mapper.base_variance);
      if (m.contains("wall_mode")) {
        cfg.mapper.wall_mode =
            wall_mode_from_string(m.at("wall_mode").get<std::string>());
      }
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  if (cfg.routers.empty()) {
    throw std::runtime_error(path + ": at least one router is required");
  }
  if (cfg.trajectory_file.empty() && cfg.trajectory_pattern != "perimeter" &&
      cfg.trajectory_pattern != "rooms") {
    throw std::runtime_error(path + ": unknown trajectory pattern '" +
                             cfg.trajectory_pattern + "'");
  }
  if (!fs::exists(cfg.floorplan_path)) {
    throw std::runtime_error(path + ": floorplan not found: " +
                             cfg.floorplan_path);
  }
  if (!cfg.trajectory_file.empty() && !fs::exists(cfg.trajectory_file)) {
    throw std::runtime_error(path + ": trajectory file not found: " +
                             cfg.trajectory_file);
  }
  if (cfg.filter_window < 1 || cfg.filter_window % 2 == 0) {
    throw std::runtime_error(path + ": filter_window must be odd and >= 1");
  }
  try {
    validate(cfg.rssi);
    validate(cfg.mapper);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return cfg;
}

namespace detail {

// The eight neighbor directions in clockwise order starting north
// (image coordinates: y grows downward).
inline constexpr int kDirX[8] = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr int kDirY[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

inline int direction_index(CellIndex from, CellIndex to) {
  for (int d = 0; d < 8; ++d) {
    if (from.x + kDirX[d] == to.x && from.y + kDirY[d] == to.y) return d;
  }
  throw std::logic_error("direction_index: cells are not adjacent");
}

/// Moore-neighbor boundary trace of a region of free cells. Starting at a
/// boundary cell with a known outside neighbor, repeatedly scans the eight
/// neighbors clockwise from the outside cell and steps to the first region
/// cell found. The walk stops when its state (cell plus outside direction)
/// repeats, which closes the loop; on spur-shaped regions some cells appear
/// twice, which is fine for a robot path. Consecutive cells are 8-adjacent.
inline std::vector<CellIndex> trace_contour(const Grid<std::uint8_t>& region,
                                            CellIndex start,
                                            CellIndex outside) {
  std::vector<CellIndex> contour{start};
  bool isolated = true;
  for (int d = 0; d < 8; ++d) {
    const CellIndex n{start.x + kDirX[d], start.y + kDirY[d]};
    if (region.in_bounds(n) && region[n]) {
      isolated = false;
      break;
    }
  }
  if (isolated) return contour;

  auto state_key = [&](CellIndex cell, CellIndex back) {
    return (static_cast<std::uint64_t>(cell.y) * region.width() + cell.x) * 8 +
           direction_index(cell, back);
  };
  std::unordered_set<std::uint64_t> seen;
  CellIndex cur = start;
  CellIndex back = outside;
  seen.insert(state_key(cur, back));
  const std::size_t limit = 8 * region.cells().size() + 16;
  for (std::size_t step = 0; step < limit; ++step) {
    const int bi = direction_index(cur, back);
    CellIndex next = cur;
    CellIndex next_back = back;
    CellIndex probe_back = back;
    bool found = false;
    for (int j = 1; j <= 8; ++j) {
      const int d = (bi + j) % 8;
      const CellIndex n{cur.x + kDirX[d], cur.y + kDirY[d]};
      if (region.in_bounds(n) && region[n]) {
        next = n;
        next_back = probe_back;
        found = true;
        break;
      }
      probe_back = n;
    }
    if (!found) break;
    if (!seen.insert(state_key(next, next_back)).second) break;
    contour.push_back(next);
    cur = next;
    back = next_back;
  }
  return contour;
}

/// Shortest 8-connected path through the region between two cells
/// (breadth-first, deterministic neighbor order). Includes both endpoints.
inline std::vector<CellIndex> bfs_path(const Grid<std::uint8_t>& region,
                                       CellIndex from, CellIndex to) {
  Grid<int> parent(region.width(), region.height(), -2);  // -2 unvisited
  std::deque<CellIndex> queue{from};
  parent[from] = -1;
  while (!queue.empty()) {
    const CellIndex c = queue.front();
    queue.pop_front();
    if (c == to) break;
    for (int d = 0; d < 8; ++d) {
      const CellIndex n{c.x + kDirX[d], c.y + kDirY[d]};
      if (region.in_bounds(n) && region[n] && parent[n] == -2) {
        parent[n] = direction_index(n, c);  // direction back to parent
        queue.push_back(n);
      }
    }
  }
  if (parent[to] == -2) {
    throw std::runtime_error("bfs_path: target unreachable within region");
  }
  std::vector<CellIndex> path{to};
  CellIndex c = to;
  while (parent[c] != -1) {
    const int d = parent[c];
    c = {c.x + kDirX[d], c.y + kDirY[d]};
    path.push_back(c);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace detail

/// Generates a wall-following robot trajectory.
///
/// "perimeter" walks one loop along the outer boundary of the reachable free
/// region (the region holding the first router, or the largest region when
/// the plan carries none). "rooms" additionally circles every interior
/// obstacle island, reaching each via a shortest free-space path, so all
/// walls get visited. Free regions unreachable from the chosen one are
/// skipped with a warning. Consecutive poses are 8-adjacent; timestamps are
/// synthetic (one second per step).
inline Trajectory generate_trajectory(const Floorplan& plan,
                                      const std::string& pattern,
                                      std::uint64_t seed) {
  (void)seed;  // both patterns are deterministic walks
  if (pattern != "perimeter" && pattern != "rooms") {
    throw std::invalid_argument("unknown trajectory pattern '" + pattern +
                                "' (expected perimeter or rooms)");
  }
  const int width = plan.width();
  const int height = plan.height();

  // Label 8-connected free components.
  Grid<int> component(width, height, -1);
  std::vector<int> component_size;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const CellIndex c0{x, y};
      if (plan.is_wall(c0) || component[c0] >= 0) continue;
      const int id = static_cast<int>(component_size.size());
      int size = 0;
      std::deque<CellIndex> queue{c0};
      component[c0] = id;
      while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        ++size;
        for (int d = 0; d < 8; ++d) {
          const CellIndex n{c.x + detail::kDirX[d], c.y + detail::kDirY[d]};
          if (component.in_bounds(n) && !plan.is_wall(n) &&
              component[n] < 0) {
            component[n] = id;
            queue.push_back(n);
          }
        }
      }
      component_size.push_back(size);
    }
  }
  if (component_size.empty()) {
    throw std::invalid_argument("plan has no free cells");
  }

  int region_id = 0;
  if (!plan.routers().empty()) {
    region_id = component.at(plan.routers().front());
  } else {
    for (std::size_t i = 1; i < component_size.size(); ++i) {
      if (component_size[i] > component_size[region_id]) {
        region_id = static_cast<int>(i);
      }
    }
  }

  Grid<std::uint8_t> region(width, height, std::uint8_t{0});
  int unreachable = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (component[{x, y}] == region_id) {
        region[{x, y}] = 1;
      } else if (component[{x, y}] >= 0) {
        ++unreachable;
      }
    }
  }
  if (unreachable > 0) {
    std::cerr << "warning: " << unreachable
              << " free cells lie in regions unreachable from the trajectory"
                 " region and are skipped\n";
  }

  // Outer boundary start: the first region cell in scan order. Its west
  // neighbor cannot be in the region (it would have been scanned first).
  CellIndex start{-1, -1};
  for (int y = 0; y < height && start.x < 0; ++y) {
    for (int x = 0; x < width; ++x) {
      if (region[{x, y}]) {
        start = {x, y};
        break;
      }
    }
  }
  std::vector<CellIndex> poses =
      detail::trace_contour(region, start, {start.x - 1, start.y});

  if (pattern == "rooms") {
    // Obstacle islands: non-region components not connected to the border.
    Grid<std::uint8_t> exterior(width, height, std::uint8_t{0});
    std::deque<CellIndex> queue;
    auto seed_exterior = [&](CellIndex c) {
      if (!region[c] && !exterior[c]) {
        exterior[c] = 1;
        queue.push_back(c);
      }
    };
    for (int x = 0; x < width; ++x) {
      seed_exterior({x, 0});
      seed_exterior({x, height - 1});
    }
    for (int y = 0; y < height; ++y) {
      seed_exterior({0, y});
      seed_exterior({width - 1, y});
    }
    while (!queue.empty()) {
      const CellIndex c = queue.front();
      queue.pop_front();
      for (int d = 0; d < 8; ++d) {
        const CellIndex n{c.x + detail::kDirX[d], c.y + detail::kDirY[d]};
        if (exterior.in_bounds(n)) seed_exterior(n);
      }
    }

    Grid<int> island(width, height, -1);
    int island_count = 0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const CellIndex c0{x, y};
        if (region[c0] || exterior[c0] || island[c0] >= 0) continue;
        const int id = island_count++;
        std::deque<CellIndex> flood{c0};
        island[c0] = id;
        while (!flood.empty()) {
          const CellIndex c = flood.front();
          flood.pop_front();
          for (int d = 0; d < 8; ++d) {
            const CellIndex n{c.x + detail::kDirX[d],
                              c.y + detail::kDirY[d]};
            if (island.in_bounds(n) && !region[n] && !exterior[n] &&
                island[n] < 0) {
              island[n] = id;
              flood.push_back(n);
            }
          }
        }
      }
    }

    // Anchor each island at the first region cell (scan order) adjacent to
    // it, then walk a loop around the island.
    for (int id = 0; id < island_count; ++id) {
      CellIndex anchor{-1, -1};
      CellIndex outside{-1, -1};
      for (int y = 0; y < height && anchor.x < 0; ++y) {
        for (int x = 0; x < width && anchor.x < 0; ++x) {
          const CellIndex c{x, y};
          if (!region[c]) continue;
          for (int d = 0; d < 8; ++d) {
            const CellIndex n{c.x + detail::kDirX[d], c.y + detail::kDirY[d]};
            if (island.in_bounds(n) && island[n] == id) {
              anchor = c;
              outside = n;
              break;
            }
          }
        }
      }
      if (anchor.x < 0) continue;  // island borders another region only
      const std::vector<CellIndex> loop =
          detail::trace_contour(region, anchor, outside);
      const std::vector<CellIndex> bridge =
          detail::bfs_path(region, poses.back(), anchor);
      poses.insert(poses.end(), bridge.begin() + 1, bridge.end());
      poses.insert(poses.end(), loop.begin() + 1, loop.end());
    }
  }

  Trajectory traj;
  traj.router_count = 0;
  traj.samples.reserve(poses.size());
  double t = 0.0;
  for (CellIndex p : poses) {
    TrajectorySample s;
    s.time_s = t;
    s.pose = p;
    traj.samples.push_back(std::move(s));
    t += 1.0;
  }
  return traj;
}

inline nlohmann::json thresholds_to_json(const RssiThresholds& th) {
  nlohmann::json j;
  j["k_max"] = th.k_max;
  j["bounds"] = th.bounds;
  if (!th.centroids.empty()) {
    j["centroids"] = th.centroids;
  }
  return j;
}

inline RssiThresholds thresholds_from_json(const nlohmann::json& j) {
  RssiThresholds th;
  th.k_max = j.at("k_max").get<int>();
  th.bounds = j.at("bounds").get<std::vector<double>>();
  if (j.contains("centroids")) {
    th.centroids = j.at("centroids").get<std::vector<double>>();
  }
  validate(th);
  return th;
}

inline void write_thresholds_json(const RssiThresholds& th,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << thresholds_to_json(th).dump(2) << "\n";
}

inline RssiThresholds read_thresholds_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  return thresholds_from_json(j);
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["area_m2"] = r.area_m2;
  j["n_routers"] = r.n_routers;
  j["n_points"] = r.n_points;
  j["k_true"] = r.k_true;
  j["k_false"] = r.k_false;
  j["k_accuracy_pct"] = r.k_accuracy_pct;
  j["iou"] = r.iou;
  j["mse"] = r.mse;
  j["mse_raw_px2"] = r.mse_raw_px2;
  return j;
}

/// Filtered reading series for one router, aligned with the samples that
/// carry a reading (in sample order).
inline std::vector<double> filtered_readings(const Trajectory& traj,
                                             int router, int window) {
  std::vector<double> series;
  for (const TrajectorySample& s : traj.samples) {
    if (router < static_cast<int>(s.rssi_dbm.size()) && s.rssi_dbm[router]) {
      series.push_back(*s.rssi_dbm[router]);
    }
  }
  return sliding_filter(series, window);
}

struct PipelineResult {
  BeliefMap map;
  EvalReport report;
  RssiThresholds thresholds;
  std::vector<std::string> files;
};

namespace detail {

template <typename F>
auto pipeline_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + " stage failed: " + e.what());
  }
}

}  // namespace detail

/// Runs the full experiment: load plan -> obtain trajectory -> simulate RSSI
/// (unless the trajectory file already carries readings) -> filter -> fit or
/// adopt thresholds -> classify -> map -> evaluate -> write artifacts.
/// Failures abort with the stage name; partially written outputs are removed.
inline PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  try {
    Floorplan plan = detail::pipeline_stage("load", [&] {
      Floorplan p = load_floorplan(cfg.floorplan_path, cfg.resolution);
      for (std::size_t i = 0; i < cfg.routers.size(); ++i) {
        try {
          p.add_router(cfg.routers[i]);
        } catch (const std::exception& e) {
          throw std::runtime_error("router " + std::to_string(i) + ": " +
                                   e.what());
        }
      }
      return p;
    });

    Trajectory traj = detail::pipeline_stage("trajectory", [&] {
      if (!cfg.trajectory_file.empty()) {
        return read_trajectory_csv(cfg.trajectory_file, plan);
      }
      return generate_trajectory(plan, cfg.trajectory_pattern, cfg.seed);
    });

    detail::pipeline_stage("simulate", [&] {
      bool has_readings = false;
      for (const TrajectorySample& s : traj.samples) {
        for (const auto& v : s.rssi_dbm) {
          if (v) {
            has_readings = true;
            break;
          }
        }
        if (has_readings) break;
      }
      if (has_readings) {
        if (traj.router_count != static_cast<int>(cfg.routers.size())) {
          throw std::runtime_error(
              "trajectory file carries " + std::to_string(traj.router_count) +
              " reading columns for " + std::to_string(cfg.routers.size()) +
              " configured routers");
        }
        return 0;
      }
      traj.router_count = static_cast<int>(cfg.routers.size());
      std::mt19937_64 rng(cfg.seed);
      for (TrajectorySample& s : traj.samples) {
        s.rssi_dbm.assign(traj.router_count, std::nullopt);
        s.k.assign(traj.router_count, std::nullopt);
        for (int r = 0; r < traj.router_count; ++r) {
          s.rssi_dbm[r] =
              simulate_rssi(plan, plan.routers()[r], s.pose, cfg.rssi, rng);
        }
      }
      return 0;
    });

    const RssiThresholds th = detail::pipeline_stage("fit", [&] {
      if (!cfg.thresholds.fit) {
        RssiThresholds t;
        t.k_max = static_cast<int>(cfg.thresholds.bounds.size());
        t.bounds = cfg.thresholds.bounds;
        validate(t);
        return t;
      }
      std::vector<double> pool;
      for (int r = 0; r < traj.router_count; ++r) {
        const std::vector<double> f =
            filtered_readings(traj, r, cfg.filter_window);
        pool.insert(pool.end(), f.begin(), f.end());
      }
      return fit_thresholds(pool, cfg.thresholds.k_max, cfg.seed);
    });

    detail::pipeline_stage("classify", [&] {
      classify_trajectory(traj, th, cfg.filter_window);
      return 0;
    });

    MapperConfig mapper_cfg = cfg.mapper;
    mapper_cfg.k_max = th.k_max;
    BeliefMap map = detail::pipeline_stage("map", [&] {
      return run_mapper(traj, plan.routers(), th, mapper_cfg, plan.width(),
                        plan.height());
    });

    std::vector<KField> fields = detail::pipeline_stage("k-field", [&] {
      std::vector<KField> out;
      out.reserve(plan.routers().size());
      for (CellIndex r : plan.routers()) {
        out.push_back(k_field(plan, r));
      }
      return out;
    });

    EvalReport report = detail::pipeline_stage("evaluate", [&] {
      std::vector<int> est;
      std::vector<int> gt;
      for (const TrajectorySample& s : traj.samples) {
        const std::optional<int> focused = select_focused_router(s);
        if (!focused || !s.k[*focused]) continue;
        const int truth = fields[*focused].values[s.pose];
        if (truth == KField::kWall) continue;
        est.push_back(*s.k[*focused]);
        gt.push_back(truth);
      }
      const KAccuracy acc = k_accuracy(est, gt);
      const MseScore err = mse(map, plan);
      EvalReport r;
      r.area_m2 = plan.free_area_m2();
      r.n_routers = static_cast<int>(plan.routers().size());
      r.n_points = acc.true_count + acc.false_count;
      r.k_true = acc.true_count;
      r.k_false = acc.false_count;
      r.k_accuracy_pct = acc.pct;
      r.iou = iou(map, plan);
      r.mse = err.normalized;
      r.mse_raw_px2 = err.raw_px2;
      return r;
    });

    detail::pipeline_stage("write", [&] {
      fs::create_directories(cfg.out_dir);
      auto target = [&](const std::string& name) {
        const std::string p = (fs::path(cfg.out_dir) / name).string();
        written.push_back(p);
        return p;
      };
      write_trajectory_csv(traj, plan.resolution(), target("trajectory.csv"));
      write_thresholds_json(th, target("thresholds.json"));
      export_grayscale(map, target("belief.pgm"));
      for (std::size_t r = 0; r < fields.size(); ++r) {
        write_kfield_csv(fields[r],
                         target("kfield_r" + std::to_string(r) + ".csv"));
      }
      {
        const std::string p = target("report.json");
        std::ofstream out(p, std::ios::trunc);
        if (!out) throw std::runtime_error(p + ": cannot open for writing");
        out << report_to_json(report).dump(2) << "\n";
      }
      {
        const std::string p = target("report.txt");
        std::ofstream out(p, std::ios::trunc);
        if (!out) throw std::runtime_error(p + ": cannot open for writing");
        out << report_table(report);
      }
      return 0;
    });

    return PipelineResult{std::move(map), report, th, std::move(written)};
  } catch (...) {
    for (const std::string& f : written) {
      std::error_code ec;
      fs::remove(f, ec);
    }
    throw;
  }
}

}  // namespace kvis
