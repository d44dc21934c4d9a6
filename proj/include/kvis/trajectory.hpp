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

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kvis/grid.hpp"
#include "kvis/rssi.hpp"

namespace kvis {

/// One timestamped robot pose with per-router RSSI readings and, once
/// classified, per-router wall counts. A missing reading leaves both slots
/// empty.
struct TrajectorySample {
  double time_s = 0.0;
  CellIndex pose;
  std::vector<std::optional<double>> rssi_dbm;
  std::vector<std::optional<int>> k;
};

struct Trajectory {
  int router_count = 0;
  std::vector<TrajectorySample> samples;
};

/// Runs the sliding median filter over each router's reading series (in
/// sample order, skipping gaps) and classifies every filtered reading into a
/// wall count.
inline void classify_trajectory(Trajectory& traj, const RssiThresholds& th,
                                int window) {
  validate(th);
  for (TrajectorySample& s : traj.samples) {
    s.rssi_dbm.resize(traj.router_count);
    s.k.assign(traj.router_count, std::nullopt);
  }
  for (int r = 0; r < traj.router_count; ++r) {
    std::vector<std::size_t> where;
    std::vector<double> series;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      if (traj.samples[i].rssi_dbm[r].has_value()) {
        where.push_back(i);
        series.push_back(*traj.samples[i].rssi_dbm[r]);
      }
    }
    const std::vector<double> filtered = sliding_filter(series, window);
    for (std::size_t j = 0; j < where.size(); ++j) {
      traj.samples[where[j]].k[r] = classify_k(filtered[j], th);
    }
  }
}

/// Writes a trajectory as CSV with header "t,x,y,rssi_0,...". Poses are the
/// metric cell centers; missing readings are empty fields.
inline void write_trajectory_csv(const Trajectory& traj, double resolution,
                                 const std::string& path) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("resolution must be positive, got " +
                                std::to_string(resolution));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "t,x,y";
  for (int r = 0; r < traj.router_count; ++r) {
    out << ",rssi_" << r;
  }
  out << "\n";
  char buf[64];
  for (const TrajectorySample& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.3f", s.time_s);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.4f,%.4f", (s.pose.x + 0.5) * resolution,
                  (s.pose.y + 0.5) * resolution);
    out << buf;
    for (int r = 0; r < traj.router_count; ++r) {
      out << ",";
      if (r < static_cast<int>(s.rssi_dbm.size()) && s.rssi_dbm[r]) {
        std::snprintf(buf, sizeof buf, "%.4f", *s.rssi_dbm[r]);
        out << buf;
      }
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

/// Reads a trajectory CSV written by write_trajectory_csv (or hand-made in
/// the same shape). Metric poses are snapped to the plan's cells; poses
/// outside the plan raise a bounds error naming the offending row.
inline Trajectory read_trajectory_csv(const std::string& path,
                                      const Floorplan& plan) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty trajectory CSV");
  }
  int router_count = 0;
  {
    std::istringstream header(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(header, col, ',')) cols.push_back(col);
    if (cols.size() < 3 || cols[0] != "t" || cols[1] != "x" || cols[2] != "y") {
      throw std::runtime_error(path + ": expected header t,x,y,rssi_0,...");
    }
    router_count = static_cast<int>(cols.size()) - 3;
  }
  Trajectory traj;
  traj.router_count = router_count;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    while (cells.size() < static_cast<std::size_t>(router_count) + 3) {
      cells.emplace_back();  // trailing empty fields
    }
    TrajectorySample s;
    try {
      s.time_s = std::stod(cells[0]);
      const WorldPoint p{std::stod(cells[1]), std::stod(cells[2])};
      s.pose = world_to_cell(p, plan);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": row " + std::to_string(row) + ": " +
                               e.what());
    }
    s.rssi_dbm.resize(router_count);
    s.k.resize(router_count);
    for (int r = 0; r < router_count; ++r) {
      const std::string& f = cells[3 + r];
      if (!f.empty()) {
        try {
          s.rssi_dbm[r] = std::stod(f);
        } catch (const std::exception&) {
          throw std::runtime_error(path + ": row " + std::to_string(row) +
                                   ": bad rssi field '" + f + "'");
        }
      }
    }
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

}  // namespace kvis
