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

// Command-line driver. Subcommands mirror the pipeline stages so each can be
// exercised on its own through the documented file formats:
//
//   simulate   config -> out/trajectory.csv        (poses + RSSI readings)
//   fit        out/trajectory.csv -> out/thresholds.json
//   map        trajectory + thresholds -> out/belief.pgm
//   dense      config -> out/kfield_r<i>.csv + out/dense.pgm
//   eval       belief + trajectory + thresholds -> out/report.{json,txt}
//   pipeline   config -> all of the above in one pass
//
// Every run is fully determined by the config file and the seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kvis/kvis.hpp"

namespace {

namespace fs = std::filesystem;
using kvis::CellIndex;
using kvis::ExperimentConfig;
using kvis::Floorplan;
using kvis::Trajectory;
using kvis::TrajectorySample;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
};

/// Loads the config and applies the command-line overrides.
ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig cfg = kvis::load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.out) cfg.out_dir = *args.out;
  if (args.mode) cfg.mapper.wall_mode = kvis::wall_mode_from_string(*args.mode);
  return cfg;
}

std::string out_file(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

Floorplan load_plan(const ExperimentConfig& cfg) {
  Floorplan plan = kvis::load_floorplan(cfg.floorplan_path, cfg.resolution);
  for (std::size_t i = 0; i < cfg.routers.size(); ++i) {
    try {
      plan.add_router(cfg.routers[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("router " + std::to_string(i) + ": " +
                               e.what());
    }
  }
  return plan;
}

/// Trajectory with RSSI readings: from the configured file when given,
/// otherwise generated from the pattern and simulated with the config seed.
Trajectory obtain_trajectory(const ExperimentConfig& cfg,
                             const Floorplan& plan) {
  if (!cfg.trajectory_file.empty()) {
    Trajectory traj = kvis::read_trajectory_csv(cfg.trajectory_file, plan);
    if (traj.router_count != static_cast<int>(cfg.routers.size())) {
      throw std::runtime_error(
          "trajectory file carries " + std::to_string(traj.router_count) +
          " reading columns for " + std::to_string(cfg.routers.size()) +
          " configured routers");
    }
    return traj;
  }
  Trajectory traj =
      kvis::generate_trajectory(plan, cfg.trajectory_pattern, cfg.seed);
  traj.router_count = static_cast<int>(cfg.routers.size());
  std::mt19937_64 rng(cfg.seed);
  for (TrajectorySample& s : traj.samples) {
    s.rssi_dbm.assign(traj.router_count, std::nullopt);
    s.k.assign(traj.router_count, std::nullopt);
    for (int r = 0; r < traj.router_count; ++r) {
      s.rssi_dbm[r] =
          kvis::simulate_rssi(plan, plan.routers()[r], s.pose, cfg.rssi, rng);
    }
  }
  return traj;
}

kvis::RssiThresholds obtain_thresholds(const ExperimentConfig& cfg,
                                       const Trajectory& traj) {
  if (!cfg.thresholds.fit) {
    kvis::RssiThresholds th;
    th.k_max = static_cast<int>(cfg.thresholds.bounds.size());
    th.bounds = cfg.thresholds.bounds;
    kvis::validate(th);
    return th;
  }
  std::vector<double> pool;
  for (int r = 0; r < traj.router_count; ++r) {
    const std::vector<double> f =
        kvis::filtered_readings(traj, r, cfg.filter_window);
    pool.insert(pool.end(), f.begin(), f.end());
  }
  return kvis::fit_thresholds(pool, cfg.thresholds.k_max, cfg.seed);
}

int cmd_simulate(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const Floorplan plan = load_plan(cfg);
  const Trajectory traj = obtain_trajectory(cfg, plan);
  const std::string path = out_file(cfg, "trajectory.csv");
  kvis::write_trajectory_csv(traj, plan.resolution(), path);
  std::printf("wrote %s (%zu samples, %d routers)\n", path.c_str(),
              traj.samples.size(), traj.router_count);
  return 0;
}

int cmd_fit(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const Floorplan plan = load_plan(cfg);
  const std::string traj_path =
      (fs::path(cfg.out_dir) / "trajectory.csv").string();
  if (!fs::exists(traj_path)) {
    throw std::runtime_error(traj_path +
                             ": not found (run the simulate step first)");
  }
  const Trajectory traj = kvis::read_trajectory_csv(traj_path, plan);
  const kvis::RssiThresholds th = obtain_thresholds(cfg, traj);
  const std::string path = out_file(cfg, "thresholds.json");
  kvis::write_thresholds_json(th, path);
  std::printf("wrote %s (k_max %d)\n", path.c_str(), th.k_max);
  return 0;
}

int cmd_map(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const Floorplan plan = load_plan(cfg);
  const std::string traj_path =
      (fs::path(cfg.out_dir) / "trajectory.csv").string();
  const std::string th_path =
      (fs::path(cfg.out_dir) / "thresholds.json").string();
  Trajectory traj = fs::exists(traj_path)
                        ? kvis::read_trajectory_csv(traj_path, plan)
                        : obtain_trajectory(cfg, plan);
  const kvis::RssiThresholds th =
      fs::exists(th_path) ? kvis::read_thresholds_json(th_path)
                          : obtain_thresholds(cfg, traj);
  kvis::classify_trajectory(traj, th, cfg.filter_window);
  kvis::MapperConfig mapper_cfg = cfg.mapper;
  mapper_cfg.k_max = th.k_max;
  const kvis::BeliefMap map = kvis::run_mapper(
      traj, plan.routers(), th, mapper_cfg, plan.width(), plan.height());
  const std::string path = out_file(cfg, "belief.pgm");
  kvis::export_grayscale(map, path);
  std::printf("wrote %s (%dx%d)\n", path.c_str(), map.width(), map.height());
  return 0;
}

int cmd_dense(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const Floorplan plan = load_plan(cfg);
  kvis::Grid<std::uint8_t> merged(plan.width(), plan.height(),
                                  std::uint8_t{0});
  for (std::size_t r = 0; r < plan.routers().size(); ++r) {
    const kvis::KField field = kvis::k_field(plan, plan.routers()[r]);
    kvis::write_kfield_csv(
        field, out_file(cfg, "kfield_r" + std::to_string(r) + ".csv"));
    const kvis::Grid<std::uint8_t> walls = kvis::dense_inverse(field);
    for (int y = 0; y < plan.height(); ++y) {
      for (int x = 0; x < plan.width(); ++x) {
        if (walls[{x, y}]) merged[{x, y}] = 1;
      }
    }
  }
  kvis::GrayImage img;
  img.width = plan.width();
  img.height = plan.height();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::size_t i = 0;
  for (std::uint8_t w : merged.cells()) img.pixels[i++] = w ? 0 : 255;
  const std::string path = out_file(cfg, "dense.pgm");
  kvis::write_gray(img, path);
  std::printf("wrote %s and %zu k-field CSVs\n", path.c_str(),
              plan.routers().size());
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const Floorplan plan = load_plan(cfg);
  const std::string belief_path =
      (fs::path(cfg.out_dir) / "belief.pgm").string();
  if (!fs::exists(belief_path)) {
    throw std::runtime_error(belief_path +
                             ": not found (run the map step first)");
  }
  const kvis::BeliefMap map = kvis::import_belief(belief_path);
  const std::string traj_path =
      (fs::path(cfg.out_dir) / "trajectory.csv").string();
  Trajectory traj = fs::exists(traj_path)
                        ? kvis::read_trajectory_csv(traj_path, plan)
                        : obtain_trajectory(cfg, plan);
  const std::string th_path =
      (fs::path(cfg.out_dir) / "thresholds.json").string();
  const kvis::RssiThresholds th =
      fs::exists(th_path) ? kvis::read_thresholds_json(th_path)
                          : obtain_thresholds(cfg, traj);
  kvis::classify_trajectory(traj, th, cfg.filter_window);

  std::vector<kvis::KField> fields;
  for (CellIndex r : plan.routers()) fields.push_back(kvis::k_field(plan, r));
  std::vector<int> est;
  std::vector<int> gt;
  for (const TrajectorySample& s : traj.samples) {
    const std::optional<int> focused = kvis::select_focused_router(s);
    if (!focused || !s.k[*focused]) continue;
    const int truth = fields[*focused].values[s.pose];
    if (truth == kvis::KField::kWall) continue;
    est.push_back(*s.k[*focused]);
    gt.push_back(truth);
  }
  const kvis::KAccuracy acc = kvis::k_accuracy(est, gt);
  const kvis::MseScore err = kvis::mse(map, plan);
  kvis::EvalReport report;
  report.area_m2 = plan.free_area_m2();
  report.n_routers = static_cast<int>(plan.routers().size());
  report.n_points = acc.true_count + acc.false_count;
  report.k_true = acc.true_count;
  report.k_false = acc.false_count;
  report.k_accuracy_pct = acc.pct;
  report.iou = kvis::iou(map, plan);
  report.mse = err.normalized;
  report.mse_raw_px2 = err.raw_px2;

  {
    const std::string path = out_file(cfg, "report.json");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << kvis::report_to_json(report).dump(2) << "\n";
  }
  const std::string txt_path = out_file(cfg, "report.txt");
  {
    std::ofstream out(txt_path, std::ios::trunc);
    if (!out) throw std::runtime_error(txt_path + ": cannot open for writing");
    out << kvis::report_table(report);
  }
  std::cout << kvis::report_table(report);
  return 0;
}

int cmd_pipeline(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const kvis::PipelineResult res = kvis::run_pipeline(cfg);
  std::cout << kvis::report_table(res.report);
  std::printf("%zu artifacts in %s\n", res.files.size(), cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor mapping from wall-count measurements"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "experiment config JSON")
        ->required();
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--out", args.out, "override the output directory");
    sub->add_option("--mode", args.mode,
                    "wall evidence mode: gaussian-midpoint|literal-eq4")
        ->check(CLI::IsMember({"gaussian-midpoint", "literal-eq4"}));
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const CommonArgs&);
  };
  const Command commands[] = {
      {"simulate", "generate/ingest a trajectory and simulate RSSI readings",
       cmd_simulate},
      {"fit", "fit RSSI thresholds from the simulated trajectory", cmd_fit},
      {"map", "build the belief map from trajectory and thresholds", cmd_map},
      {"dense", "dense reconstruction from full k-fields", cmd_dense},
      {"eval", "score a belief map against the ground-truth plan", cmd_eval},
      {"pipeline", "run every stage end to end", cmd_pipeline},
  };
  for (const Command& c : commands) {
    add_common(app.add_subcommand(c.name, c.help));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const Command& c : commands) {
      if (app.got_subcommand(c.name)) return c.run(args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
