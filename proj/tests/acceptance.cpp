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

// Release gate: every check below must print PASS. The process exit code is
// the number of failed checks, so `ctest` treats any failure as red. Each
// check prints the measured quantity next to its target.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kvis/kvis.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using kvis::CellIndex;
using kvis::Floorplan;
using kvis::Trajectory;
using kvis::TrajectorySample;

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("%s  criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// --- 1: exhaustive raycast agreement with the supersampling oracle --------

void criterion_raycast_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(11);
  long long pairs = 0;
  long long mismatches = 0;
  const int plans = 20;
  for (int p = 0; p < plans; ++p) {
    const Floorplan plan = testutil::random_plan(rng, 64, 64);
    for (int i = 0; i < 50; ++i) {
      const CellIndex a = testutil::random_free_cell(plan, rng);
      const CellIndex b = testutil::random_free_cell(plan, rng);
      const int got = kvis::count_wall_crossings(plan, a, b);
      const std::vector<CellIndex> path =
          oracle::supersample_ray(a, b, plan.width(), plan.height());
      const int want = oracle::count_wall_runs(plan, path);
      ++pairs;
      if (got != want) ++mismatches;
    }
  }
  const double dt = seconds_since(t0);
  report(1, "raycast oracle equivalence",
         mismatches == 0 && pairs >= 1000 && dt < 10.0,
         fmt("%.0f plans, ", static_cast<double>(plans)) +
             fmt("%.0f pairs, %.0f mismatches (target 0), %.2f s (< 10)",
                 static_cast<double>(pairs), static_cast<double>(mismatches),
                 dt));
}

// --- 2: dense reconstruction never invents walls ---------------------------

void criterion_dense_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(13);
  long long false_walls = 0;
  long long true_walls = 0;
  const int plans = 20;
  for (int p = 0; p < plans; ++p) {
    const Floorplan plan = testutil::random_plan(rng, 48, 40);
    const CellIndex router = testutil::random_free_cell(plan, rng);
    const kvis::KField field = kvis::k_field(plan, router);
    const kvis::Grid<std::uint8_t> walls = kvis::dense_inverse(field);
    for (int y = 0; y < plan.height(); ++y) {
      for (int x = 0; x < plan.width(); ++x) {
        if (!walls[{x, y}]) continue;
        if (plan.is_wall({x, y})) {
          ++true_walls;
        } else {
          ++false_walls;
        }
      }
    }
  }
  const double precision =
      static_cast<double>(true_walls) /
      static_cast<double>(true_walls + false_walls);
  const double dt = seconds_since(t0);
  report(2, "dense soundness",
         false_walls == 0 && true_walls > 0 && dt < 10.0,
         fmt("%.0f plans, ", static_cast<double>(plans)) +
             fmt("precision %.6f (target 1.0), %.0f recovered walls, "
                 "%.2f s (< 10)",
                 precision, static_cast<double>(true_walls), dt));
}

// --- 3: RSSI -> k round trip, exact and under noise ------------------------

// Zig-zag sweep through all three bands of the corridor plan; every pose is
// free and the bands carry true counts 0, 1, 2 from the left-band router.
std::vector<CellIndex> band_sweep(const Floorplan& plan) {
  std::vector<CellIndex> poses;
  for (int y = 1; y < plan.height() - 1; ++y) {
    for (int x = 1; x < plan.width() - 1; ++x) {
      if (!plan.is_wall({x, y})) poses.push_back({x, y});
    }
  }
  return poses;
}

Trajectory simulate_run(const Floorplan& plan,
                        const std::vector<CellIndex>& poses,
                        const kvis::RssiModelParams& params,
                        std::uint64_t seed) {
  Trajectory traj;
  traj.router_count = static_cast<int>(plan.routers().size());
  std::mt19937_64 rng(seed);
  double t = 0.0;
  for (CellIndex p : poses) {
    TrajectorySample s;
    s.time_s = t;
    s.pose = p;
    for (CellIndex r : plan.routers()) {
      s.rssi_dbm.push_back(kvis::simulate_rssi(plan, r, p, params, rng));
    }
    s.k.assign(traj.router_count, std::nullopt);
    traj.samples.push_back(s);
    t += 1.0;
  }
  return traj;
}

double classify_accuracy(Trajectory traj, const kvis::Floorplan& plan,
                         const kvis::RssiThresholds& th, int window) {
  kvis::classify_trajectory(traj, th, window);
  const kvis::KField field = kvis::k_field(plan, plan.routers()[0]);
  std::vector<int> est;
  std::vector<int> gt;
  for (const TrajectorySample& s : traj.samples) {
    est.push_back(*s.k[0]);
    gt.push_back(field.values[s.pose]);
  }
  return kvis::k_accuracy(est, gt).pct;
}

// Measured once on the pinned seed, then locked as a regression value.
const double kPinnedNoisyAccuracyPct = 99.50396825396825;

void criterion_rssi_round_trip() {
  Floorplan plan = testutil::three_band_plan();
  plan.add_router({10, 10});
  const std::vector<CellIndex> poses = band_sweep(plan);

  kvis::RssiModelParams params;  // noiseless
  const Trajectory clean = simulate_run(plan, poses, params, 17);
  std::vector<double> readings;
  for (const TrajectorySample& s : clean.samples) {
    readings.push_back(*s.rssi_dbm[0]);
  }
  const kvis::RssiThresholds th = kvis::fit_thresholds(readings, 2, 17);
  const double clean_pct = classify_accuracy(clean, plan, th, 1);

  params.noise_sigma_db = 2.0;
  const Trajectory noisy = simulate_run(plan, poses, params, 17);
  std::vector<double> noisy_readings;
  for (const TrajectorySample& s : noisy.samples) {
    noisy_readings.push_back(*s.rssi_dbm[0]);
  }
  const std::vector<double> filtered = kvis::sliding_filter(noisy_readings, 5);
  const kvis::RssiThresholds noisy_th = kvis::fit_thresholds(filtered, 2, 17);
  const double noisy_pct = classify_accuracy(noisy, plan, noisy_th, 5);

  const bool pinned_ok = kPinnedNoisyAccuracyPct < 0.0
                             ? true
                             : std::abs(noisy_pct - kPinnedNoisyAccuracyPct) <
                                   1e-9;
  report(3, "rssi round trip",
         clean_pct == 100.0 && noisy_pct >= 90.0 && pinned_ok,
         fmt("noiseless %.2f%% (target 100), noisy %.2f%% (target >= 90, "
             "pinned %.2f)",
             clean_pct, noisy_pct, kPinnedNoisyAccuracyPct));
}

// --- 4: scaled two-room analogue of the published accuracy table -----------

struct SceneRun {
  double accuracy_pct = 0.0;
  int n_points = 0;
};

SceneRun run_two_room(const std::vector<CellIndex>& routers,
                      const kvis::RssiModelParams& params,
                      std::uint64_t seed) {
  Floorplan plan = testutil::two_room_plan();
  for (CellIndex r : routers) plan.add_router(r);
  Trajectory traj = kvis::generate_trajectory(plan, "rooms", seed);
  std::mt19937_64 rng(seed);
  traj.router_count = static_cast<int>(routers.size());
  for (TrajectorySample& s : traj.samples) {
    s.rssi_dbm.assign(traj.router_count, std::nullopt);
    s.k.assign(traj.router_count, std::nullopt);
    for (int r = 0; r < traj.router_count; ++r) {
      s.rssi_dbm[r] =
          kvis::simulate_rssi(plan, routers[r], s.pose, params, rng);
    }
  }
  std::vector<double> pool;
  for (int r = 0; r < traj.router_count; ++r) {
    const std::vector<double> f = kvis::filtered_readings(traj, r, 5);
    pool.insert(pool.end(), f.begin(), f.end());
  }
  const kvis::RssiThresholds th = kvis::fit_thresholds(pool, 1, seed);
  kvis::classify_trajectory(traj, th, 5);

  std::vector<kvis::KField> fields;
  for (CellIndex r : routers) fields.push_back(kvis::k_field(plan, r));
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
  return {acc.pct, acc.true_count + acc.false_count};
}

void criterion_two_room_analogue() {
  const auto t0 = std::chrono::steady_clock::now();
  kvis::RssiModelParams params;
  params.noise_sigma_db = 3.0;
  const SceneRun single = run_two_room({{50, 40}}, params, 23);
  const SceneRun dual = run_two_room({{50, 40}, {150, 40}}, params, 23);
  const double dt = seconds_since(t0);
  report(4, "two-room scaled analogue",
         single.accuracy_pct >= 82.0 &&
             dual.accuracy_pct > single.accuracy_pct && dt < 60.0,
         fmt("single-router %.2f%% (target >= 82) on ", single.accuracy_pct) +
             fmt("%.0f points, two-router %.2f%% (must exceed single), ",
                 static_cast<double>(single.n_points), dual.accuracy_pct) +
             fmt("%.1f s (< 60)", dt));
}

// --- 5: metric arithmetic fixtures -----------------------------------------

void criterion_metric_fixtures() {
  bool ok = true;
  std::string detail;

  const struct {
    int t;
    int n;
    double pct;
  } rows[] = {{2683, 3159, 84.93},
              {3902, 4713, 82.79},
              {5120, 6001, 85.32},
              {471, 492, 95.73},
              {379, 393, 96.44}};
  for (const auto& row : rows) {
    std::vector<int> est(row.n, 0);
    std::vector<int> gt(row.n, 0);
    for (int i = 0; i < row.n - row.t; ++i) gt[i] = 1;
    const double pct = kvis::k_accuracy(est, gt).pct;
    if (std::round(pct * 100.0) / 100.0 != row.pct) {
      ok = false;
      detail += fmt("%.0f/", static_cast<double>(row.t)) +
                fmt("%.0f -> %.4f != ", static_cast<double>(row.n), pct) +
                fmt("%.2f; ", row.pct);
    }
  }

  // Identity fixtures.
  const Floorplan plan = testutil::column_plan();
  kvis::BeliefMap exact(plan.width(), plan.height());
  for (int y = 0; y < plan.height(); ++y) {
    for (int x = 0; x < plan.width(); ++x) {
      exact.set({x, y}, plan.is_wall({x, y}) ? 0.0 : 1.0, 1.0);
    }
  }
  if (kvis::iou(exact, plan) != 1.0) {
    ok = false;
    detail += "identity iou != 1; ";
  }
  if (kvis::mse(exact, plan).raw_px2 != 0.0) {
    ok = false;
    detail += "identity mse != 0; ";
  }

  // Hand-enumerated small grids.
  Floorplan tiny(5, 1, 0.05);
  tiny.set_wall({0, 0}, true);
  kvis::BeliefMap est(5, 1);
  est.set({0, 0}, 1.0, 1.0);
  est.set({1, 0}, 1.0, 1.0);
  est.set({2, 0}, 0.0, 1.0);
  if (kvis::iou(est, tiny) != 1.0 / 3.0) {
    ok = false;
    detail += "masked iou != 1/3; ";
  }
  Floorplan strip(255, 1, 0.05);
  kvis::BeliefMap one_off(255, 1);
  for (int x = 0; x < 255; ++x) one_off.set({x, 0}, 1.0, 1.0);
  one_off.set({0, 0}, 0.0, 1.0);
  if (kvis::mse(one_off, strip).raw_px2 != 255.0) {
    ok = false;
    detail += "single-cell mse != 255 px^2; ";
  }

  if (ok) detail = "5 accuracy identities + iou/mse identity and hand cases";
  report(5, "metric fixtures", ok, detail);
}

// --- 6: fusion algebra over random operands --------------------------------

void criterion_fusion_algebra() {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> mu_d(0.0, 1.0);
  std::uniform_real_distribution<double> sigma_d(0.01, 2.0);
  int commut_fail = 0;
  int assoc_fail = 0;
  int monotone_fail = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const double m[3] = {mu_d(rng), mu_d(rng), mu_d(rng)};
    const double s[3] = {sigma_d(rng), sigma_d(rng), sigma_d(rng)};
    const auto ab = kvis::fuse(m[0], s[0], m[1], s[1]);
    const auto ba = kvis::fuse(m[1], s[1], m[0], s[0]);
    if (ab.first != ba.first || ab.second != ba.second) ++commut_fail;

    const auto ab_c = kvis::fuse(ab.first, ab.second, m[2], s[2]);
    const auto bc = kvis::fuse(m[1], s[1], m[2], s[2]);
    const auto a_bc = kvis::fuse(m[0], s[0], bc.first, bc.second);
    const double mu_tol = 1e-9 * std::max(1.0, std::abs(a_bc.first));
    if (std::abs(ab_c.first - a_bc.first) > mu_tol ||
        std::abs(ab_c.second - a_bc.second) > 1e-9 * a_bc.second) {
      ++assoc_fail;
    }

    // Repeated fusion of the same evidence: sigma never increases.
    double mu = m[0];
    double sigma = s[0];
    for (int rep = 0; rep < 5; ++rep) {
      const auto next = kvis::fuse(mu, sigma, m[1], s[1]);
      if (next.second > sigma) ++monotone_fail;
      mu = next.first;
      sigma = next.second;
    }
  }
  report(6, "fusion algebra",
         commut_fail == 0 && assoc_fail == 0 && monotone_fail == 0,
         fmt("%.0f triples: ", static_cast<double>(trials)) +
             fmt("%.0f commutativity, %.0f associativity, %.0f monotonicity "
                 "violations (target 0 each)",
                 static_cast<double>(commut_fail),
                 static_cast<double>(assoc_fail),
                 static_cast<double>(monotone_fail)));
}

// --- 7: free rays never cross ground-truth walls ---------------------------

void criterion_rule2_soundness() {
  // Compact two-room scene at 0.01 m/cell keeps every distance below the
  // reference distance, so the noiseless classification is exact and every
  // k=0 ray is geometrically wall-free.
  Floorplan plan = testutil::bordered_plan(100, 40, 0.01);
  for (int y = 1; y < 39; ++y) {
    if (y < 17 || y > 22) plan.set_wall({50, y}, true);
  }
  plan.add_router({25, 20});
  Trajectory traj = kvis::generate_trajectory(plan, "rooms", 31);
  std::mt19937_64 rng(31);
  const kvis::RssiModelParams params;  // noiseless
  traj.router_count = 1;
  for (TrajectorySample& s : traj.samples) {
    s.rssi_dbm = {kvis::simulate_rssi(plan, {25, 20}, s.pose, params, rng)};
    s.k = {std::nullopt};
  }
  std::vector<double> readings;
  for (const TrajectorySample& s : traj.samples) {
    readings.push_back(*s.rssi_dbm[0]);
  }
  const kvis::RssiThresholds th = kvis::fit_thresholds(readings, 1, 31);
  kvis::classify_trajectory(traj, th, 1);

  long long rays = 0;
  long long wall_hits = 0;
  for (const TrajectorySample& s : traj.samples) {
    if (!s.k[0] || *s.k[0] != 0) continue;
    ++rays;
    const kvis::RayPath ray =
        kvis::traverse({25, 20}, s.pose, plan.width(), plan.height());
    for (CellIndex c : ray.cells) {
      if (plan.is_wall(c)) ++wall_hits;
    }
  }
  report(7, "free-ray soundness", rays > 0 && wall_hits == 0,
         fmt("%.0f k=0 rays, %.0f ground-truth wall cells on them (target 0)",
             static_cast<double>(rays), static_cast<double>(wall_hits)));
}

// --- 8: byte-identical artifacts on re-run ----------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism() {
  const fs::path tmp =
      fs::temp_directory_path() / "kvis_acceptance_determinism";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  Floorplan plan = testutil::bordered_plan(41, 41, 0.01);
  kvis::save_floorplan(plan, (tmp / "room.pgm").string());

  kvis::ExperimentConfig cfg;
  cfg.floorplan_path = (tmp / "room.pgm").string();
  cfg.resolution = 0.01;
  cfg.routers = {{20, 20}};
  cfg.rssi.noise_sigma_db = 2.0;
  cfg.thresholds.fit = false;
  cfg.thresholds.bounds = {-44.0};
  cfg.filter_window = 5;
  cfg.seed = 37;

  bool identical = true;
  std::size_t files = 0;
  cfg.out_dir = (tmp / "a").string();
  const kvis::PipelineResult first = kvis::run_pipeline(cfg);
  cfg.out_dir = (tmp / "b").string();
  const kvis::PipelineResult second = kvis::run_pipeline(cfg);
  files = first.files.size();
  if (first.files.size() != second.files.size()) {
    identical = false;
  } else {
    for (std::size_t i = 0; i < first.files.size(); ++i) {
      if (slurp(first.files[i]) != slurp(second.files[i])) identical = false;
    }
  }
  fs::remove_all(tmp, ec);
  report(8, "pipeline determinism", identical && files == 6,
         fmt("%.0f artifacts compared byte-for-byte across two seeded runs",
             static_cast<double>(files)));
}

}  // namespace

int main() {
  criterion_raycast_oracle();
  criterion_dense_soundness();
  criterion_rssi_round_trip();
  criterion_two_room_analogue();
  criterion_metric_fixtures();
  criterion_fusion_algebra();
  criterion_rule2_soundness();
  criterion_determinism();
  if (g_failures == 0) {
    std::printf("all 8 acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  }
  return g_failures;
}
