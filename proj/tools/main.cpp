// Copyright 2025 The rollgrasp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "rollgrasp/scenario.hpp"
#include "rollgrasp/verify.hpp"

namespace fs = std::filesystem;
using namespace rollgrasp;

namespace {

// Exit codes:
//   0 clean completion      4 singular-system termination
//   1 verification failure  5 contact break
//   2 scenario parse error  6 infeasible constraint set / QP
//   3 seeding failure       7 friction violation
//                           8 invalid state (flexure limit, validity)
constexpr int kExitParse = 2;
constexpr int kExitSeeding = 3;

std::string default_out_dir() {
  if (const char* env = std::getenv("ROLLGRASP_OUT_DIR")) return env;
  return "out";
}

int run_one(const std::string& path, const std::string& out_dir,
            const std::vector<std::string>& overrides, bool refine,
            std::ostream& log) {
  Scenario scenario;
  try {
    scenario = load_scenario_file(path, overrides);
  } catch (const ParseError& err) {
    log << "parse error: " << err.what() << "\n";
    return kExitParse;
  }

  TrajectoryRecord record;
  try {
    record = run_scenario(scenario);
  } catch (const SeedingError& err) {
    log << "seeding failure: " << err.what() << "\n";
    return kExitSeeding;
  }

  RefinementStudy study;
  const RefinementStudy* study_ptr = nullptr;
  if (refine) {
    study = run_refinement_study(scenario);
    study_ptr = &study;
  }

  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir);
  write_trajectory_csv(record, (base / "trajectory.csv").string());
  write_events_json(record, (base / "events.json").string());
  write_summary_json(record, study_ptr, (base / "summary.json").string());

  const RunSummary& s = record.summary;
  log << scenario.name << ": " << (s.completed ? "completed" : "terminated")
      << " at t=" << s.final_time << " s"
      << ", rotation=" << s.rotation_angle * 180.0 / M_PI << " deg"
      << ", center displacement=" << s.center_displacement << " m"
      << ", max residual=" << s.max_equilibrium_residual
      << (s.valid ? "" : " [INVALID: " + s.invalid_reason + "]") << "\n";
  for (const SimEvent& e : record.events) {
    log << "  event t=" << e.time << " " << to_string(e.kind)
        << (e.finger >= 0 ? " finger " + std::to_string(e.finger) : "")
        << ": " << e.detail << "\n";
  }
  if (s.exit_code == 0 && !s.valid) return 8;
  return s.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasistatic compliant in-hand rolling manipulation"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = default_out_dir();
  std::vector<std::string> overrides;
  bool refine = false;
  CLI::App* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("scenario", scenario_path, "scenario file (JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--set", overrides,
                  "override a scenario value, e.g. --set sim.dt=5e-4");
  run->add_flag("--refine", refine,
                "also run the dt/2 and dt/4 refinement study");

  std::string suite = "all";
  std::string verify_json;
  CLI::App* verify = app.add_subcommand(
      "verify", "run the numerical verification suites");
  verify->add_option("suite", suite,
                     "all | lie | geometry | mechanics | control");
  verify->add_option("--json", verify_json, "also write a JSON report");

  std::string batch_dir;
  int jobs = 1;
  std::string batch_out = default_out_dir();
  CLI::App* batch =
      app.add_subcommand("batch", "run every scenario in a directory");
  batch->add_option("dir", batch_dir, "directory of scenario files")
      ->required();
  batch->add_option("--jobs", jobs, "parallel workers");
  batch->add_option("--out", batch_out, "output directory root");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return run_one(scenario_path, out_dir, overrides, refine, std::cout);
  }

  if (verify->parsed()) {
    std::vector<VerifyReport> reports;
    try {
      reports = verify_suites(suite);
    } catch (const std::invalid_argument& err) {
      std::cerr << err.what() << "\n";
      return kExitParse;
    }
    std::cout << verify_report_text(reports);
    if (!verify_json.empty()) {
      std::ofstream out(verify_json);
      out << verify_report_json(reports);
    }
    for (const VerifyReport& r : reports) {
      if (!r.all_passed()) return 1;
    }
    return 0;
  }

  if (batch->parsed()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(batch_dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      std::cerr << "no scenario files in " << batch_dir << "\n";
      return kExitParse;
    }
    std::atomic<size_t> next{0};
    std::atomic<int> worst{0};
    std::mutex log_mutex;
    const int workers = std::max(1, std::min<int>(jobs, files.size()));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (size_t i = next++; i < files.size(); i = next++) {
          std::ostringstream log;
          const std::string name = files[i].stem().string();
          const int code = run_one(files[i].string(),
                                   (fs::path(batch_out) / name).string(), {},
                                   false, log);
          std::lock_guard<std::mutex> lock(log_mutex);
          std::cout << log.str();
          int expected = worst.load();
          while (code > expected &&
                 !worst.compare_exchange_weak(expected, code)) {
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    return worst.load();
  }
  return 0;
}
