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

#ifndef ROLLGRASP_SCENARIO_HPP_
#define ROLLGRASP_SCENARIO_HPP_

#include <string>
#include <vector>

#include "rollgrasp/simulator.hpp"

namespace rollgrasp {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Loads a scenario document (JSON). Unknown keys are rejected; syntax
// errors carry line numbers. Overrides are dotted paths into the document
// ("sim.dt=5e-4", "control.gains.kp=2.0") applied before parsing.
Scenario load_scenario_file(const std::string& path,
                            const std::vector<std::string>& overrides = {});
Scenario parse_scenario_text(const std::string& text,
                             const std::vector<std::string>& overrides = {});

// Delimited-text trajectory table: one row per recorded step, header row
// naming every column, full-precision scientific notation. Column order:
// t, object pose (quaternion wxyz + position), then per finger anchor
// pose 7, fingertip pose 7, contact point 3, normal force, tangential
// force, then residual and sigma_min.
void write_trajectory_csv(const TrajectoryRecord& record,
                          const std::string& path);
std::string trajectory_csv(const TrajectoryRecord& record);

// Events sidecar and run summary, structured text (JSON).
void write_events_json(const TrajectoryRecord& record,
                       const std::string& path);
std::string events_json(const TrajectoryRecord& record);
void write_summary_json(const TrajectoryRecord& record,
                        const RefinementStudy* study,
                        const std::string& path);
std::string summary_json(const TrajectoryRecord& record,
                         const RefinementStudy* study);

}  // namespace rollgrasp

#endif  // ROLLGRASP_SCENARIO_HPP_
