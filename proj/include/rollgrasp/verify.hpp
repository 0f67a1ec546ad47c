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

#ifndef ROLLGRASP_VERIFY_HPP_
#define ROLLGRASP_VERIFY_HPP_

#include <string>
#include <vector>

#include "rollgrasp/simulator.hpp"

namespace rollgrasp {

// One numerical check of the verification suite: an independent oracle
// (finite differences, enumeration, dual algebraic routes) evaluated at a
// pinned tolerance.
struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

VerifyReport verify_lie();
VerifyReport verify_geometry();
VerifyReport verify_mechanics();
VerifyReport verify_control();
std::vector<VerifyReport> verify_suites(const std::string& which);  // "all"...

// Deterministic random valid grasp states: n sphere fingertips around a
// cylinder, settled and gravity-ramped so the tangential preloads make
// the stacked system generically nonsingular (required for n = 2).
struct RandomGraspCase {
  std::vector<FingerModel> hand;
  GraspState state;
};
RandomGraspCase make_random_grasp_case(unsigned seed, int finger_count);

std::string verify_report_text(const std::vector<VerifyReport>& reports);
std::string verify_report_json(const std::vector<VerifyReport>& reports);

}  // namespace rollgrasp

#endif  // ROLLGRASP_VERIFY_HPP_
