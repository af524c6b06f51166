//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPAUDIT_ERRORS_H_
#define DPAUDIT_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpaudit {

// Training produced a non-finite loss or parameter vector. `iteration` is the
// DP-SGD iteration at which divergence was detected, or -1 when it happened
// outside the iteration loop (e.g. during pre-training).
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& message, int64_t iteration = -1)
      : std::runtime_error(message), iteration_(iteration) {}
  int64_t iteration() const { return iteration_; }

 private:
  int64_t iteration_;
};

// The requested privacy budget has no solution inside the supported search
// bracket (epsilon above the audit scale, or no noise multiplier reaches it).
class BudgetOutOfRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (IDX, CSV, report). The message names the file and the
// offset or line where parsing failed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid campaign configuration. Carries every violation found so a user can
// fix them all in one pass.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::runtime_error(Join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string Join(const std::vector<std::string>& violations) {
    std::string out = "invalid configuration:";
    for (const std::string& v : violations) {
      out += "\n  - " + v;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace dpaudit

#endif  // DPAUDIT_ERRORS_H_
