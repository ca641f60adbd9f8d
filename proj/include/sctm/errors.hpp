// Copyright 2026 The sctm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SCTM_ERRORS_HPP
#define SCTM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sctm {

/// Raised for malformed or inconsistent model/scenario input.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_{line} {}

  /// 1-based source line, or 0 when unknown.
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Raised when a numerical routine cannot produce a trustworthy result
/// (factorization failure, LP non-convergence, invariant violation).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Emits a warning line; the default sink is std::clog.
void warn(const std::string& message);

/// Replaces the warning sink (nullptr restores the default).
void set_warning_sink(void (*sink)(const std::string&));

}  // namespace sctm

#endif  // SCTM_ERRORS_HPP
