// Copyright 2026 The QPF Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qpf {

/// Caller violated a precondition (dimension mismatch, non-Hermitian input,
/// out-of-range argument). Maps to CLI exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration document failed validation. `key_path()` names the offending
/// key, e.g. "grid.N0".
class ConfigError : public UsageError {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : UsageError(key_path + ": " + message), key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// A filter step could not be completed (trace collapse, singular metric).
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& message, double t)
      : std::runtime_error(message + " at t=" + std::to_string(t)), time_(t) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Fisher metric condition number exceeded the solver guard.
class NearSingularMetric : public std::runtime_error {
 public:
  explicit NearSingularMetric(double condition)
      : std::runtime_error("Fisher metric is near singular (condition " +
                           std::to_string(condition) + ")"),
        condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// No Lyapunov certificate exists for the requested margin (Delta0 <= eps).
class InfeasibleCertificate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qpf
