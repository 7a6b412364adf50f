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

#include <cstdint>
#include <string>
#include <vector>

namespace qpf {

struct InvariantResult {
  std::string name;
  bool passed = false;
  /// Worst observed deviation, or a failure message.
  std::string detail;
};

/// Randomized property checks of the library, driven by `seed`. Used by the
/// `qpf check` command as a quick self-test of a build.
std::vector<InvariantResult> run_invariant_suite(std::uint64_t seed = 2024);

}  // namespace qpf
