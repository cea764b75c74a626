// Copyright 2026 The aggmia Authors
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

#ifndef AGGMIA_TOOLS_HARNESS_H_
#define AGGMIA_TOOLS_HARNESS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "aggmia/mobility.h"
#include "config.h"

namespace aggmia::tools {

enum class ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kRuntime = 4 };

struct CommandOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
};

struct CommandOutcome {
  ExitCode code = ExitCode::kOk;
  std::string message;
};

// Runs `world`, `release`, `attack` or `diagnose`. Every successful run
// writes <out_dir>/manifest.txt: the resolved config (itself a valid config
// file, so `--config manifest.txt` reruns the command) followed by FNV-1a-64
// hashes of the artifacts written.
CommandOutcome RunCommand(std::string_view command, const CommandOptions& options,
                          std::ostream& log);

uint64_t Fnv1a64(std::string_view bytes);

// Reads the config file and applies command-line overrides.
absl::StatusOr<ExperimentConfig> LoadConfig(const CommandOptions& options);

// The world a config describes: synthesized, or loaded from files.
absl::StatusOr<Population> LoadPopulation(const ExperimentConfig& config,
                                          std::ostream& log);

}  // namespace aggmia::tools

#endif  // AGGMIA_TOOLS_HARNESS_H_
