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

// Command-line front end:
//   aggmia world|release|attack|diagnose --config FILE [--seed N]
//          [--out-dir DIR] [--workers N]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "harness.h"

int main(int argc, char** argv) {
  CLI::App app{"Membership inference on aggregate location data"};
  app.require_subcommand(1);

  aggmia::tools::CommandOptions options;
  uint64_t seed = 0;
  std::string out_dir;
  int workers = 1;
  for (const char* name : {"world", "release", "attack", "diagnose"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "Experiment config file")
        ->required();
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out-dir", out_dir, "Output directory (overrides the config)");
    sub->add_option("--workers", workers, "Worker threads (overrides the config)")
        ->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(aggmia::tools::ExitCode::kConfig);
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) options.seed = seed;
  if (sub->count("--out-dir")) options.out_dir = out_dir;
  if (sub->count("--workers")) options.workers = workers;

  const aggmia::tools::CommandOutcome outcome =
      aggmia::tools::RunCommand(sub->get_name(), options, std::cerr);
  if (outcome.code != aggmia::tools::ExitCode::kOk) {
    std::cerr << "error: " << outcome.message << "\n";
  }
  return static_cast<int>(outcome.code);
}
