// Copyright 2026 The alphavb Authors
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
#ifndef ALPHAVB_EXPERIMENT_HPP
#define ALPHAVB_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphavb/synth.hpp"

namespace alphavb {

/// Library version recorded in every manifest.
std::string library_version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Batch experiment description. Built from a JSON document:
///
///   {"command": "fit", "model": "gmm", "alpha": 0.95, "seed": 7,
///    "kind": "gmm_s22", "data": "<bundle dir>", "params": {...},
///    "solver": {...}, "options": {...}, "out": "<dir>"}
///
/// Unknown keys and out-of-range values are rejected with InvalidArgument.
struct ExperimentConfig
{
  std::string command;
  std::string model;
  std::optional<DatasetKind> kind;
  std::vector<double> alphas;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> data;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json solver = nlohmann::json::object();
  nlohmann::json options = nlohmann::json::object();
  std::filesystem::path out = "out";
  bool strict = false;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  /// Canonical form; excludes `out` so relocated reruns hash equally.
  nlohmann::json canonical() const;
  std::uint64_t hash() const;
};

struct RunResult
{
  int exit_code = 0;
  std::vector<std::string> diagnostics;
  std::vector<std::filesystem::path> files;
};

/// Runs one command and writes its artifacts plus manifest.json into
/// config.out. Throws InvalidArgument for bad configs and IoError for
/// filesystem failures. With strict set, a flagged run returns exit code 1.
RunResult execute(const ExperimentConfig& config);

/// Checks a state.json document written by `fit`; throws InvalidArgument
/// naming the first violation.
void validate_state_json(const nlohmann::json& state);

} // namespace alphavb

#endif
