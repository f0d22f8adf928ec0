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
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "alphavb/errors.hpp"
#include "alphavb/experiment.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitIo = 3;

struct Flags
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<double> alpha;
  std::string out;
  std::string kind;
  std::string model;
  std::string data;
  bool strict = false;
};

nlohmann::json load_config(const std::string& path)
{
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw alphavb::IoError("cannot open config " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw alphavb::InvalidArgument("config " + path + ": " + e.what());
  }
}

nlohmann::json merge(nlohmann::json doc, const std::string& command, const Flags& f)
{
  if (!doc.is_object()) throw alphavb::InvalidArgument("config: top level must be an object");
  if (doc.contains("command") && doc["command"] != command)
    throw alphavb::InvalidArgument("config: command in file does not match '" + command + "'");
  doc["command"] = command;
  if (f.seed) doc["seed"] = *f.seed;
  if (f.alpha.size() == 1) doc["alpha"] = f.alpha[0];
  if (f.alpha.size() > 1) doc["alpha"] = f.alpha;
  if (!f.out.empty()) doc["out"] = f.out;
  if (!f.kind.empty()) doc["kind"] = f.kind;
  if (!f.model.empty()) doc["model"] = f.model;
  if (!f.data.empty()) doc["data"] = f.data;
  return doc;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"alpha-VB experiments: data generation, fitting, risk checks"};
  app.require_subcommand(1);
  Flags flags;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"generate", "write a synthetic dataset bundle"},
      {"fit", "fit one model at one alpha"},
      {"sweep-alpha", "fit one model over a list of alphas"},
      {"rate-experiment", "risk curve over an n-grid with a log-log slope"},
      {"verify-bounds", "replicated checks of the variational risk bounds"},
      {"report", "tables from a fitted state"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON experiment config");
    sub->add_option("--seed", flags.seed, "root seed");
    sub->add_option("--alpha", flags.alpha, "alpha or comma-separated list")->delimiter(',');
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--kind", flags.kind, "dataset kind: linreg_s21, gmm_s22, lda_synth, tiny_discrete");
    sub->add_option("--model", flags.model, "model: gmm, hdr, blm, lda");
    sub->add_option("--data", flags.data, "dataset bundle directory (or fit directory for report)");
    sub->add_flag("--strict", flags.strict, "exit 1 when a run is flagged");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    alphavb::ExperimentConfig cfg =
        alphavb::ExperimentConfig::from_json(merge(load_config(flags.config), command, flags));
    cfg.strict = flags.strict;
    const alphavb::RunResult res = alphavb::execute(cfg);
    for (const auto& d : res.diagnostics) std::cerr << "alphavb: " << d << '\n';
    for (const auto& f : res.files) std::cout << f.string() << '\n';
    return res.exit_code;
  } catch (const alphavb::IoError& e) {
    std::cerr << "alphavb: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const alphavb::InvalidArgument& e) {
    std::cerr << "alphavb: bad config: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const alphavb::DimensionMismatch& e) {
    std::cerr << "alphavb: bad config: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "alphavb: " << e.what() << '\n';
    return kExitFailure;
  }
}
