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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "alphavb/errors.hpp"
#include "alphavb/experiment.hpp"

using namespace alphavb;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("FNV-1a reference values")
{
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config parsing and defaults")
{
  const auto c = ExperimentConfig::from_json(json{{"command", "fit"}, {"kind", "gmm_s22"}, {"seed", 4}});
  CHECK(c.model == "gmm");
  CHECK(c.alphas == std::vector<double>{1.0});
  CHECK(c.seed == 4);
  const auto s = ExperimentConfig::from_json(json{{"command", "sweep-alpha"}, {"model", "hdr"}});
  CHECK(s.alphas == std::vector<double>{0.5, 0.7, 0.95, 1.0});
  const auto v = ExperimentConfig::from_json(json{{"command", "verify-bounds"}});
  CHECK(v.alphas == std::vector<double>{0.5});
}

TEST_CASE("config validation errors")
{
  auto bad = [](const json& j) { CHECK_THROWS_AS(ExperimentConfig::from_json(j), InvalidArgument); };
  bad(json{{"command", "launch"}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"colour", 1}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"alpha", 0.0}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"alpha", 1.5}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"seed", -1}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"kind", "lda_synth"}});
  bad(json{{"command", "fit"}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"solver", {{"gmm_update_rule", "fast"}}}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"solver", {{"momentum", 0.9}}}});
  bad(json{{"command", "generate"}, {"kind", "gmm_s22"}, {"params", {{"beta_head", json::array()}}}});
  bad(json{{"command", "fit"}, {"model", "gmm"}, {"options", {{"top", 3}}}});
}

TEST_CASE("hash ignores the output directory")
{
  json j{{"command", "generate"}, {"kind", "tiny_discrete"}, {"seed", 1}, {"out", "a"}};
  const auto a = ExperimentConfig::from_json(j);
  j["out"] = "b";
  const auto b = ExperimentConfig::from_json(j);
  CHECK(a.hash() == b.hash());
  j["seed"] = 2;
  CHECK(ExperimentConfig::from_json(j).hash() != a.hash());
  CHECK_FALSE(a.canonical().contains("out"));
}

TEST_CASE("state document validation")
{
  json good{{"schema", "alphavb.state/1"}, {"model", "hdr"},    {"alpha", 0.9},
            {"seed", 1},                   {"converged", true}, {"sweeps", 3},
            {"final_elbo", -10.0},         {"metrics", json::object()},
            {"state", {{"mu", {1.0, 0.0}}, {"sigma_sq", {0.5, 0.5}}, {"phi", {1.0, 0.1}}, {"nu1", 1.0}}}};
  CHECK_NOTHROW(validate_state_json(good));
  auto broken = [&](auto edit) {
    json j = good;
    edit(j);
    CHECK_THROWS_AS(validate_state_json(j), InvalidArgument);
  };
  broken([](json& j) { j["schema"] = "other"; });
  broken([](json& j) { j.erase("metrics"); });
  broken([](json& j) { j["alpha"] = 0.0; });
  broken([](json& j) { j["state"]["phi"][0] = 1.5; });
  broken([](json& j) { j["state"]["sigma_sq"] = {0.5}; });
  broken([](json& j) { j["model"] = "svm"; });
}

TEST_CASE("execute writes artifacts and a manifest, deterministically")
{
  const fs::path root = fs::temp_directory_path() / "alphavb_test_experiment";
  fs::remove_all(root);
  auto run = [&](const std::string& sub) {
    const auto cfg = ExperimentConfig::from_json(json{{"command", "generate"},
                                                      {"kind", "gmm_s22"},
                                                      {"seed", 11},
                                                      {"params", {{"n", 50}}},
                                                      {"out", (root / sub).string()}});
    return execute(cfg);
  };
  const RunResult a = run("a");
  const RunResult b = run("b");
  CHECK(a.exit_code == 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  for (const char* name : {"data.csv", "truth.json", "manifest.json"})
    CHECK(slurp(root / "a" / name) == slurp(root / "b" / name));
  const json manifest = json::parse(slurp(root / "a" / "manifest.json"));
  CHECK(manifest["command"] == "generate");
  CHECK(manifest["seed"] == 11);
  CHECK(manifest.contains("config_hash"));

  // A fit on the generated data produces a valid state document.
  const auto fit = ExperimentConfig::from_json(json{{"command", "fit"},
                                                    {"model", "gmm"},
                                                    {"data", (root / "a").string()},
                                                    {"out", (root / "fit").string()}});
  CHECK(execute(fit).exit_code == 0);
  CHECK_NOTHROW(validate_state_json(json::parse(slurp(root / "fit" / "state.json"))));

  const auto missing = ExperimentConfig::from_json(json{{"command", "fit"},
                                                        {"model", "gmm"},
                                                        {"data", (root / "none").string()},
                                                        {"out", (root / "x").string()}});
  CHECK_THROWS_AS(execute(missing), IoError);
  fs::remove_all(root);
}
