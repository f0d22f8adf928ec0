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
#ifndef ALPHAVB_SYNTH_HPP
#define ALPHAVB_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "alphavb/gmm.hpp"
#include "alphavb/lda.hpp"
#include "alphavb/linreg.hpp"
#include "alphavb/tiny_model.hpp"

namespace alphavb {

enum class DatasetKind { LinregS21, GmmS22, LdaSynth, TinyDiscrete };

DatasetKind parse_dataset_kind(const std::string& name);
std::string to_string(DatasetKind kind);

/// Sparse regression design; defaults give n = 100, d = 500, X_ij ~ N(0, 1.5^2),
/// beta* = (5, -4, -3, 2, 0, ..., 0), sigma = 1.
struct LinregParams
{
  int n = 100;
  int d = 500;
  double sigma = 1.0;
  double x_sd = 1.5;
  std::vector<double> beta_head{5.0, -4.0, -3.0, 2.0};
};

struct LinregDataset
{
  RegressionData data;
  Eigen::VectorXd beta;
};

/// Defaults: n = 1000, d = 2, K = 3, equal weights, mu_k ~ N(0, 50 I),
/// prior mu0 = 0, sigma0^2 = 50.
struct GmmParams
{
  int n = 1000;
  int d = 2;
  int k = 3;
  double mean_variance = 50.0;
  double sigma0_sq = 50.0;
};

struct GmmDataset
{
  Eigen::MatrixXd y;     // n x d
  Eigen::MatrixXd means; // K x d
  std::vector<int> labels;
  GmmPrior prior;
};

/// Topics with disjoint supports of `support` words each (seeded placement),
/// within-support weights from Gamma(5), each document mixing at most
/// `max_active` topics with Dirichlet(1) proportions.
struct LdaSynthParams
{
  int k = 3;
  int v = 50;
  int docs = 40;
  int words_per_doc = 100;
  int support = 10;
  int max_active = 2;
};

struct LdaDataset
{
  LdaCorpus corpus;
  Eigen::MatrixXd topics;     // K x V, rows on the simplex
  Eigen::MatrixXd doc_topics; // D x K, rows on the simplex
};

/// Two-point grid, K = 2, Bernoulli emissions; truth is the first grid point.
struct TinyParams
{
  int n = 5;
  std::vector<std::vector<double>> means{{0.2, 0.9}, {0.6, 0.95}};
  std::vector<std::vector<double>> mixings{{0.6, 0.4}, {0.3, 0.7}};
  std::vector<double> prior{0.5, 0.5};
  int truth_index = 0;

  TinyDiscreteModel model() const;
};

struct TinyDataset
{
  TinyDiscreteModel model;
  std::vector<int> y;
};

LinregDataset generate_linreg(const LinregParams& p, std::uint64_t seed);
GmmDataset generate_gmm(const GmmParams& p, std::uint64_t seed);

/// n fresh observations from a known mixture with identity covariances.
Eigen::MatrixXd sample_gmm(const Eigen::MatrixXd& means, const DiscreteDistribution& pi, int n,
                           CounterRng& rng);
LdaDataset generate_lda(const LdaSynthParams& p, std::uint64_t seed);
TinyDataset generate_tiny(const TinyParams& p, std::uint64_t seed);

using DatasetPayload = std::variant<LinregDataset, GmmDataset, LdaDataset, TinyDataset>;

struct DatasetBundle
{
  DatasetKind kind;
  DatasetPayload payload;
  std::uint64_t seed = 0;
};

/// Writes `data.csv` plus `truth.json` into `dir`. Files are written atomically.
/// Regression: header y,x1..xd. GMM: y1..yd. LDA: doc_id,word_id,count. Tiny: y.
void write_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

/// Inverse of write_bundle. Throws IoError for missing or unreadable files
/// and InvalidArgument for malformed contents.
DatasetBundle read_bundle(const std::filesystem::path& dir);

/// printf "%.17g"; every CSV float goes through this.
std::string format_double(double x);

/// Writes to `path.tmp` and renames over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace alphavb

#endif
