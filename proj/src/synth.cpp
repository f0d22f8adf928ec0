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
#include "alphavb/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "alphavb/errors.hpp"
#include "alphavb/rng.hpp"

namespace alphavb {

DatasetKind parse_dataset_kind(const std::string& name)
{
  if (name == "linreg_s21") return DatasetKind::LinregS21;
  if (name == "gmm_s22") return DatasetKind::GmmS22;
  if (name == "lda_synth") return DatasetKind::LdaSynth;
  if (name == "tiny_discrete") return DatasetKind::TinyDiscrete;
  throw InvalidArgument("unknown dataset kind '" + name + "'");
}

std::string to_string(DatasetKind kind)
{
  switch (kind) {
  case DatasetKind::LinregS21: return "linreg_s21";
  case DatasetKind::GmmS22: return "gmm_s22";
  case DatasetKind::LdaSynth: return "lda_synth";
  case DatasetKind::TinyDiscrete: return "tiny_discrete";
  }
  return "unknown";
}

LinregDataset generate_linreg(const LinregParams& p, std::uint64_t seed)
{
  require(p.n >= 1 && p.d >= 1, "linreg needs n, d >= 1");
  require(p.sigma > 0.0 && p.x_sd > 0.0, "linreg scales must be positive");
  require(static_cast<int>(p.beta_head.size()) <= p.d, "more nonzero coefficients than d");
  CounterRng design(seed, 1), noise(seed, 2);
  LinregDataset out;
  out.beta = Eigen::VectorXd::Zero(p.d);
  for (std::size_t j = 0; j < p.beta_head.size(); ++j)
    out.beta(static_cast<Eigen::Index>(j)) = p.beta_head[j];
  out.data.sigma = p.sigma;
  out.data.X.resize(p.n, p.d);
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.d; ++j) out.data.X(i, j) = p.x_sd * design.normal();
  out.data.y = out.data.X * out.beta;
  for (int i = 0; i < p.n; ++i) out.data.y(i) += p.sigma * noise.normal();
  return out;
}

GmmDataset generate_gmm(const GmmParams& p, std::uint64_t seed)
{
  require(p.n >= 1 && p.d >= 1 && p.k >= 1, "gmm needs n, d, K >= 1");
  require(p.mean_variance > 0.0 && p.sigma0_sq > 0.0, "gmm variances must be positive");
  CounterRng means_rng(seed, 1), label_rng(seed, 2), noise(seed, 3);
  GmmDataset out;
  out.prior.mu0 = Eigen::VectorXd::Zero(p.d);
  out.prior.sigma0_sq = p.sigma0_sq;
  out.prior.pi = DiscreteDistribution::uniform(static_cast<std::size_t>(p.k));
  const double sd = std::sqrt(p.mean_variance);
  out.means.resize(p.k, p.d);
  for (int j = 0; j < p.k; ++j)
    for (int c = 0; c < p.d; ++c) out.means(j, c) = sd * means_rng.normal();
  out.y.resize(p.n, p.d);
  out.labels.resize(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    const auto s = static_cast<int>(label_rng.categorical(out.prior.pi.probs()));
    out.labels[static_cast<std::size_t>(i)] = s;
    for (int c = 0; c < p.d; ++c) out.y(i, c) = out.means(s, c) + noise.normal();
  }
  return out;
}

Eigen::MatrixXd sample_gmm(const Eigen::MatrixXd& means, const DiscreteDistribution& pi, int n,
                           CounterRng& rng)
{
  require(n >= 1, "n must be positive");
  if (pi.size() != static_cast<std::size_t>(means.rows())) throw DimensionMismatch("pi size");
  Eigen::MatrixXd y(n, means.cols());
  for (int i = 0; i < n; ++i) {
    const auto s = static_cast<Eigen::Index>(rng.categorical(pi.probs()));
    for (Eigen::Index c = 0; c < means.cols(); ++c) y(i, c) = means(s, c) + rng.normal();
  }
  return y;
}

LdaDataset generate_lda(const LdaSynthParams& p, std::uint64_t seed)
{
  require(p.k >= 2 && p.docs >= 1 && p.words_per_doc >= 1, "lda needs K >= 2 and a nonempty corpus");
  require(p.support >= 1 && p.k * p.support <= p.v, "topic supports must fit disjointly in V");
  require(p.max_active >= 1 && p.max_active <= p.k, "max_active must lie in [1, K]");
  CounterRng vocab_rng(seed, 1), weight_rng(seed, 2), doc_rng(seed, 3), word_rng(seed, 4);

  // Seeded Fisher-Yates placement of the disjoint supports.
  std::vector<int> order(static_cast<std::size_t>(p.v));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[vocab_rng.next_u64() % (i + 1)]);

  LdaDataset out;
  out.topics = Eigen::MatrixXd::Zero(p.k, p.v);
  for (int t = 0; t < p.k; ++t) {
    double total = 0.0;
    for (int w = 0; w < p.support; ++w) {
      const double g = weight_rng.gamma(5.0);
      out.topics(t, order[static_cast<std::size_t>(t * p.support + w)]) = g;
      total += g;
    }
    out.topics.row(t) /= total;
  }

  out.corpus.vocabulary_size = static_cast<std::size_t>(p.v);
  out.doc_topics = Eigen::MatrixXd::Zero(p.docs, p.k);
  for (int d = 0; d < p.docs; ++d) {
    const int active = 1 + static_cast<int>(doc_rng.next_u64() % static_cast<std::uint64_t>(p.max_active));
    std::vector<int> topics(static_cast<std::size_t>(p.k));
    std::iota(topics.begin(), topics.end(), 0);
    for (int i = 0; i < active; ++i)
      std::swap(topics[static_cast<std::size_t>(i)],
                topics[static_cast<std::size_t>(i) + doc_rng.next_u64() % static_cast<std::uint64_t>(p.k - i)]);
    double total = 0.0;
    for (int i = 0; i < active; ++i) {
      const double g = doc_rng.gamma(1.0);
      out.doc_topics(d, topics[static_cast<std::size_t>(i)]) = g;
      total += g;
    }
    out.doc_topics.row(d) /= total;

    std::vector<int> counts(static_cast<std::size_t>(p.v), 0);
    const Eigen::VectorXd theta = out.doc_topics.row(d).transpose();
    for (int n = 0; n < p.words_per_doc; ++n) {
      const auto z = static_cast<Eigen::Index>(word_rng.categorical({theta.data(), static_cast<std::size_t>(p.k)}));
      const Eigen::VectorXd row = out.topics.row(z).transpose();
      ++counts[word_rng.categorical({row.data(), static_cast<std::size_t>(p.v)})];
    }
    LdaDocument doc;
    for (int w = 0; w < p.v; ++w)
      if (counts[static_cast<std::size_t>(w)] > 0) doc.push_back({w, counts[static_cast<std::size_t>(w)]});
    out.corpus.docs.push_back(std::move(doc));
  }
  return out;
}

TinyDiscreteModel TinyParams::model() const
{
  return TinyDiscreteModel::bernoulli(means, mixings, DiscreteDistribution(prior),
                                      static_cast<std::size_t>(truth_index));
}

TinyDataset generate_tiny(const TinyParams& p, std::uint64_t seed)
{
  require(p.n >= 1, "tiny model needs n >= 1");
  TinyDataset out{p.model(), {}};
  CounterRng rng(seed, 1);
  out.y = out.model.sample(static_cast<std::size_t>(p.n), rng);
  return out;
}

std::string format_double(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m)
{
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_json(const Eigen::VectorXd& v)
{
  return std::vector<double>(v.data(), v.data() + v.size());
}

} // namespace

void write_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream csv;
  nlohmann::json truth;
  truth["kind"] = to_string(bundle.kind);
  truth["seed"] = bundle.seed;

  if (const auto* lr = std::get_if<LinregDataset>(&bundle.payload)) {
    csv << "y";
    for (Eigen::Index j = 0; j < lr->data.d(); ++j) csv << ",x" << j + 1;
    csv << '\n';
    for (Eigen::Index i = 0; i < lr->data.n(); ++i) {
      csv << format_double(lr->data.y(i));
      for (Eigen::Index j = 0; j < lr->data.d(); ++j) csv << ',' << format_double(lr->data.X(i, j));
      csv << '\n';
    }
    truth["beta"] = vector_json(lr->beta);
    truth["sigma"] = lr->data.sigma;
  } else if (const auto* g = std::get_if<GmmDataset>(&bundle.payload)) {
    for (Eigen::Index c = 0; c < g->y.cols(); ++c) csv << (c ? "," : "") << 'y' << c + 1;
    csv << '\n';
    for (Eigen::Index i = 0; i < g->y.rows(); ++i) {
      for (Eigen::Index c = 0; c < g->y.cols(); ++c) csv << (c ? "," : "") << format_double(g->y(i, c));
      csv << '\n';
    }
    truth["means"] = matrix_json(g->means);
    truth["labels"] = g->labels;
    truth["pi"] = std::vector<double>(g->prior.pi.probs().begin(), g->prior.pi.probs().end());
    truth["mu0"] = vector_json(g->prior.mu0);
    truth["sigma0_sq"] = g->prior.sigma0_sq;
  } else if (const auto* l = std::get_if<LdaDataset>(&bundle.payload)) {
    l->corpus.write_csv(csv);
    truth["vocabulary_size"] = l->corpus.vocabulary_size;
    truth["topics"] = matrix_json(l->topics);
    truth["doc_topics"] = matrix_json(l->doc_topics);
  } else if (const auto* t = std::get_if<TinyDataset>(&bundle.payload)) {
    csv << "y\n";
    for (int y : t->y) csv << y << '\n';
    nlohmann::json grid = nlohmann::json::array();
    for (std::size_t g = 0; g < t->model.grid_size(); ++g) {
      const auto& par = t->model.parameter(g);
      grid.push_back({{"emission", par.emission}, {"mixing", par.mixing}});
    }
    truth["grid"] = grid;
    truth["prior"] = std::vector<double>(t->model.prior().probs().begin(), t->model.prior().probs().end());
    truth["truth_index"] = t->model.truth_index();
  }
  write_file_atomic(dir / "data.csv", csv.str());
  write_file_atomic(dir / "truth.json", truth.dump(2) + "\n");
}

namespace {

std::string read_text(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read from " + path.string() + " failed");
  return buf.str();
}

// Header line plus rows of numbers; every row must match the header width.
std::vector<std::vector<double>> read_numeric_csv(const std::string& text, std::size_t& width)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty data.csv");
  width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw InvalidArgument("non-numeric field in data.csv: " + line);
      row.push_back(v);
      if (next == end) break;
      if (*next != ',') throw InvalidArgument("malformed row in data.csv: " + line);
      p = next + 1;
    }
    if (row.size() != width) throw InvalidArgument("ragged row in data.csv: " + line);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("data.csv has no rows");
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j)
{
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw InvalidArgument("ragged matrix in truth.json");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j)
{
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

DatasetBundle read_bundle(const std::filesystem::path& dir)
{
  const std::string data_text = read_text(dir / "data.csv");
  nlohmann::json truth;
  try {
    truth = nlohmann::json::parse(read_text(dir / "truth.json"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("truth.json: ") + e.what());
  }
  try {
    DatasetBundle bundle{parse_dataset_kind(truth.at("kind").get<std::string>()), {},
                         truth.at("seed").get<std::uint64_t>()};
    std::size_t width = 0;
    switch (bundle.kind) {
    case DatasetKind::LinregS21: {
      const auto rows = read_numeric_csv(data_text, width);
      require(width >= 2, "regression data needs y and at least one x column");
      LinregDataset ds;
      ds.data.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
      ds.data.y.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.data.y(i) = rows[i][0];
        for (std::size_t j = 1; j < width; ++j) ds.data.X(i, j - 1) = rows[i][j];
      }
      ds.data.sigma = truth.at("sigma").get<double>();
      ds.beta = vector_from_json(truth.at("beta"));
      ds.data.validate();
      if (ds.beta.size() != ds.data.d()) throw DimensionMismatch("beta length differs from x columns");
      bundle.payload = std::move(ds);
      break;
    }
    case DatasetKind::GmmS22: {
      const auto rows = read_numeric_csv(data_text, width);
      GmmDataset ds;
      ds.y.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < width; ++c) ds.y(i, c) = rows[i][c];
      ds.means = matrix_from_json(truth.at("means"));
      ds.labels = truth.at("labels").get<std::vector<int>>();
      ds.prior.pi = DiscreteDistribution(truth.at("pi").get<std::vector<double>>());
      ds.prior.mu0 = vector_from_json(truth.at("mu0"));
      ds.prior.sigma0_sq = truth.at("sigma0_sq").get<double>();
      ds.prior.validate(ds.y.cols());
      if (ds.means.cols() != ds.y.cols()) throw DimensionMismatch("means dimension differs from data");
      bundle.payload = std::move(ds);
      break;
    }
    case DatasetKind::LdaSynth: {
      std::istringstream in(data_text);
      LdaDataset ds;
      ds.corpus = LdaCorpus::read_csv(in, truth.at("vocabulary_size").get<std::size_t>());
      ds.topics = matrix_from_json(truth.at("topics"));
      ds.doc_topics = matrix_from_json(truth.at("doc_topics"));
      bundle.payload = std::move(ds);
      break;
    }
    case DatasetKind::TinyDiscrete: {
      const auto rows = read_numeric_csv(data_text, width);
      std::vector<TinyParameter> grid;
      for (const auto& g : truth.at("grid"))
        grid.push_back({g.at("emission").get<std::vector<std::vector<double>>>(),
                        g.at("mixing").get<std::vector<double>>()});
      TinyDataset ds{TinyDiscreteModel(std::move(grid),
                                       DiscreteDistribution(truth.at("prior").get<std::vector<double>>()),
                                       truth.at("truth_index").get<std::size_t>()),
                     {}};
      for (const auto& r : rows) ds.y.push_back(static_cast<int>(r[0]));
      bundle.payload = std::move(ds);
      break;
    }
    }
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("truth.json: ") + e.what());
  }
}

} // namespace alphavb
