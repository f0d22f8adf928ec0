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
#include "alphavb/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "alphavb/errors.hpp"
#include "alphavb/gmm.hpp"
#include "alphavb/lda.hpp"
#include "alphavb/linreg.hpp"
#include "alphavb/parallel.hpp"
#include "alphavb/risk.hpp"

#ifndef ALPHAVB_VERSION
#define ALPHAVB_VERSION "0.0.0"
#endif

namespace alphavb {

using json = nlohmann::json;

std::string library_version() { return ALPHAVB_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

const std::vector<std::string> kCommands{"generate",        "fit",           "sweep-alpha",
                                         "rate-experiment", "verify-bounds", "report"};
const std::vector<std::string> kModels{"gmm", "hdr", "blm", "lda"};

void config_check(bool ok, const std::string& msg)
{
  if (!ok) throw InvalidArgument("config: " + msg);
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where)
{
  config_check(obj.is_object(), where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    config_check(std::find(allowed.begin(), allowed.end(), it.key()) != allowed.end(),
                 "unknown key '" + it.key() + "' in " + where);
}

double number(const json& o, const std::string& key, double fallback)
{
  if (!o.contains(key)) return fallback;
  config_check(o[key].is_number(), key + " must be a number");
  return o[key].get<double>();
}

long integer(const json& o, const std::string& key, long fallback)
{
  if (!o.contains(key)) return fallback;
  config_check(o[key].is_number_integer(), key + " must be an integer");
  return o[key].get<long>();
}

std::string text(const json& o, const std::string& key, const std::string& fallback)
{
  if (!o.contains(key)) return fallback;
  config_check(o[key].is_string(), key + " must be a string");
  return o[key].get<std::string>();
}

bool boolean(const json& o, const std::string& key, bool fallback)
{
  if (!o.contains(key)) return fallback;
  config_check(o[key].is_boolean(), key + " must be a boolean");
  return o[key].get<bool>();
}

std::vector<double> numbers(const json& o, const std::string& key, std::vector<double> fallback)
{
  if (!o.contains(key)) return fallback;
  const json& v = o[key];
  config_check(v.is_array() && !v.empty(), key + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& x : v) {
    config_check(x.is_number(), key + " entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> table(const json& o, const std::string& key,
                                       std::vector<std::vector<double>> fallback)
{
  if (!o.contains(key)) return fallback;
  std::vector<std::vector<double>> out;
  config_check(o[key].is_array(), key + " must be an array of arrays");
  for (const auto& row : o[key]) {
    json wrap{{"row", row}};
    out.push_back(numbers(wrap, "row", {}));
  }
  return out;
}

int positive_int(const json& o, const std::string& key, long fallback)
{
  const long v = integer(o, key, fallback);
  config_check(v >= 1 && v <= 100000000, key + " must be a positive integer");
  return static_cast<int>(v);
}

const std::map<DatasetKind, std::vector<std::string>>& param_keys()
{
  static const std::map<DatasetKind, std::vector<std::string>> keys{
      {DatasetKind::LinregS21, {"n", "d", "sigma", "x_sd", "beta_head"}},
      {DatasetKind::GmmS22, {"n", "d", "k", "mean_variance", "sigma0_sq"}},
      {DatasetKind::LdaSynth, {"k", "v", "docs", "words_per_doc", "support", "max_active"}},
      {DatasetKind::TinyDiscrete, {"n", "means", "mixings", "prior", "truth_index"}}};
  return keys;
}

const std::vector<std::string> kSolverKeys{
    "max_iters",       "elbo_tol",      "n_theta_samples", "gmm_update_rule", "restarts",
    "hdr_update_rule", "nu1",           "inclusion_prior", "plug_in_sigma",   "num_topics",
    "eta_beta",        "eta_gamma",     "prior_var",       "a0",              "b0"};

const std::map<std::string, std::vector<std::string>>& option_keys()
{
  static const std::map<std::string, std::vector<std::string>> keys{
      {"generate", {}},
      {"fit", {}},
      {"sweep-alpha", {}},
      {"rate-experiment", {"n_grid", "replications", "n_mc", "theta_samples"}},
      {"verify-bounds",
       {"check", "n", "zeta", "replications", "lattice_step", "components", "prior_sd", "eps_pi",
        "eps_mu", "D", "n_mc", "theta_samples"}},
      {"report", {"state", "top"}}};
  return keys;
}

DatasetKind model_kind(const std::string& model)
{
  if (model == "gmm") return DatasetKind::GmmS22;
  if (model == "lda") return DatasetKind::LdaSynth;
  return DatasetKind::LinregS21;
}

std::vector<double> default_alphas(const std::string& command)
{
  if (command == "sweep-alpha") return {0.5, 0.7, 0.95, 1.0};
  if (command == "verify-bounds") return {0.5};
  return {1.0};
}

// ---------------------------------------------------------------------------
// Generator parameters

LinregParams linreg_params(const json& p)
{
  LinregParams lp;
  lp.n = positive_int(p, "n", lp.n);
  lp.d = positive_int(p, "d", lp.d);
  lp.sigma = number(p, "sigma", lp.sigma);
  lp.x_sd = number(p, "x_sd", lp.x_sd);
  lp.beta_head = numbers(p, "beta_head", lp.beta_head);
  config_check(lp.sigma > 0.0 && lp.x_sd > 0.0, "sigma and x_sd must be positive");
  return lp;
}

GmmParams gmm_params(const json& p)
{
  GmmParams gp;
  gp.n = positive_int(p, "n", gp.n);
  gp.d = positive_int(p, "d", gp.d);
  gp.k = positive_int(p, "k", gp.k);
  gp.mean_variance = number(p, "mean_variance", gp.mean_variance);
  gp.sigma0_sq = number(p, "sigma0_sq", gp.sigma0_sq);
  config_check(gp.mean_variance > 0.0 && gp.sigma0_sq > 0.0, "gmm variances must be positive");
  return gp;
}

LdaSynthParams lda_params(const json& p)
{
  LdaSynthParams lp;
  lp.k = positive_int(p, "k", lp.k);
  lp.v = positive_int(p, "v", lp.v);
  lp.docs = positive_int(p, "docs", lp.docs);
  lp.words_per_doc = positive_int(p, "words_per_doc", lp.words_per_doc);
  lp.support = positive_int(p, "support", lp.support);
  lp.max_active = positive_int(p, "max_active", lp.max_active);
  return lp;
}

TinyParams tiny_params(const json& p)
{
  TinyParams tp;
  tp.n = positive_int(p, "n", tp.n);
  tp.means = table(p, "means", tp.means);
  tp.mixings = table(p, "mixings", tp.mixings);
  tp.prior = numbers(p, "prior", tp.prior);
  const long t = integer(p, "truth_index", tp.truth_index);
  config_check(t >= 0, "truth_index must be nonnegative");
  tp.truth_index = static_cast<int>(t);
  return tp;
}

DatasetBundle generate_bundle(DatasetKind kind, const json& params, std::uint64_t seed)
{
  DatasetBundle b{kind, {}, seed};
  switch (kind) {
  case DatasetKind::LinregS21:
    b.payload = generate_linreg(linreg_params(params), seed);
    break;
  case DatasetKind::GmmS22:
    b.payload = generate_gmm(gmm_params(params), seed);
    break;
  case DatasetKind::LdaSynth:
    b.payload = generate_lda(lda_params(params), seed);
    break;
  case DatasetKind::TinyDiscrete:
    b.payload = generate_tiny(tiny_params(params), seed);
    break;
  }
  return b;
}

DatasetBundle load_dataset(const ExperimentConfig& cfg, DatasetKind kind)
{
  if (cfg.data) {
    DatasetBundle b = read_bundle(*cfg.data);
    config_check(b.kind == kind, "dataset at " + cfg.data->string() + " is " + to_string(b.kind) +
                                     ", expected " + to_string(kind));
    return b;
  }
  return generate_bundle(kind, cfg.params, cfg.seed);
}

// ---------------------------------------------------------------------------
// Output helpers

std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

class OutputDir
{
public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root))
  {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw IoError("cannot create " + root_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& contents)
  {
    write_file_atomic(root_ / name, contents);
    sums_[name] = hex64(fnv1a64(contents));
    files_.push_back(root_ / name);
  }

  void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

  // Records checksums of files produced by other writers (e.g. write_bundle).
  void adopt(const std::string& name)
  {
    std::ifstream in(root_ / name, std::ios::binary);
    if (!in) throw IoError("cannot reopen " + (root_ / name).string());
    std::ostringstream buf;
    buf << in.rdbuf();
    sums_[name] = hex64(fnv1a64(buf.str()));
    files_.push_back(root_ / name);
  }

  void manifest(const ExperimentConfig& cfg)
  {
    json m;
    m["command"] = cfg.command;
    m["config"] = cfg.canonical();
    m["config_hash"] = hex64(cfg.hash());
    m["seed"] = cfg.seed;
    m["version"] = library_version();
    m["files"] = sums_;
    write_file_atomic(root_ / "manifest.json", m.dump(2) + "\n");
    files_.push_back(root_ / "manifest.json");
  }

  const std::vector<std::filesystem::path>& files() const { return files_; }

private:
  std::filesystem::path root_;
  std::map<std::string, std::string> sums_;
  std::vector<std::filesystem::path> files_;
};

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Eigen::MatrixXd& m)
{
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

std::string trace_csv(const ElboTrace& trace)
{
  std::ostringstream out;
  out << "sweep,elbo\n";
  for (std::size_t i = 0; i < trace.values.size(); ++i)
    out << i + 1 << ',' << format_double(trace.values[i]) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Fitting

AlphaConfig alpha_config(const ExperimentConfig& cfg, double alpha)
{
  AlphaConfig ac;
  ac.alpha = alpha;
  ac.seed = cfg.seed;
  ac.max_iters = positive_int(cfg.solver, "max_iters", ac.max_iters);
  ac.elbo_tol = number(cfg.solver, "elbo_tol", ac.elbo_tol);
  ac.n_theta_samples =
      static_cast<std::size_t>(positive_int(cfg.solver, "n_theta_samples", 1000));
  config_check(ac.elbo_tol > 0.0, "elbo_tol must be positive");
  return ac;
}

BlmPrior blm_prior(const ExperimentConfig& cfg, Eigen::Index d)
{
  const double var = number(cfg.solver, "prior_var", 100.0);
  BlmPrior p{Eigen::VectorXd::Zero(d), var * Eigen::MatrixXd::Identity(d, d),
             number(cfg.solver, "a0", 1.0), number(cfg.solver, "b0", 1.0)};
  config_check(var > 0.0 && p.a0 > 0.0 && p.b0 > 0.0, "prior_var, a0, b0 must be positive");
  return p;
}

struct FitOutcome
{
  double alpha = 1.0;
  json state;
  json metrics;
  ElboTrace trace;
};

Eigen::MatrixXd row_normalized(const Eigen::MatrixXd& m)
{
  Eigen::MatrixXd out = m;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.row(r) /= m.row(r).sum();
  return out;
}

FitOutcome run_fit(const std::string& model, const DatasetBundle& bundle, double alpha,
                   const ExperimentConfig& cfg)
{
  FitOutcome fo;
  fo.alpha = alpha;
  const AlphaConfig ac = alpha_config(cfg, alpha);
  const json& s = cfg.solver;

  if (model == "gmm") {
    const auto& ds = std::get<GmmDataset>(bundle.payload);
    GmmOptions opt;
    opt.rule = parse_gmm_update_rule(text(s, "gmm_update_rule", to_string(opt.rule)));
    opt.restarts = positive_int(s, "restarts", opt.restarts);
    const GmmFit fit = fit_gmm(ds.y, ds.prior, ac, opt);
    fo.trace = fit.trace;
    fo.state = {{"mu_tilde", matrix_json(fit.state.mu_tilde)},
                {"sigma_tilde_sq", vector_json(fit.state.sigma_tilde_sq)}};
    fo.metrics = {{"max_mean_error", max_matched_error(fit.state.mu_tilde, ds.means)}};
  } else if (model == "hdr") {
    const auto& ds = std::get<LinregDataset>(bundle.payload);
    HdrOptions opt;
    opt.rule = parse_hdr_update_rule(text(s, "hdr_update_rule", to_string(opt.rule)));
    opt.nu1 = number(s, "nu1", opt.nu1);
    if (s.contains("inclusion_prior")) opt.inclusion_prior = number(s, "inclusion_prior", 0.0);
    opt.plug_in_sigma = boolean(s, "plug_in_sigma", false);
    const HdrFit fit = fit_hdr(ds.data, opt, ac);
    fo.trace = fit.trace;
    fo.state = {{"mu", vector_json(fit.state.mu)},
                {"sigma_sq", vector_json(fit.state.sigma_sq)},
                {"phi", vector_json(fit.state.phi)},
                {"nu1", fit.state.nu1},
                {"sigma_used", fit.sigma_used}};
    double min_support = 1.0, max_null = 0.0, max_err = 0.0;
    int selected = 0, support = 0;
    for (Eigen::Index j = 0; j < ds.beta.size(); ++j) {
      selected += fit.state.phi(j) > 0.5 ? 1 : 0;
      if (ds.beta(j) != 0.0) {
        ++support;
        min_support = std::min(min_support, fit.state.phi(j));
        max_err = std::max(max_err, std::abs(fit.state.mu(j) - ds.beta(j)));
      } else {
        max_null = std::max(max_null, fit.state.phi(j));
      }
    }
    fo.metrics = {{"min_support_phi", min_support}, {"max_null_phi", max_null},
                  {"max_coef_error", max_err},      {"selected", selected},
                  {"true_support", support}};
  } else if (model == "blm") {
    const auto& ds = std::get<LinregDataset>(bundle.payload);
    const BlmFit fit = fit_blm(ds.data.X, ds.data.y, blm_prior(cfg, ds.data.d()), ac);
    fo.trace = fit.trace;
    fo.state = {{"beta_mean", vector_json(fit.state.beta_mean)},
                {"beta_cov", matrix_json(fit.state.beta_cov)},
                {"inv_gamma_shape", fit.state.inv_gamma_shape},
                {"inv_gamma_rate", fit.state.inv_gamma_rate}};
    fo.metrics = {{"expected_sq_error", expected_squared_error(fit.state, ds.beta)}};
  } else {
    const auto& ds = std::get<LdaDataset>(bundle.payload);
    LdaHyper hyper;
    hyper.num_topics = static_cast<std::size_t>(
        positive_int(s, "num_topics", static_cast<long>(ds.topics.rows())));
    hyper.eta_beta = number(s, "eta_beta", 0.0);
    hyper.eta_gamma = number(s, "eta_gamma", 0.0);
    const LdaFit fit = fit_lda(ds.corpus, hyper, ac);
    fo.trace = fit.trace;
    fo.state = {{"lambda", matrix_json(fit.state.lambda)}, {"gamma", matrix_json(fit.state.gamma)}};
    if (hyper.num_topics == static_cast<std::size_t>(ds.topics.rows())) {
      const Eigen::MatrixXd fitted = row_normalized(fit.state.lambda);
      const auto perm = greedy_topic_matching(fitted, ds.topics);
      int min_overlap = 10;
      double mean_overlap = 0.0;
      for (Eigen::Index k = 0; k < ds.topics.rows(); ++k) {
        const auto t = top_indices(ds.topics.row(k).transpose(), 10);
        const auto f = top_indices(fitted.row(static_cast<Eigen::Index>(perm[k])).transpose(), 10);
        int hits = 0;
        for (auto w : t) hits += std::find(f.begin(), f.end(), w) != f.end() ? 1 : 0;
        min_overlap = std::min(min_overlap, hits);
        mean_overlap += hits;
      }
      fo.metrics = {{"min_top10_overlap", min_overlap},
                    {"mean_top10_overlap", mean_overlap / static_cast<double>(ds.topics.rows())}};
    } else {
      fo.metrics = json::object();
    }
  }
  return fo;
}

json state_document(const std::string& model, const FitOutcome& fo, const ExperimentConfig& cfg)
{
  return {{"schema", "alphavb.state/1"},
          {"model", model},
          {"alpha", fo.alpha},
          {"seed", cfg.seed},
          {"converged", fo.trace.converged()},
          {"sweeps", fo.trace.sweeps()},
          {"final_elbo", fo.trace.values.empty() ? 0.0 : fo.trace.values.back()},
          {"state", fo.state},
          {"metrics", fo.metrics}};
}

std::string nonconvergence(const FitOutcome& fo)
{
  return "not converged: alpha=" + format_double(fo.alpha) + " after " +
         std::to_string(fo.trace.sweeps()) + " sweeps";
}

// ---------------------------------------------------------------------------
// Commands

void cmd_generate(const ExperimentConfig& cfg, OutputDir& out, RunResult&)
{
  const DatasetKind kind = cfg.kind ? *cfg.kind : model_kind(cfg.model);
  write_bundle(generate_bundle(kind, cfg.params, cfg.seed), std::filesystem::path(cfg.out));
  out.adopt("data.csv");
  out.adopt("truth.json");
}

void cmd_fit(const ExperimentConfig& cfg, OutputDir& out, RunResult& res)
{
  config_check(cfg.alphas.size() == 1, "fit takes exactly one alpha; use sweep-alpha for lists");
  const DatasetBundle bundle = load_dataset(cfg, model_kind(cfg.model));
  const FitOutcome fo = run_fit(cfg.model, bundle, cfg.alphas[0], cfg);
  out.write_json("state.json", state_document(cfg.model, fo, cfg));
  out.write("trace.csv", trace_csv(fo.trace));
  if (!fo.trace.converged()) res.diagnostics.push_back(nonconvergence(fo));
}

void cmd_sweep(const ExperimentConfig& cfg, OutputDir& out, RunResult& res)
{
  const DatasetBundle bundle = load_dataset(cfg, model_kind(cfg.model));
  std::vector<FitOutcome> fits(cfg.alphas.size());
  parallel_for(fits.size(), [&](std::size_t i) { fits[i] = run_fit(cfg.model, bundle, cfg.alphas[i], cfg); });

  std::vector<std::string> metric_names;
  for (auto it = fits[0].metrics.begin(); it != fits[0].metrics.end(); ++it)
    metric_names.push_back(it.key());
  std::ostringstream sweep, traces;
  sweep << "alpha,sweeps,converged,final_elbo";
  for (const auto& m : metric_names) sweep << ',' << m;
  sweep << '\n';
  traces << "alpha,sweep,elbo\n";
  for (const auto& fo : fits) {
    sweep << format_double(fo.alpha) << ',' << fo.trace.sweeps() << ','
          << (fo.trace.converged() ? 1 : 0) << ','
          << format_double(fo.trace.values.empty() ? 0.0 : fo.trace.values.back());
    for (const auto& m : metric_names) sweep << ',' << format_double(fo.metrics[m].get<double>());
    sweep << '\n';
    for (std::size_t i = 0; i < fo.trace.values.size(); ++i)
      traces << format_double(fo.alpha) << ',' << i + 1 << ',' << format_double(fo.trace.values[i])
             << '\n';
    if (!fo.trace.converged()) res.diagnostics.push_back(nonconvergence(fo));
  }
  out.write("sweep.csv", sweep.str());
  out.write("traces.csv", traces.str());
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

void cmd_rate(const ExperimentConfig& cfg, OutputDir& out, RunResult& res)
{
  const json& o = cfg.options;
  const std::string model = cfg.model.empty() ? "blm" : cfg.model;
  config_check(model == "blm" || model == "gmm", "rate-experiment supports model blm or gmm");
  std::vector<int> grid;
  for (double v : numbers(o, "n_grid", {100, 200, 400, 800, 1600})) {
    config_check(v >= 2 && v == std::floor(v), "n_grid entries must be integers >= 2");
    grid.push_back(static_cast<int>(v));
  }
  config_check(grid.size() >= 4, "n_grid needs at least 4 sizes");
  const int reps = positive_int(o, "replications", 20);
  const auto n_mc = static_cast<std::size_t>(positive_int(o, "n_mc", 2000));
  const auto theta_samples = static_cast<std::size_t>(positive_int(o, "theta_samples", 50));

  std::optional<GmmDataset> gmm_truth;
  if (model == "gmm") gmm_truth = generate_gmm(gmm_params(cfg.params), cfg.seed);

  struct Cell { double alpha; int n; int rep; std::uint64_t seed; double risk; bool converged; };
  std::vector<Cell> cells;
  for (double a : cfg.alphas)
    for (int n : grid)
      for (int r = 0; r < reps; ++r)
        cells.push_back({a, n, r, mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(n)),
                                           static_cast<std::uint64_t>(r)),
                         0.0, true});

  parallel_for(cells.size(), [&](std::size_t i) {
    Cell& c = cells[i];
    ExperimentConfig local = cfg;
    local.seed = c.seed;
    const AlphaConfig ac = alpha_config(local, c.alpha);
    if (model == "blm") {
      json p = cfg.params;
      p["n"] = c.n;
      if (!p.contains("d")) p["d"] = 4;
      const LinregDataset ds = generate_linreg(linreg_params(p), c.seed);
      const BlmFit fit = fit_blm(ds.data.X, ds.data.y, blm_prior(cfg, ds.data.d()), ac);
      c.risk = expected_squared_error(fit.state, ds.beta);
      c.converged = fit.trace.converged();
    } else {
      CounterRng rng(c.seed);
      const Eigen::MatrixXd y = sample_gmm(gmm_truth->means, gmm_truth->prior.pi, c.n, rng);
      GmmOptions opt;
      opt.rule = parse_gmm_update_rule(text(cfg.solver, "gmm_update_rule", to_string(opt.rule)));
      opt.restarts = positive_int(cfg.solver, "restarts", opt.restarts);
      const GmmFit fit = fit_gmm(y, gmm_truth->prior, ac, opt);
      const double order = c.alpha < 1.0 ? c.alpha : 0.5;
      c.risk = estimate_variational_risk(
                   gmm_parameter_density(fit.state),
                   gmm_renyi_divergence(gmm_truth->means, gmm_truth->prior.pi, order, n_mc),
                   DivergenceKind::renyi(order), theta_samples, cfg.seed)
                   .value;
      c.converged = fit.trace.converged();
    }
  });

  std::ostringstream risks, rate;
  risks << "alpha,n,replication,seed,risk\n";
  rate << "alpha,n,median_risk\n";
  json slopes = json::array();
  for (double a : cfg.alphas) {
    std::vector<double> ns, meds;
    for (int n : grid) {
      std::vector<double> rs;
      for (const auto& c : cells)
        if (c.alpha == a && c.n == n) {
          rs.push_back(c.risk);
          risks << format_double(a) << ',' << n << ',' << c.rep << ',' << c.seed << ','
                << format_double(c.risk) << '\n';
          if (!c.converged)
            res.diagnostics.push_back("not converged: alpha=" + format_double(a) +
                                      " n=" + std::to_string(n) + " replication=" +
                                      std::to_string(c.rep));
        }
      ns.push_back(n);
      meds.push_back(median(rs));
      rate << format_double(a) << ',' << n << ',' << format_double(meds.back()) << '\n';
    }
    const SlopeFit sf = rate_slope(ns, meds);
    slopes.push_back({{"alpha", a},
                      {"slope", sf.slope},
                      {"intercept", sf.intercept},
                      {"r_squared", sf.r_squared},
                      {"slope_standard_error", sf.slope_standard_error},
                      {"residuals", sf.residuals}});
  }
  out.write("risks.csv", risks.str());
  out.write("rate.csv", rate.str());
  out.write_json("slope.json", json{{"model", model}, {"fits", slopes}});
}

void cmd_verify(const ExperimentConfig& cfg, OutputDir& out, RunResult& res)
{
  const json& o = cfg.options;
  const std::string check = text(o, "check", "theorem1");
  config_check(cfg.alphas.size() == 1, "verify-bounds takes exactly one alpha");
  const double alpha = cfg.alphas[0];
  config_check(alpha < 1.0, "verify-bounds needs alpha < 1");
  const double zeta = number(o, "zeta", 0.1);
  config_check(zeta > 0.0 && zeta < 1.0, "zeta must lie in (0, 1)");

  RiskCheckReport rep;
  json summary{{"check", check}, {"alpha", alpha}, {"zeta", zeta}};
  double allowed_rate = zeta;
  if (check == "theorem1") {
    const TinyParams tp = tiny_params(cfg.params);
    const int n = positive_int(o, "n", tp.n);
    RiskCheckOptions ro;
    ro.lattice_step = number(o, "lattice_step", ro.lattice_step);
    rep = check_risk_inequality(tp.model(), static_cast<std::size_t>(n), alpha, zeta,
                                static_cast<std::size_t>(positive_int(o, "replications", 2000)),
                                cfg.seed, ro);
    summary["n"] = n;
  } else if (check == "surrogate") {
    SurrogateRiskProblem p;
    p.num_components = static_cast<std::size_t>(positive_int(o, "components", 2));
    p.prior_sd = number(o, "prior_sd", p.prior_sd);
    config_check(p.prior_sd > 0.0, "prior_sd must be positive");
    const int n = positive_int(o, "n", 20);
    rep = check_surrogate_risk_inequality(
        p, static_cast<std::size_t>(n), alpha, zeta,
        static_cast<std::size_t>(positive_int(o, "replications", 200)), cfg.seed);
    summary["n"] = n;
    summary["components"] = p.num_components;
  } else if (check == "mixture") {
    const GmmDataset truth = generate_gmm(gmm_params(cfg.params), cfg.seed);
    const int n = positive_int(o, "n", 1000);
    const KLNeighborhoodSpec eps{number(o, "eps_pi", 0.1), number(o, "eps_mu", std::sqrt(0.1))};
    eps.validate();
    const double D = number(o, "D", 2.0);
    const auto n_mc = static_cast<std::size_t>(positive_int(o, "n_mc", 200000));
    const auto theta_samples = static_cast<std::size_t>(positive_int(o, "theta_samples", 50));
    const double sd = std::sqrt(number(cfg.params, "mean_variance", 50.0));
    const Eigen::Index d = truth.means.cols();
    std::vector<MembershipDraw> mu_blocks;
    for (Eigen::Index k = 0; k < truth.means.rows(); ++k) {
      auto sampler = [sd, d](CounterRng& r) {
        Eigen::VectorXd v(d);
        for (Eigen::Index j = 0; j < d; ++j) v(j) = sd * r.normal();
        return v;
      };
      mu_blocks.push_back(kl_ball_membership(
          sampler, {gaussian_state_divergence(truth.means.row(k).transpose())}, eps.eps_mu));
    }
    // pi is known, so its neighbourhood carries prior mass one.
    const PriorMassReport mass = prior_mass_bound({}, mu_blocks, n_mc, cfg.seed);
    const MixtureRiskBound bound =
        mixture_risk_bound(D, alpha, static_cast<std::size_t>(n), eps, mass.neg_log_pi, mass.neg_log_mu);
    const auto reps = static_cast<std::size_t>(positive_int(o, "replications", 100));
    rep.rows.resize(reps);
    parallel_for(reps, [&](std::size_t r) {
      RiskReplication& row = rep.rows[r];
      row.replication = r;
      row.seed = mix_seed(cfg.seed, r + 1);
      CounterRng rng(row.seed);
      const Eigen::MatrixXd y = sample_gmm(truth.means, truth.prior.pi, n, rng);
      ExperimentConfig local = cfg;
      local.seed = row.seed;
      const GmmFit fit = fit_gmm(y, truth.prior, alpha_config(local, alpha));
      row.lhs = estimate_variational_risk(gmm_parameter_density(fit.state),
                                          gmm_renyi_divergence(truth.means, truth.prior.pi, alpha, 2000),
                                          DivergenceKind::renyi(alpha), theta_samples, row.seed)
                    .value;
      row.rhs = bound.total;
      row.rhs_prior_uniform = bound.total;
      row.violated = row.lhs > row.rhs;
    });
    std::size_t violated = 0;
    for (const auto& row : rep.rows) {
      violated += row.violated ? 1 : 0;
      rep.slack.push_back(row.rhs - row.lhs);
    }
    rep.violation_rate = static_cast<double>(violated) / static_cast<double>(reps);
    rep.binomial_se = std::sqrt(rep.violation_rate * (1.0 - rep.violation_rate) / static_cast<double>(reps));
    rep.prior_uniform_violations = violated;
    allowed_rate = 1.0 - bound.probability;
    summary["n"] = n;
    summary["bound"] = {{"divergence_term", bound.divergence_term},
                        {"prior_term", bound.prior_term},
                        {"total", bound.total},
                        {"probability", bound.probability}};
    summary["neg_log_mass_mu"] = mass.neg_log_mu;
    summary["lower_bound_only"] = mass.lower_bound_only;
  } else {
    config_check(false, "unknown check '" + check + "' (theorem1, surrogate, mixture)");
  }

  std::ostringstream csv;
  rep.write_csv(csv);
  out.write("replications.csv", csv.str());
  summary["replications"] = rep.rows.size();
  summary["violation_rate"] = rep.violation_rate;
  summary["binomial_se"] = rep.binomial_se;
  summary["prior_uniform_violations"] = rep.prior_uniform_violations;
  summary["min_slack"] = *std::min_element(rep.slack.begin(), rep.slack.end());
  out.write_json("summary.json", summary);
  if (rep.violation_rate > allowed_rate + 3.0 * rep.binomial_se)
    res.diagnostics.push_back("violation rate " + format_double(rep.violation_rate) +
                              " exceeds " + format_double(allowed_rate) + " + 3 SE");
}

void cmd_report(const ExperimentConfig& cfg, OutputDir& out, RunResult&)
{
  std::filesystem::path path;
  if (cfg.options.contains("state"))
    path = text(cfg.options, "state", "");
  else if (cfg.data)
    path = *cfg.data / "state.json";
  else
    config_check(false, "report needs options.state or data pointing at a fit directory");
  const int top = positive_int(cfg.options, "top", 10);

  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  validate_state_json(doc);
  const std::string model = doc["model"].get<std::string>();
  const json& st = doc["state"];
  std::ostringstream csv;
  if (model == "lda") {
    const auto lambda = st["lambda"].get<std::vector<std::vector<double>>>();
    csv << "topic,rank,word,probability\n";
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(lambda[k].data(),
                                                            static_cast<Eigen::Index>(lambda[k].size()));
      w /= w.sum();
      const auto idx = top_indices(w, static_cast<std::size_t>(top));
      for (std::size_t r = 0; r < idx.size(); ++r)
        csv << k << ',' << r + 1 << ',' << idx[r] << ',' << format_double(w(idx[r])) << '\n';
    }
    out.write("top_words.csv", csv.str());
  } else if (model == "hdr") {
    const auto mu = st["mu"].get<std::vector<double>>();
    const auto s2 = st["sigma_sq"].get<std::vector<double>>();
    const auto phi = st["phi"].get<std::vector<double>>();
    csv << "j,mu,sigma_sq,phi\n";
    for (std::size_t j = 0; j < mu.size(); ++j)
      csv << j + 1 << ',' << format_double(mu[j]) << ',' << format_double(s2[j]) << ','
          << format_double(phi[j]) << '\n';
    out.write("coefficients.csv", csv.str());
  } else if (model == "blm") {
    const auto mean = st["beta_mean"].get<std::vector<double>>();
    const auto cov = st["beta_cov"].get<std::vector<std::vector<double>>>();
    csv << "j,mean,sd\n";
    for (std::size_t j = 0; j < mean.size(); ++j)
      csv << j + 1 << ',' << format_double(mean[j]) << ',' << format_double(std::sqrt(cov[j][j]))
          << '\n';
    out.write("coefficients.csv", csv.str());
  } else {
    const auto mu = st["mu_tilde"].get<std::vector<std::vector<double>>>();
    const auto s2 = st["sigma_tilde_sq"].get<std::vector<double>>();
    csv << "k,sigma_tilde_sq";
    for (std::size_t c = 0; c < mu[0].size(); ++c) csv << ",mu" << c + 1;
    csv << '\n';
    for (std::size_t k = 0; k < mu.size(); ++k) {
      csv << k + 1 << ',' << format_double(s2[k]);
      for (double v : mu[k]) csv << ',' << format_double(v);
      csv << '\n';
    }
    out.write("components.csv", csv.str());
  }
}

void require_shape(const json& st, const std::string& key, bool matrix)
{
  config_check(st.contains(key), "state missing '" + key + "'");
  const json& v = st[key];
  config_check(v.is_array() && !v.empty(), "state '" + key + "' must be a nonempty array");
  std::size_t width = 0;
  for (const auto& x : v) {
    if (matrix) {
      config_check(x.is_array() && !x.empty(), "state '" + key + "' must be a matrix");
      if (width == 0) width = x.size();
      config_check(x.size() == width, "state '" + key + "' is ragged");
      for (const auto& y : x) config_check(y.is_number(), "state '" + key + "' holds non-numbers");
    } else {
      config_check(x.is_number(), "state '" + key + "' holds non-numbers");
    }
  }
}

} // namespace

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const json& doc)
{
  check_keys(doc, {"command", "model", "kind", "alpha", "seed", "data", "params", "solver",
                   "options", "out"},
             "config");
  ExperimentConfig c;
  c.command = text(doc, "command", "");
  config_check(std::find(kCommands.begin(), kCommands.end(), c.command) != kCommands.end(),
               "command must be one of generate, fit, sweep-alpha, rate-experiment, "
               "verify-bounds, report");
  c.model = text(doc, "model", "");
  if (!c.model.empty())
    config_check(std::find(kModels.begin(), kModels.end(), c.model) != kModels.end(),
                 "model must be one of gmm, hdr, blm, lda");
  if (doc.contains("kind")) {
    try {
      c.kind = parse_dataset_kind(text(doc, "kind", ""));
    } catch (const Error& e) {
      config_check(false, e.what());
    }
  }
  if (c.model.empty() && c.kind && c.command != "generate" && c.command != "verify-bounds") {
    switch (*c.kind) {
    case DatasetKind::GmmS22: c.model = "gmm"; break;
    case DatasetKind::LinregS21: c.model = "hdr"; break;
    case DatasetKind::LdaSynth: c.model = "lda"; break;
    case DatasetKind::TinyDiscrete: config_check(false, "tiny_discrete data has no fit model");
    }
  }
  if (c.command == "fit" || c.command == "sweep-alpha") {
    config_check(!c.model.empty(), c.command + " needs a model");
    if (c.kind) config_check(*c.kind == model_kind(c.model), "kind does not match model");
  }
  if (c.command == "generate") config_check(c.kind || !c.model.empty(), "generate needs a kind");

  if (doc.contains("alpha")) {
    const json& a = doc["alpha"];
    c.alphas = a.is_array() ? numbers(doc, "alpha", {}) : std::vector<double>{number(doc, "alpha", 1.0)};
  } else {
    c.alphas = default_alphas(c.command);
  }
  for (double a : c.alphas) config_check(a > 0.0 && a <= 1.0, "alpha entries must lie in (0, 1]");

  if (doc.contains("seed")) {
    config_check(doc["seed"].is_number_unsigned() || (doc["seed"].is_number_integer() &&
                                                      doc["seed"].get<long long>() >= 0),
                 "seed must be a nonnegative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("data")) c.data = std::filesystem::path(text(doc, "data", ""));
  c.out = text(doc, "out", "out");
  config_check(!c.out.empty(), "out must be a nonempty path");

  const DatasetKind pkind = c.kind ? *c.kind
                            : c.command == "verify-bounds"
                                ? (text(doc.value("options", json::object()), "check", "theorem1") ==
                                           "theorem1"
                                       ? DatasetKind::TinyDiscrete
                                       : DatasetKind::GmmS22)
                                : model_kind(c.model.empty() ? "blm" : c.model);
  if (doc.contains("params")) {
    c.params = doc["params"];
    check_keys(c.params, param_keys().at(pkind), "params for " + to_string(pkind));
  }
  if (doc.contains("solver")) {
    c.solver = doc["solver"];
    check_keys(c.solver, kSolverKeys, "solver");
    try {
      if (c.solver.contains("gmm_update_rule")) parse_gmm_update_rule(text(c.solver, "gmm_update_rule", ""));
      if (c.solver.contains("hdr_update_rule")) parse_hdr_update_rule(text(c.solver, "hdr_update_rule", ""));
    } catch (const Error& e) {
      config_check(false, e.what());
    }
  }
  if (doc.contains("options")) {
    c.options = doc["options"];
    check_keys(c.options, option_keys().at(c.command), "options for " + c.command);
  }
  return c;
}

json ExperimentConfig::canonical() const
{
  json j;
  j["command"] = command;
  j["model"] = model;
  j["kind"] = kind ? to_string(*kind) : "";
  j["alpha"] = alphas;
  j["seed"] = seed;
  j["data"] = data ? data->generic_string() : "";
  j["params"] = params;
  j["solver"] = solver;
  j["options"] = options;
  return j;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical().dump()); }

RunResult execute(const ExperimentConfig& config)
{
  RunResult res;
  OutputDir out(config.out);
  using Handler = std::function<void(const ExperimentConfig&, OutputDir&, RunResult&)>;
  static const std::map<std::string, Handler> handlers{
      {"generate", cmd_generate}, {"fit", cmd_fit},         {"sweep-alpha", cmd_sweep},
      {"rate-experiment", cmd_rate}, {"verify-bounds", cmd_verify}, {"report", cmd_report}};
  const auto it = handlers.find(config.command);
  config_check(it != handlers.end(), "unknown command '" + config.command + "'");
  it->second(config, out, res);
  out.manifest(config);
  res.files = out.files();
  if (config.strict && !res.diagnostics.empty()) res.exit_code = 1;
  return res;
}

void validate_state_json(const json& doc)
{
  config_check(doc.is_object(), "state document must be an object");
  config_check(doc.value("schema", "") == "alphavb.state/1", "state schema tag missing or unknown");
  for (const char* key : {"model", "alpha", "seed", "converged", "sweeps", "final_elbo", "state",
                          "metrics"})
    config_check(doc.contains(key), std::string("state document missing '") + key + "'");
  config_check(doc["alpha"].is_number() && doc["alpha"].get<double>() > 0.0 &&
                   doc["alpha"].get<double>() <= 1.0,
               "alpha must lie in (0, 1]");
  config_check(doc["converged"].is_boolean(), "converged must be a boolean");
  config_check(doc["sweeps"].is_number_integer() && doc["sweeps"].get<long long>() >= 0,
               "sweeps must be a nonnegative integer");
  config_check(doc["final_elbo"].is_number(), "final_elbo must be a number");
  config_check(doc["metrics"].is_object(), "metrics must be an object");
  const json& st = doc["state"];
  config_check(st.is_object(), "state must be an object");
  const std::string model = doc["model"].is_string() ? doc["model"].get<std::string>() : "";
  if (model == "gmm") {
    require_shape(st, "mu_tilde", true);
    require_shape(st, "sigma_tilde_sq", false);
    config_check(st["mu_tilde"].size() == st["sigma_tilde_sq"].size(), "K differs across fields");
    for (const auto& v : st["sigma_tilde_sq"]) config_check(v.get<double>() > 0.0, "sigma_tilde_sq must be positive");
  } else if (model == "hdr") {
    for (const char* k : {"mu", "sigma_sq", "phi"}) require_shape(st, k, false);
    const std::size_t d = st["mu"].size();
    config_check(st["sigma_sq"].size() == d && st["phi"].size() == d, "d differs across fields");
    for (const auto& v : st["phi"])
      config_check(v.get<double>() >= 0.0 && v.get<double>() <= 1.0, "phi must lie in [0, 1]");
    for (const auto& v : st["sigma_sq"]) config_check(v.get<double>() > 0.0, "sigma_sq must be positive");
    config_check(st.contains("nu1") && st["nu1"].is_number() && st["nu1"].get<double>() > 0.0,
                 "nu1 must be positive");
  } else if (model == "blm") {
    require_shape(st, "beta_mean", false);
    require_shape(st, "beta_cov", true);
    const std::size_t d = st["beta_mean"].size();
    config_check(st["beta_cov"].size() == d && st["beta_cov"][0].size() == d, "beta_cov must be d x d");
    for (const char* k : {"inv_gamma_shape", "inv_gamma_rate"})
      config_check(st.contains(k) && st[k].is_number() && st[k].get<double>() > 0.0,
                   std::string(k) + " must be positive");
  } else if (model == "lda") {
    require_shape(st, "lambda", true);
    require_shape(st, "gamma", true);
    config_check(st["gamma"][0].size() == st["lambda"].size(), "gamma columns must equal K");
    for (const auto& row : st["lambda"])
      for (const auto& v : row) config_check(v.get<double>() > 0.0, "lambda must be positive");
  } else {
    config_check(false, "state model must be gmm, hdr, blm or lda");
  }
}

} // namespace alphavb
