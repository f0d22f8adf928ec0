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
#include "alphavb/lda.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "alphavb/errors.hpp"
#include "alphavb/numeric.hpp"
#include "alphavb/rng.hpp"

namespace alphavb {

void LdaCorpus::validate() const
{
  require(vocabulary_size >= 1, "vocabulary is empty");
  for (const auto& doc : docs)
    for (const auto& wc : doc) {
      require(wc.word >= 0 && static_cast<std::size_t>(wc.word) < vocabulary_size,
              "word id outside [0, V)");
      require(wc.count >= 1, "word counts must be at least 1");
    }
}

LdaCorpus LdaCorpus::read_csv(std::istream& in, std::size_t vocabulary_size)
{
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("corpus file is empty");
  std::map<long, std::map<int, int>> rows;
  int max_word = -1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    long doc = 0;
    int word = 0, count = 0;
    char c1 = 0, c2 = 0;
    if (!(ss >> doc >> c1 >> word >> c2 >> count) || c1 != ',' || c2 != ',')
      throw InvalidArgument("malformed corpus line " + std::to_string(lineno));
    require(doc >= 0 && word >= 0 && count >= 1,
            "invalid corpus entry on line " + std::to_string(lineno));
    rows[doc][word] += count;
    max_word = std::max(max_word, word);
  }
  LdaCorpus corpus;
  corpus.vocabulary_size =
      vocabulary_size > 0 ? vocabulary_size : static_cast<std::size_t>(max_word + 1);
  const std::size_t num_docs = rows.empty() ? 0 : static_cast<std::size_t>(rows.rbegin()->first + 1);
  corpus.docs.resize(num_docs);
  for (const auto& [doc, words] : rows)
    for (const auto& [word, count] : words)
      corpus.docs[static_cast<std::size_t>(doc)].push_back({word, count});
  corpus.validate();
  return corpus;
}

void LdaCorpus::write_csv(std::ostream& out) const
{
  out << "doc_id,word_id,count\n";
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& wc : docs[d]) out << d << ',' << wc.word << ',' << wc.count << '\n';
}

LdaHyper LdaHyper::resolved(std::size_t vocabulary_size) const
{
  require(num_topics >= 2, "LDA needs K >= 2");
  require(vocabulary_size >= 1, "vocabulary is empty");
  LdaHyper h = *this;
  const double k = static_cast<double>(num_topics);
  const double v = static_cast<double>(vocabulary_size);
  if (c_exponent) {
    require(*c_exponent > 1.0, "c_exponent must exceed 1");
    h.eta_beta = std::pow(v, -*c_exponent);
    h.eta_gamma = std::pow(k, -*c_exponent);
  } else {
    if (h.eta_beta == 0.0) h.eta_beta = 1.0 / v;
    if (h.eta_gamma == 0.0) h.eta_gamma = 1.0 / k;
  }
  require(h.eta_beta > 0.0 && h.eta_gamma > 0.0, "Dirichlet hyperparameters must be positive");
  return h;
}

Eigen::MatrixXd expected_log_beta(const Eigen::MatrixXd& lambda)
{
  Eigen::MatrixXd out(lambda.rows(), lambda.cols());
  for (Eigen::Index k = 0; k < lambda.rows(); ++k) {
    const double total = digamma(lambda.row(k).sum());
    for (Eigen::Index v = 0; v < lambda.cols(); ++v) out(k, v) = digamma(lambda(k, v)) - total;
  }
  return out;
}

namespace {

Eigen::VectorXd expected_log_theta(const Eigen::VectorXd& gamma)
{
  const double total = digamma(gamma.sum());
  Eigen::VectorXd out(gamma.size());
  for (Eigen::Index k = 0; k < gamma.size(); ++k) out(k) = digamma(gamma(k)) - total;
  return out;
}

// E_{Dir(q)} log Dir(x; a) given E log x.
double expected_log_dirichlet(const Eigen::VectorXd& a, const Eigen::VectorXd& elog)
{
  using boost::math::lgamma;
  double v = lgamma(a.sum());
  for (Eigen::Index k = 0; k < a.size(); ++k) v += -lgamma(a(k)) + (a(k) - 1.0) * elog(k);
  return v;
}

} // namespace

Eigen::MatrixXd update_phi(const LdaDocument& doc, const Eigen::MatrixXd& elog_beta,
                           const Eigen::VectorXd& gamma, double alpha)
{
  const Eigen::Index k = elog_beta.rows();
  if (gamma.size() != k) throw DimensionMismatch("gamma length differs from K");
  const Eigen::VectorXd elog_theta = expected_log_theta(gamma);
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(doc.size()), k);
  std::vector<double> row(static_cast<std::size_t>(k));
  for (std::size_t n = 0; n < doc.size(); ++n) {
    for (Eigen::Index j = 0; j < k; ++j)
      row[static_cast<std::size_t>(j)] = elog_beta(j, doc[n].word) + alpha * elog_theta(j);
    normalize_log_weights(row);
    for (Eigen::Index j = 0; j < k; ++j)
      phi(static_cast<Eigen::Index>(n), j) = row[static_cast<std::size_t>(j)];
  }
  return phi;
}

Eigen::VectorXd update_gamma(const LdaDocument& doc, const Eigen::MatrixXd& phi,
                             double eta_gamma)
{
  Eigen::VectorXd gamma = Eigen::VectorXd::Constant(phi.cols(), eta_gamma);
  for (std::size_t n = 0; n < doc.size(); ++n)
    gamma += static_cast<double>(doc[n].count) * phi.row(static_cast<Eigen::Index>(n)).transpose();
  return gamma;
}

DocEStep e_step_doc(const LdaDocument& doc, const Eigen::MatrixXd& elog_beta,
                    const Eigen::VectorXd& gamma_init, double eta_gamma, double alpha,
                    const LdaEStepOptions& options)
{
  DocEStep out;
  out.gamma = gamma_init;
  for (int it = 0; it < options.max_inner; ++it) {
    out.phi = update_phi(doc, elog_beta, out.gamma, alpha);
    Eigen::VectorXd next = update_gamma(doc, out.phi, eta_gamma);
    const double change = (next - out.gamma).cwiseAbs().maxCoeff();
    out.gamma = std::move(next);
    out.inner_iters = it + 1;
    if (change < options.gamma_tol) break;
  }
  return out;
}

Eigen::MatrixXd m_step(const LdaCorpus& corpus, const std::vector<Eigen::MatrixXd>& phi,
                       std::size_t num_topics, double eta_beta)
{
  if (phi.size() != corpus.docs.size()) throw DimensionMismatch("need one phi block per document");
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(num_topics),
                                                     static_cast<Eigen::Index>(corpus.vocabulary_size),
                                                     eta_beta);
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    const auto& doc = corpus.docs[d];
    for (std::size_t n = 0; n < doc.size(); ++n)
      lambda.col(doc[n].word) +=
          static_cast<double>(doc[n].count) * phi[d].row(static_cast<Eigen::Index>(n)).transpose();
  }
  return lambda;
}

double lda_objective(const LdaCorpus& corpus, const LdaVariationalState& state,
                     const LdaHyper& hyper, double alpha)
{
  const Eigen::Index k = state.lambda.rows();
  const Eigen::MatrixXd elog_beta = expected_log_beta(state.lambda);
  double words = 0.0, theta_part = 0.0;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    const auto& doc = corpus.docs[d];
    const Eigen::VectorXd gamma = state.gamma.row(static_cast<Eigen::Index>(d)).transpose();
    const Eigen::VectorXd elog_theta = expected_log_theta(gamma);
    for (std::size_t n = 0; n < doc.size(); ++n) {
      const double c = static_cast<double>(doc[n].count);
      for (Eigen::Index j = 0; j < k; ++j) {
        const double p = state.phi[d](static_cast<Eigen::Index>(n), j);
        words += c * (p * elog_beta(j, doc[n].word) - xlogx(p));
        theta_part += c * p * elog_theta(j);
      }
    }
    theta_part += expected_log_dirichlet(Eigen::VectorXd::Constant(k, hyper.eta_gamma), elog_theta) -
                  expected_log_dirichlet(gamma, elog_theta);
  }
  double beta_part = 0.0;
  const Eigen::VectorXd prior_row = Eigen::VectorXd::Constant(state.lambda.cols(), hyper.eta_beta);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::VectorXd elog = elog_beta.row(j).transpose();
    beta_part += expected_log_dirichlet(prior_row, elog) -
                 expected_log_dirichlet(state.lambda.row(j).transpose(), elog);
  }
  return words + alpha * theta_part + beta_part;
}

LdaFit fit_lda(const LdaCorpus& corpus, const LdaHyper& hyper_in, const AlphaConfig& cfg,
               const LdaEStepOptions& options)
{
  cfg.validate();
  corpus.validate();
  require(corpus.num_docs() >= 1, "corpus has no documents");
  const LdaHyper hyper = hyper_in.resolved(corpus.vocabulary_size);
  const auto k = static_cast<Eigen::Index>(hyper.num_topics);
  const auto v = static_cast<Eigen::Index>(corpus.vocabulary_size);
  const auto num_docs = static_cast<Eigen::Index>(corpus.num_docs());

  LdaFit fit;
  auto& s = fit.state;
  CounterRng rng(cfg.seed, 0x6c6461);
  s.lambda.resize(k, v);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index w = 0; w < v; ++w) s.lambda(j, w) = 1.0 + rng.uniform();
  s.gamma.resize(num_docs, k);
  for (Eigen::Index d = 0; d < num_docs; ++d) {
    double total = 0.0;
    for (const auto& wc : corpus.docs[static_cast<std::size_t>(d)]) total += wc.count;
    s.gamma.row(d).setConstant(hyper.eta_gamma + total / static_cast<double>(k));
  }
  s.phi.resize(corpus.num_docs());

  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::MatrixXd elog_beta = expected_log_beta(s.lambda);
    for (Eigen::Index d = 0; d < num_docs; ++d) {
      const auto& doc = corpus.docs[static_cast<std::size_t>(d)];
      DocEStep e = e_step_doc(doc, elog_beta, s.gamma.row(d).transpose(), hyper.eta_gamma,
                              cfg.alpha, options);
      s.gamma.row(d) = e.gamma.transpose();
      s.phi[static_cast<std::size_t>(d)] = std::move(e.phi);
    }
    s.lambda = m_step(corpus, s.phi, hyper.num_topics, hyper.eta_beta);
    if (fit.trace.push(lda_objective(corpus, s, hyper, cfg.alpha), cfg.elbo_tol)) break;
  }
  return fit;
}

std::vector<std::size_t> top_indices(const Eigen::VectorXd& weights, std::size_t n)
{
  std::vector<std::size_t> idx(static_cast<std::size_t>(weights.size()));
  std::iota(idx.begin(), idx.end(), 0);
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double wa = weights(static_cast<Eigen::Index>(a));
                      const double wb = weights(static_cast<Eigen::Index>(b));
                      return wa > wb || (wa == wb && a < b);
                    });
  idx.resize(n);
  return idx;
}

std::vector<std::size_t> greedy_topic_matching(const Eigen::MatrixXd& fitted,
                                               const Eigen::MatrixXd& truth)
{
  if (fitted.rows() != truth.rows() || fitted.cols() != truth.cols())
    throw DimensionMismatch("fitted and true topic matrices differ in shape");
  const Eigen::Index k = truth.rows();
  Eigen::MatrixXd tv(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c)
      tv(r, c) = 0.5 * (fitted.row(r) / fitted.row(r).sum() - truth.row(c) / truth.row(c).sum())
                           .cwiseAbs()
                           .sum();
  std::vector<std::size_t> perm(static_cast<std::size_t>(k));
  std::vector<char> row_used(static_cast<std::size_t>(k), 0), col_used(static_cast<std::size_t>(k), 0);
  for (Eigen::Index step = 0; step < k; ++step) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index br = 0, bc = 0;
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c)
        if (!row_used[static_cast<std::size_t>(r)] && !col_used[static_cast<std::size_t>(c)] &&
            tv(r, c) < best) {
          best = tv(r, c);
          br = r;
          bc = c;
        }
    row_used[static_cast<std::size_t>(br)] = 1;
    col_used[static_cast<std::size_t>(bc)] = 1;
    perm[static_cast<std::size_t>(bc)] = static_cast<std::size_t>(br);
  }
  return perm;
}

} // namespace alphavb
