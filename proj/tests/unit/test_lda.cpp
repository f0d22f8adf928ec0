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

#include <cmath>
#include <sstream>
#include <type_traits>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "alphavb/errors.hpp"
#include "alphavb/lda.hpp"
#include "alphavb/synth.hpp"
#include "oracles/lda_fixed_point.hpp"

using namespace alphavb;

// The gamma and lambda updates take no alpha argument.
static_assert(std::is_same_v<decltype(&update_gamma),
                             Eigen::VectorXd (*)(const LdaDocument&, const Eigen::MatrixXd&, double)>);
static_assert(std::is_same_v<decltype(&m_step),
                             Eigen::MatrixXd (*)(const LdaCorpus&, const std::vector<Eigen::MatrixXd>&,
                                                 std::size_t, double)>);

namespace {

Eigen::MatrixXd random_lambda(CounterRng& rng, int k, int v)
{
  Eigen::MatrixXd l(k, v);
  for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = 0.2 + 3.0 * rng.uniform();
  return l;
}

std::vector<std::vector<double>> rows(const Eigen::MatrixXd& m)
{
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)].push_back(m(r, c));
  return out;
}

LdaEStepOptions tight() { return {1e-13, 100000}; }

} // namespace

TEST_CASE("expected log beta")
{
  Eigen::MatrixXd l(1, 3);
  l << 1.0, 2.0, 3.0;
  const Eigen::MatrixXd e = expected_log_beta(l);
  CHECK(e(0, 1) == doctest::Approx(boost::math::digamma(2.0) - boost::math::digamma(6.0)).epsilon(1e-14));
}

TEST_CASE("symmetric topics give uniform phi")
{
  const Eigen::MatrixXd elog = Eigen::MatrixXd::Constant(3, 5, -1.7);
  const LdaDocument doc{{0, 2}, {3, 1}, {4, 5}};
  const DocEStep r = e_step_doc(doc, elog, Eigen::VectorXd::Constant(3, 2.0), 0.3, 0.8);
  CHECK((r.phi.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
  CHECK((r.gamma.array() - (0.3 + 8.0 / 3.0)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("small alpha flattens the document-topic influence")
{
  CounterRng rng(1);
  const Eigen::MatrixXd elog = expected_log_beta(random_lambda(rng, 3, 6));
  const LdaDocument doc{{1, 1}, {4, 2}};
  Eigen::VectorXd gamma(3);
  gamma << 9.0, 0.5, 2.0;
  // Distance from the pure word-likelihood phi shrinks as alpha drops.
  const Eigen::MatrixXd base = update_phi(doc, elog, Eigen::VectorXd::Ones(3), 1e-12);
  double prev = 1e300;
  for (double a : {1.0, 0.5, 0.1, 0.01}) {
    const double dist = (update_phi(doc, elog, gamma, a) - base).cwiseAbs().maxCoeff();
    CHECK(dist < prev);
    prev = dist;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("document E-step matches the damped fixed-point oracle")
{
  Eigen::MatrixXd elog(2, 2);
  elog << std::log(0.8), std::log(0.2), std::log(0.3), std::log(0.7);
  const LdaDocument doc{{0, 3}, {1, 1}};
  for (double a : {0.3, 0.7, 1.0}) {
    const DocEStep r = e_step_doc(doc, elog, Eigen::VectorXd::Ones(2), 0.5, a, tight());
    const auto fp = oracle::lda_doc_fixed_point({0, 1}, {3, 1}, rows(elog), 0.5, a);
    for (int k = 0; k < 2; ++k) {
      CHECK(r.gamma(k) == doctest::Approx(fp.gamma[static_cast<std::size_t>(k)]).epsilon(1e-6));
      CHECK(r.phi(0, k) == doctest::Approx(fp.phi[0][static_cast<std::size_t>(k)]).epsilon(1e-6));
      CHECK(r.phi(1, k) == doctest::Approx(fp.phi[1][static_cast<std::size_t>(k)]).epsilon(1e-6));
    }
  }

  // D = 1, V = 2, one word.
  const LdaDocument single{{1, 1}};
  const DocEStep s = e_step_doc(single, elog, Eigen::VectorXd::Ones(2), 0.5, 0.9, tight());
  const auto fs = oracle::lda_doc_fixed_point({1}, {1}, rows(elog), 0.5, 0.9);
  CHECK(s.phi(0, 1) == doctest::Approx(fs.phi[0][1]).epsilon(1e-6));
}

TEST_CASE("larger random documents match the oracle")
{
  CounterRng rng(2);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd elog = expected_log_beta(random_lambda(rng, 4, 12));
    LdaDocument doc;
    std::vector<int> words, counts;
    for (int v = 0; v < 12; v += 2) {
      doc.push_back({v, 1 + static_cast<int>(rng.uniform() * 4)});
      words.push_back(v);
      counts.push_back(doc.back().count);
    }
    const double a = 0.2 + 0.8 * rng.uniform();
    const DocEStep r = e_step_doc(doc, elog, Eigen::VectorXd::Ones(4), 0.25, a, tight());
    const auto fp = oracle::lda_doc_fixed_point(words, counts, rows(elog), 0.25, a);
    for (int k = 0; k < 4; ++k) CHECK(r.gamma(k) == doctest::Approx(fp.gamma[static_cast<std::size_t>(k)]).epsilon(1e-6));
  }
}

TEST_CASE("E-step is equivariant under topic relabeling")
{
  CounterRng rng(3);
  const Eigen::MatrixXd elog = expected_log_beta(random_lambda(rng, 3, 8));
  const LdaDocument doc{{0, 2}, {5, 1}, {7, 4}};
  Eigen::VectorXd g0(3);
  g0 << 1.0, 2.0, 0.5;
  const std::vector<int> order{1, 2, 0};
  Eigen::MatrixXd pe(3, 8);
  Eigen::VectorXd pg(3);
  for (int k = 0; k < 3; ++k) {
    pe.row(k) = elog.row(order[k]);
    pg(k) = g0(order[k]);
  }
  const DocEStep a = e_step_doc(doc, elog, g0, 0.3, 0.6);
  const DocEStep b = e_step_doc(doc, pe, pg, 0.3, 0.6);
  for (int k = 0; k < 3; ++k) {
    CHECK(b.gamma(k) == doctest::Approx(a.gamma(order[k])).epsilon(1e-12));
    CHECK((b.phi.col(k) - a.phi.col(order[k])).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gamma and lambda updates are the same code for every alpha")
{
  const LdaDataset ds = generate_lda(LdaSynthParams{}, 4);
  CounterRng rng(5);
  const Eigen::MatrixXd elog = expected_log_beta(random_lambda(rng, 3, 50));
  const LdaDocument& doc = ds.corpus.docs[0];
  for (double a : {0.3, 0.7, 1.0}) {
    const DocEStep r = e_step_doc(doc, elog, Eigen::VectorXd::Ones(3), 1.0 / 3.0, a);
    // The returned gamma is exactly update_gamma of the returned phi.
    const Eigen::VectorXd again = update_gamma(doc, r.phi, 1.0 / 3.0);
    CHECK(again == r.gamma);
  }
}

TEST_CASE("M-step examples")
{
  LdaCorpus corpus;
  corpus.vocabulary_size = 5;
  corpus.docs.push_back({{3, 2}});
  Eigen::MatrixXd phi(1, 2);
  phi << 0.25, 0.75;
  const Eigen::MatrixXd l = m_step(corpus, {phi}, 2, 0.1);
  CHECK(l(0, 3) == doctest::Approx(0.6));
  CHECK(l(1, 3) == doctest::Approx(1.6));
  CHECK(l(0, 0) == 0.1);

  LdaCorpus empty;
  empty.vocabulary_size = 4;
  CHECK((m_step(empty, {}, 3, 0.2).array() == 0.2).all());

  Eigen::MatrixXd first(1, 3);
  first << 1.0, 0.0, 0.0;
  corpus.docs.push_back({{1, 4}});
  const Eigen::MatrixXd m = m_step(corpus, {first, first}, 3, 0.05);
  CHECK((m.bottomRows(2).array() == 0.05).all());
}

TEST_CASE("hyperparameter resolution")
{
  LdaHyper h;
  h.num_topics = 4;
  const LdaHyper r = h.resolved(100);
  CHECK(r.eta_beta == doctest::Approx(0.01));
  CHECK(r.eta_gamma == doctest::Approx(0.25));
  h.c_exponent = 2.0;
  CHECK(h.resolved(10).eta_beta == doctest::Approx(0.01));
  h.num_topics = 1;
  CHECK_THROWS_AS(h.resolved(10), InvalidArgument);
}

TEST_CASE("fit is monotone, valid and recovers synthetic topics")
{
  const LdaDataset ds = generate_lda(LdaSynthParams{}, 11);
  LdaHyper hyper;
  hyper.num_topics = 3;
  for (double a : {0.5, 0.95, 1.0}) {
    AlphaConfig cfg;
    cfg.alpha = a;
    cfg.max_iters = 200;
    const LdaFit fit = fit_lda(ds.corpus, hyper, cfg);
    CHECK(fit.trace.max_decrease() <= 1e-8);
    const LdaHyper r = hyper.resolved(50);
    CHECK(fit.state.lambda.minCoeff() >= r.eta_beta);
    CHECK(fit.state.gamma.minCoeff() >= r.eta_gamma);
    for (const auto& p : fit.state.phi)
      CHECK(((p.rowwise().sum().array() - 1.0).abs() < 1e-10).all());

    const auto perm = greedy_topic_matching(fit.state.lambda, ds.topics);
    for (int k = 0; k < 3; ++k) {
      const auto truth = top_indices(ds.topics.row(k).transpose(), 10);
      const auto got = top_indices(fit.state.lambda.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)])).transpose(), 10);
      int overlap = 0;
      for (auto w : got) overlap += std::count(truth.begin(), truth.end(), w) > 0;
      CHECK(overlap >= 8);
    }
  }
}

TEST_CASE("fit is deterministic")
{
  const LdaDataset ds = generate_lda(LdaSynthParams{}, 12);
  LdaHyper hyper;
  hyper.num_topics = 3;
  AlphaConfig cfg;
  cfg.seed = 3;
  const LdaFit a = fit_lda(ds.corpus, hyper, cfg);
  const LdaFit b = fit_lda(ds.corpus, hyper, cfg);
  CHECK(a.state.lambda == b.state.lambda);
  CHECK(a.trace.values == b.trace.values);
}

TEST_CASE("top indices and matching")
{
  Eigen::VectorXd w(5);
  w << 0.1, 0.5, 0.5, 0.0, 0.9;
  CHECK(top_indices(w, 3) == std::vector<std::size_t>{4, 1, 2});
  Eigen::MatrixXd truth(2, 3), fitted(2, 3);
  truth << 1, 0, 0, 0, 1, 1;
  fitted << 0, 5, 4, 9, 1, 0;
  CHECK(greedy_topic_matching(fitted, truth) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("corpus CSV round trip and validation")
{
  const LdaDataset ds = generate_lda(LdaSynthParams{}, 13);
  std::stringstream ss;
  ds.corpus.write_csv(ss);
  const LdaCorpus back = LdaCorpus::read_csv(ss, ds.corpus.vocabulary_size);
  REQUIRE(back.num_docs() == ds.corpus.num_docs());
  for (std::size_t d = 0; d < back.num_docs(); ++d) {
    REQUIRE(back.docs[d].size() == ds.corpus.docs[d].size());
    for (std::size_t i = 0; i < back.docs[d].size(); ++i) {
      CHECK(back.docs[d][i].word == ds.corpus.docs[d][i].word);
      CHECK(back.docs[d][i].count == ds.corpus.docs[d][i].count);
    }
  }
  std::stringstream bad("doc_id,word_id,count\n0,60,1\n");
  CHECK_THROWS_AS(LdaCorpus::read_csv(bad, 50), InvalidArgument);
  std::stringstream zero("doc_id,word_id,count\n0,1,0\n");
  CHECK_THROWS_AS(LdaCorpus::read_csv(zero, 50), InvalidArgument);
}
