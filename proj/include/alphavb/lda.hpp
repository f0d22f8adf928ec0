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
#ifndef ALPHAVB_LDA_HPP
#define ALPHAVB_LDA_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alphavb/objective.hpp"

namespace alphavb {

struct WordCount
{
  int word = 0;
  int count = 0;
};

using LdaDocument = std::vector<WordCount>;

/// Bag-of-words corpus. Each document lists distinct words with counts.
struct LdaCorpus
{
  std::size_t vocabulary_size = 0;
  std::vector<LdaDocument> docs;

  std::size_t num_docs() const noexcept { return docs.size(); }
  void validate() const;

  /// CSV triplets `doc_id,word_id,count` with a header row. Documents are
  /// numbered 0..D-1; ids absent from the file become empty documents.
  static LdaCorpus read_csv(std::istream& in, std::size_t vocabulary_size);
  void write_csv(std::ostream& out) const;
};

struct LdaHyper
{
  std::size_t num_topics = 2;
  double eta_beta = 0.0;  // 0 means 1/V
  double eta_gamma = 0.0; // 0 means 1/K
  /// When set, eta_beta = 1/V^c and eta_gamma = 1/K^c.
  std::optional<double> c_exponent;

  /// Resolves defaults against the vocabulary size; throws on invalid values.
  LdaHyper resolved(std::size_t vocabulary_size) const;
};

struct LdaVariationalState
{
  Eigen::MatrixXd lambda; // K x V
  Eigen::MatrixXd gamma;  // D x K
  /// Per document: (distinct words) x K, rows on the simplex.
  std::vector<Eigen::MatrixXd> phi;
};

struct LdaEStepOptions
{
  double gamma_tol = 1e-5;
  int max_inner = 100;
};

struct DocEStep
{
  Eigen::MatrixXd phi;
  Eigen::VectorXd gamma;
  int inner_iters = 0;
};

/// psi(lambda_kv) - psi(sum_v lambda_kv).
Eigen::MatrixXd expected_log_beta(const Eigen::MatrixXd& lambda);

/// phi_nk proportional to exp{E log beta_{k, w_n} + alpha (psi(gamma_k) - psi(sum gamma))}.
Eigen::MatrixXd update_phi(const LdaDocument& doc, const Eigen::MatrixXd& elog_beta,
                           const Eigen::VectorXd& gamma, double alpha);

/// gamma_k = eta_gamma + sum_n count_n phi_nk. Independent of alpha.
Eigen::VectorXd update_gamma(const LdaDocument& doc, const Eigen::MatrixXd& phi,
                             double eta_gamma);

/// Alternates update_phi / update_gamma until max |delta gamma| < gamma_tol.
DocEStep e_step_doc(const LdaDocument& doc, const Eigen::MatrixXd& elog_beta,
                    const Eigen::VectorXd& gamma_init, double eta_gamma, double alpha,
                    const LdaEStepOptions& options = {});

/// lambda_kv = eta_beta + sum over documents of count * phi. Independent of alpha.
Eigen::MatrixXd m_step(const LdaCorpus& corpus, const std::vector<Eigen::MatrixXd>& phi,
                       std::size_t num_topics, double eta_beta);

/// E log p(w | z, beta) + H(q_z) + alpha [E log p(z | theta) + E log p(theta) - E log q(theta)]
///   + E log p(beta) - E log q(beta).
/// Every update above is an exact coordinate maximizer of this quantity.
double lda_objective(const LdaCorpus& corpus, const LdaVariationalState& state,
                     const LdaHyper& hyper, double alpha);

struct LdaFit
{
  LdaVariationalState state;
  ElboTrace trace;
};

/// lambda starts at 1 + U(0, 1) (seeded), gamma at eta_gamma + N_d / K.
LdaFit fit_lda(const LdaCorpus& corpus, const LdaHyper& hyper, const AlphaConfig& cfg,
               const LdaEStepOptions& options = {});

/// Indices of the n largest entries, largest first (ties broken by index).
std::vector<std::size_t> top_indices(const Eigen::VectorXd& weights, std::size_t n);

/// Greedy matching on total-variation distance between normalized rows.
/// Returns perm with fitted row perm[k] assigned to true row k.
std::vector<std::size_t> greedy_topic_matching(const Eigen::MatrixXd& fitted,
                                               const Eigen::MatrixXd& truth);

} // namespace alphavb

#endif
