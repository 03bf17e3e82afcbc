// Copyright 2026 The lkg Authors
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

#ifndef LKG_MODEL_HPP_
#define LKG_MODEL_HPP_

// Translation-based retrieval model over the product knowledge graph. A
// purchase is the triple (user, query, item) scored as (u + q) . i where q is
// a learned projection of the mean query-word vector; knowledge-graph triples
// (h, r, t) are scored as (h + r) . t. Both are trained jointly with
// negative sampling.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/embed_store.hpp"
#include "lkg/rng.hpp"

namespace lkg {

struct ModelConfig {
  std::uint32_t alpha = 16;
  std::uint32_t beta = 2;
  ModelKind kind = ModelKind::drem;
  std::uint32_t k = 5;  // negative samples per example
  std::uint32_t batch_size = 64;
  std::uint32_t epochs = 20;
  double initial_lr = 0.5;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  std::uint32_t omega_cap = 64;  // most recent associations per domain
  std::uint32_t threads = 1;     // >1 switches to unsynchronized updates

  void validate() const;
};

struct QueryContext {
  std::vector<double> xbar;  // mean word vector
  std::vector<double> q;     // tanh(W xbar + b)
};

void encode_query(std::span<const std::uint32_t> words,
                  const EmbeddingStore& store, QueryContext& ctx);
std::vector<double> encode_query(std::span<const std::uint32_t> words,
                                 const EmbeddingStore& store);
void encode_query_backward(std::span<const std::uint32_t> words,
                           const EmbeddingStore& store,
                           const QueryContext& ctx, std::span<const double> dq,
                           std::span<double> grad);

double triple_logit(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t);
double purchase_logit(std::span<const double> u, std::span<const double> q,
                      std::span<const double> i);

// Sampling distribution for negative examples: uniform over items for
// purchases, frequency^0.75 over observed tails for graph triples.
class NoiseDistribution {
 public:
  static NoiseDistribution uniform(std::uint32_t n);
  static NoiseDistribution frequency(std::span<const std::uint64_t> counts,
                                     double power = 0.75);
  std::uint32_t sample(Rng& rng) const;
  // Probability of one id (diagnostics and tests).
  double prob(std::uint32_t id) const;
  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

 private:
  std::uint32_t n_ = 0;
  std::vector<double> cum_;  // empty for the uniform kind
};

std::vector<std::uint32_t> sample_negatives(const NoiseDistribution& dist,
                                            std::uint32_t k, Rng& rng);

struct NoiseModel {
  NoiseDistribution purchase_items;
  // Indexed by the tail entity type of the relation: item, brand, category.
  NoiseDistribution tails_item, tails_brand, tails_category;
  const NoiseDistribution& for_relation(Relation r) const;
};

NoiseModel build_noise(const Corpus& corpus);

// One training example: either a purchase record or a knowledge-graph
// triple, with its negative tails already drawn (so the loss is a pure
// function of the parameters).
struct TrainItem {
  bool is_purchase = true;
  std::uint32_t index = 0;  // into corpus.purchases or corpus.triples
  std::vector<std::uint32_t> negatives;
};

// Purchases of the train split followed by graph triples. search_purchase
// triples are skipped: without a query string they cannot be scored.
std::vector<TrainItem> build_stream(const Corpus& corpus);

void fill_negatives(const Corpus& corpus, const NoiseModel& noise,
                    std::uint32_t k, Rng& rng, std::span<TrainItem> items);

// Mean negated log likelihood of the batch under negative sampling, with
// d(loss)/d(parameters) written into grad (which is zeroed first).
double loss_and_grad(const Corpus& corpus, const EmbeddingStore& store,
                     const ModelConfig& config,
                     std::span<const TrainItem> items, std::span<double> grad);

struct EpochLog {
  std::uint32_t epoch;
  double mean_loss;
  double lr;
  double wall_seconds;
};

struct TrainResult {
  EmbeddingStore store;
  std::vector<EpochLog> log;
  bool diverged = false;
};

TrainResult train(const Corpus& corpus, const ModelConfig& config);

// CSV: epoch,mean_loss,lr,wall_seconds (one leading comment line records the
// execution mode).
void write_training_log(const std::vector<EpochLog>& log,
                        const std::string& mode, const std::string& path);

// The ranking vector u + q: the user table row for the vanilla kind, the
// gated-network pool for drem_hgn (trace optionally captured).
std::vector<double> intent_vector(std::uint32_t user,
                                  std::span<const std::uint32_t> words,
                                  const Corpus& corpus,
                                  const EmbeddingStore& store,
                                  std::uint32_t omega_cap,
                                  struct AttentionTrace* trace_out = nullptr);

}  // namespace lkg

#endif  // LKG_MODEL_HPP_
