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

#include "lkg/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lkg/hgn.hpp"
#include "lkg/synth.hpp"

namespace {

namespace fs = std::filesystem;

// A deterministic small corpus for gradient and training tests.
lkg::Corpus small_synth_corpus(std::uint64_t seed = 3) {
  fs::path dir = fs::temp_directory_path() / "lkg_model_tests";
  fs::create_directories(dir);
  lkg::SynthSpec spec;
  spec.users = 8;
  spec.items = 12;
  spec.brands = 2;
  spec.categories = 2;
  spec.queries = 6;
  spec.queries_per_user = 3;
  auto t = (dir / "triples.tsv").string();
  auto p = (dir / "purchases.tsv").string();
  auto g = (dir / "truth.jsonl").string();
  lkg::generate_synthetic(spec, seed, t, p, g);
  lkg::Corpus c = lkg::build_corpus(t, p);
  lkg::split_corpus(c, 0.3, seed);
  return c;
}

// Mixed batch: a few purchases and a few graph triples with negatives drawn.
std::vector<lkg::TrainItem> mixed_batch(const lkg::Corpus& c, std::uint32_t k,
                                        std::uint64_t seed) {
  auto stream = lkg::build_stream(c);
  auto noise = lkg::build_noise(c);
  lkg::Rng rng(seed);
  lkg::fill_negatives(c, noise, k, rng, stream);
  std::size_t first_triple = 0;
  while (first_triple < stream.size() && stream[first_triple].is_purchase) {
    ++first_triple;
  }
  REQUIRE(first_triple > 0);
  REQUIRE(first_triple < stream.size());
  std::vector<lkg::TrainItem> batch;
  for (std::size_t i = 0; i < 3 && i < first_triple; ++i) {
    batch.push_back(stream[i]);
  }
  for (std::size_t i = first_triple;
       i < stream.size() && batch.size() < 6; ++i) {
    batch.push_back(stream[i]);
  }
  return batch;
}

double max_fd_error(const lkg::Corpus& c, lkg::EmbeddingStore& st,
                    const lkg::ModelConfig& cfg,
                    std::span<const lkg::TrainItem> batch) {
  std::vector<double> grad(st.size());
  lkg::loss_and_grad(c, st, cfg, batch, grad);
  std::vector<double> scratch(st.size());
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    const double orig = st.values()[i];
    st.values()[i] = orig + h;
    const double fp = lkg::loss_and_grad(c, st, cfg, batch, scratch);
    st.values()[i] = orig - h;
    const double fm = lkg::loss_and_grad(c, st, cfg, batch, scratch);
    st.values()[i] = orig;
    const double num = (fp - fm) / (2.0 * h);
    const double rel = std::abs(grad[i] - num) /
                       std::max(std::abs(grad[i]) + std::abs(num), 1e-3);
    worst = std::max(worst, rel);
  }
  return worst;
}

lkg::EmbeddingStore wide_init(const lkg::Corpus& c, const lkg::ModelConfig& cfg,
                              std::uint64_t seed) {
  auto st = lkg::EmbeddingStore::init(
      lkg::spec_for(c, cfg.alpha, cfg.beta, cfg.kind), seed);
  for (double& v : st.values()) v *= static_cast<double>(cfg.alpha);
  return st;
}

}  // namespace

TEST_CASE("query encoding reduces to tanh of the projected word mean") {
  lkg::Corpus c = small_synth_corpus();
  lkg::ModelConfig cfg;
  cfg.alpha = 4;
  cfg.kind = lkg::ModelKind::drem;
  lkg::EmbeddingStore st(lkg::spec_for(c, 4, 1, cfg.kind));

  std::vector<std::uint32_t> one = {0};
  auto q0 = lkg::encode_query(one, st);
  for (double v : q0) CHECK(v == 0.0);  // all parameters zero

  // Identity projection: q = tanh(word vector).
  for (std::uint32_t i = 0; i < 4; ++i) st.query_w()[i * 4 + i] = 1.0;
  double wv[4] = {0.5, -1.0, 2.0, 0.0};
  for (int i = 0; i < 4; ++i) st.word_vec(0)[i] = wv[i];
  auto q1 = lkg::encode_query(one, st);
  for (int i = 0; i < 4; ++i) {
    CHECK(q1[i] == doctest::Approx(std::tanh(wv[i])).epsilon(1e-15));
  }

  // Two words average before the projection.
  double wv2[4] = {1.0, 1.0, -2.0, 0.5};
  for (int i = 0; i < 4; ++i) st.word_vec(1)[i] = wv2[i];
  std::vector<std::uint32_t> two = {0, 1};
  auto q2 = lkg::encode_query(two, st);
  for (int i = 0; i < 4; ++i) {
    CHECK(q2[i] ==
          doctest::Approx(std::tanh(0.5 * (wv[i] + wv2[i]))).epsilon(1e-15));
  }

  // The bias shifts the preactivation.
  st.query_b()[0] = 0.25;
  auto q3 = lkg::encode_query(one, st);
  CHECK(q3[0] == doctest::Approx(std::tanh(wv[0] + 0.25)).epsilon(1e-15));

  // Empty word list: q = tanh(b).
  std::vector<std::uint32_t> empty;
  auto q4 = lkg::encode_query(empty, st);
  CHECK(q4[0] == doctest::Approx(std::tanh(0.25)).epsilon(1e-15));
  for (int i = 1; i < 4; ++i) CHECK(q4[i] == 0.0);
}

TEST_CASE("translation logits are plain dot products") {
  std::vector<double> h = {1.0, 0.0};
  std::vector<double> r = {0.0, 1.0};
  std::vector<double> t = {1.0, 1.0};
  CHECK(lkg::triple_logit(h, r, t) == 2.0);
  std::vector<double> neg = {-1.0, 0.0};
  CHECK(lkg::triple_logit(h, neg, t) == 0.0);
  CHECK(lkg::purchase_logit(h, r, t) == 2.0);
}

TEST_CASE("noise distributions match their closed forms") {
  lkg::Rng rng(42);

  auto uni = lkg::NoiseDistribution::uniform(4);
  CHECK(uni.prob(2) == doctest::Approx(0.25));
  std::array<int, 4> counts = {0, 0, 0, 0};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[uni.sample(rng)]++;
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(counts[i] / double(draws) - 0.25) < 0.01);
  }

  // Smoothed power law: p(a)/p(b) = (8/1)^0.75.
  std::vector<std::uint64_t> freq = {8, 1};
  auto pow_dist = lkg::NoiseDistribution::frequency(freq);
  const double want_ratio = 4.7568284600108841;  // 8^0.75
  CHECK(pow_dist.prob(0) / pow_dist.prob(1) ==
        doctest::Approx(want_ratio).epsilon(1e-12));
  int a = 0;
  int b = 0;
  for (int i = 0; i < draws; ++i) (pow_dist.sample(rng) == 0 ? a : b)++;
  CHECK(std::abs(double(a) / double(b) - want_ratio) < 0.05 * want_ratio);

  // Degenerate single-outcome distribution.
  std::vector<std::uint64_t> single = {7};
  auto s = lkg::NoiseDistribution::frequency(single);
  CHECK(s.prob(0) == doctest::Approx(1.0));
  for (int i = 0; i < 10; ++i) CHECK(s.sample(rng) == 0);

  // Unseen ids carry zero probability and are never drawn.
  std::vector<std::uint64_t> gap = {5, 0, 3};
  auto g = lkg::NoiseDistribution::frequency(gap);
  CHECK(g.prob(1) == 0.0);
  for (int i = 0; i < 1000; ++i) CHECK(g.sample(rng) != 1);

  std::vector<std::uint64_t> none = {0, 0};
  CHECK_THROWS_AS(lkg::NoiseDistribution::frequency(none), std::invalid_argument);

  auto negs = lkg::sample_negatives(uni, 5, rng);
  CHECK(negs.size() == 5);
  for (auto id : negs) CHECK(id < 4);
}

TEST_CASE("the training stream is train purchases then graph triples") {
  lkg::Corpus c = small_synth_corpus();
  auto stream = lkg::build_stream(c);
  std::size_t n_train = 0;
  for (const auto& p : c.purchases) {
    if (p.split == lkg::Split::train) ++n_train;
  }
  std::size_t n_graph = 0;
  for (const auto& t : c.triples) {
    if (t.rel != lkg::Relation::search_purchase) ++n_graph;
  }
  REQUIRE(stream.size() == n_train + n_graph);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    CHECK(stream[i].is_purchase == (i < n_train));
    if (i < n_train) {
      CHECK(c.purchases[stream[i].index].split == lkg::Split::train);
    } else {
      CHECK(c.triples[stream[i].index].rel !=
            lkg::Relation::search_purchase);
    }
  }

  auto noise = lkg::build_noise(c);
  CHECK(noise.purchase_items.size() == c.items.size());
  CHECK(&noise.for_relation(lkg::Relation::also_bought) == &noise.tails_item);
  CHECK(&noise.for_relation(lkg::Relation::brand) == &noise.tails_brand);
  CHECK(&noise.for_relation(lkg::Relation::category) == &noise.tails_category);

  lkg::Rng rng(1);
  lkg::fill_negatives(c, noise, 3, rng, stream);
  for (const auto& it : stream) CHECK(it.negatives.size() == 3);
}

TEST_CASE("loss on an all-zero store is (k+1) ln 2 per slot") {
  lkg::Corpus c = small_synth_corpus();
  for (auto kind : {lkg::ModelKind::drem, lkg::ModelKind::drem_hgn}) {
    lkg::ModelConfig cfg;
    cfg.alpha = 4;
    cfg.beta = 2;
    cfg.kind = kind;
    cfg.k = 1;
    lkg::EmbeddingStore st(lkg::spec_for(c, cfg.alpha, cfg.beta, kind));
    auto batch = mixed_batch(c, cfg.k, 7);
    std::vector<double> grad(st.size());
    double loss = lkg::loss_and_grad(c, st, cfg, batch, grad);
    // Every logit is zero, so each positive and each negative contributes
    // softplus(0) = ln 2.
    CHECK(loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("identically embedded items receive identical gradients") {
  lkg::Corpus c = small_synth_corpus();
  lkg::ModelConfig cfg;
  cfg.alpha = 4;
  cfg.kind = lkg::ModelKind::drem;
  cfg.k = 2;
  auto st = wide_init(c, cfg, 11);

  // One purchase of item A with negatives {B, B}; make B's row equal A's.
  auto stream = lkg::build_stream(c);
  lkg::TrainItem item = stream.front();
  REQUIRE(item.is_purchase);
  const auto& rec = c.purchases[item.index];
  std::uint32_t other = (rec.item + 1) % c.items.size();
  item.negatives = {other, other};
  std::copy(st.item_vec(rec.item).begin(), st.item_vec(rec.item).end(),
            st.item_vec(other).begin());

  std::vector<double> grad(st.size());
  std::vector<lkg::TrainItem> batch = {item};
  lkg::loss_and_grad(c, st, cfg, batch, grad);

  // s+ == s-, so coef+ = sigma(s)-1 and each negative has coef- = sigma(s);
  // the positive row gradient must equal -(1/2) of the shared negative row's.
  auto off_a = st.offset_entity(lkg::EntityType::item, rec.item);
  auto off_b = st.offset_entity(lkg::EntityType::item, other);
  double s = lkg::purchase_logit(st.user_vec(rec.user),
                                 lkg::encode_query(rec.query_words, st),
                                 st.item_vec(rec.item));
  double sig = 1.0 / (1.0 + std::exp(-s));
  for (std::uint32_t d = 0; d < 4; ++d) {
    double ga = grad[off_a + d];
    double gb = grad[off_b + d];
    CHECK(gb == doctest::Approx(-ga * 2.0 * sig / (1.0 - sig)).epsilon(1e-9));
  }
}

TEST_CASE("analytic gradients agree with central differences") {
  lkg::Corpus c = small_synth_corpus();

  SUBCASE("vanilla translation model") {
    lkg::ModelConfig cfg;
    cfg.alpha = 4;
    cfg.beta = 1;
    cfg.kind = lkg::ModelKind::drem;
    cfg.k = 2;
    auto st = wide_init(c, cfg, 21);
    auto batch = mixed_batch(c, cfg.k, 31);
    CHECK(max_fd_error(c, st, cfg, batch) < 1e-4);
  }

  SUBCASE("gated network, beta 1") {
    lkg::ModelConfig cfg;
    cfg.alpha = 4;
    cfg.beta = 1;
    cfg.kind = lkg::ModelKind::drem_hgn;
    cfg.k = 2;
    auto st = wide_init(c, cfg, 22);
    auto batch = mixed_batch(c, cfg.k, 32);
    CHECK(max_fd_error(c, st, cfg, batch) < 1e-4);
  }

  SUBCASE("gated network, beta 2, wider") {
    lkg::ModelConfig cfg;
    cfg.alpha = 8;
    cfg.beta = 2;
    cfg.kind = lkg::ModelKind::drem_hgn;
    cfg.k = 1;
    auto st = wide_init(c, cfg, 23);
    auto batch = mixed_batch(c, cfg.k, 33);
    CHECK(max_fd_error(c, st, cfg, batch) < 1e-4);
  }
}

TEST_CASE("training runs, logs, converges a little, and is deterministic") {
  lkg::Corpus c = small_synth_corpus();
  lkg::ModelConfig cfg;
  cfg.alpha = 8;
  cfg.beta = 1;
  cfg.kind = lkg::ModelKind::drem;
  cfg.k = 2;
  cfg.batch_size = 8;
  cfg.epochs = 3;
  cfg.initial_lr = 0.2;
  cfg.seed = 13;

  auto r1 = lkg::train(c, cfg);
  CHECK_FALSE(r1.diverged);
  REQUIRE(r1.log.size() == cfg.epochs);
  for (const auto& e : r1.log) {
    CHECK(std::isfinite(e.mean_loss));
    CHECK(e.lr > 0.0);
  }
  CHECK(r1.log.back().mean_loss < r1.log.front().mean_loss);

  auto r2 = lkg::train(c, cfg);
  REQUIRE(r2.store.size() == r1.store.size());
  for (std::size_t i = 0; i < r1.store.size(); ++i) {
    CHECK(r1.store.values()[i] == r2.store.values()[i]);
  }

  fs::path dir = fs::temp_directory_path() / "lkg_model_tests";
  auto log_path = (dir / "train.log").string();
  lkg::write_training_log(r1.log, "single", log_path);
  std::ifstream in(log_path, std::ios::binary);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "# mode=single");
  REQUIRE(std::getline(in, line));
  CHECK(line == "epoch,mean_loss,lr,wall_seconds");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == cfg.epochs);

  // The gated variant also trains without blowing up.
  cfg.kind = lkg::ModelKind::drem_hgn;
  cfg.beta = 2;
  cfg.epochs = 2;
  auto r3 = lkg::train(c, cfg);
  CHECK_FALSE(r3.diverged);
  for (const auto& e : r3.log) CHECK(std::isfinite(e.mean_loss));
}

TEST_CASE("the intent vector is the user row plus the encoded query") {
  lkg::Corpus c = small_synth_corpus();
  lkg::ModelConfig cfg;
  cfg.alpha = 4;
  cfg.kind = lkg::ModelKind::drem;
  auto st = wide_init(c, cfg, 17);
  std::vector<std::uint32_t> words = {0, 1};
  auto intent = lkg::intent_vector(0, words, c, st, 64);
  auto q = lkg::encode_query(words, st);
  for (int i = 0; i < 4; ++i) {
    CHECK(intent[i] ==
          doctest::Approx(st.user_vec(0)[i] + q[i]).epsilon(1e-15));
  }

  // For the gated kind the trace is populated on request.
  lkg::ModelConfig hcfg;
  hcfg.alpha = 4;
  hcfg.beta = 2;
  hcfg.kind = lkg::ModelKind::drem_hgn;
  auto hst = wide_init(c, hcfg, 18);
  lkg::AttentionTrace trace;
  auto hi = lkg::intent_vector(0, words, c, hst, 64, &trace);
  CHECK(hi.size() == 4);
  double s = trace.top_zero;
  for (int d = 0; d < lkg::kDomains; ++d) s += trace.domain_w[d];
  CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}
