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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "lkg/hgn.hpp"
#include "lkg/kernels.hpp"

namespace lkg {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln(1 + e^x), overflow-safe. -ln sigmoid(s) = softplus(-s).
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

void ModelConfig::validate() const {
  if (alpha < 1) throw std::invalid_argument("alpha must be >= 1");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (kind == ModelKind::drem_hgn && beta < 1) {
    throw std::invalid_argument("beta must be >= 1");
  }
  if (!(initial_lr > 0.0)) throw std::invalid_argument("initial_lr must be > 0");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be > 0");
}

void encode_query(std::span<const std::uint32_t> words,
                  const EmbeddingStore& store, QueryContext& ctx) {
  const std::size_t a = store.alpha();
  ctx.xbar.assign(a, 0.0);
  if (!words.empty()) {
    const double inv = 1.0 / static_cast<double>(words.size());
    for (std::uint32_t w : words) kernels::axpy(inv, store.word_vec(w), ctx.xbar);
  }
  ctx.q.resize(a);
  auto w = store.query_w();
  auto b = store.query_b();
  for (std::size_t r = 0; r < a; ++r) {
    ctx.q[r] = std::tanh(kernels::dot(w.subspan(r * a, a), ctx.xbar) + b[r]);
  }
}

std::vector<double> encode_query(std::span<const std::uint32_t> words,
                                 const EmbeddingStore& store) {
  QueryContext ctx;
  encode_query(words, store, ctx);
  return std::move(ctx.q);
}

void encode_query_backward(std::span<const std::uint32_t> words,
                           const EmbeddingStore& store,
                           const QueryContext& ctx, std::span<const double> dq,
                           std::span<double> grad) {
  const std::size_t a = store.alpha();
  auto w = store.query_w();
  auto g_w = grad.subspan(store.offset_query_w(), a * a);
  auto g_b = grad.subspan(store.offset_query_b(), a);
  std::vector<double> dxbar(a, 0.0);
  for (std::size_t r = 0; r < a; ++r) {
    const double dz = dq[r] * (1.0 - ctx.q[r] * ctx.q[r]);
    if (dz == 0.0) continue;
    g_b[r] += dz;
    kernels::axpy(dz, ctx.xbar, g_w.subspan(r * a, a));
    kernels::axpy(dz, w.subspan(r * a, a), dxbar);
  }
  if (!words.empty()) {
    const double inv = 1.0 / static_cast<double>(words.size());
    for (std::uint32_t wid : words) {
      kernels::axpy(inv, dxbar, grad.subspan(store.offset_word(wid), a));
    }
  }
}

double triple_logit(std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += (h[i] + r[i]) * t[i];
  return s;
}

double purchase_logit(std::span<const double> u, std::span<const double> q,
                      std::span<const double> i) {
  return triple_logit(u, q, i);
}

NoiseDistribution NoiseDistribution::uniform(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("empty noise distribution");
  NoiseDistribution d;
  d.n_ = n;
  return d;
}

NoiseDistribution NoiseDistribution::frequency(
    std::span<const std::uint64_t> counts, double power) {
  NoiseDistribution d;
  d.n_ = static_cast<std::uint32_t>(counts.size());
  d.cum_.resize(counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += std::pow(static_cast<double>(counts[i]), power);
    d.cum_[i] = total;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("frequency noise distribution has no mass");
  }
  for (double& c : d.cum_) c /= total;
  return d;
}

std::uint32_t NoiseDistribution::sample(Rng& rng) const {
  if (n_ == 0) throw std::logic_error("sampling from an empty distribution");
  if (cum_.empty()) return static_cast<std::uint32_t>(rng.uniform_int(n_));
  const double u = rng.uniform();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) --it;
  return static_cast<std::uint32_t>(it - cum_.begin());
}

double NoiseDistribution::prob(std::uint32_t id) const {
  if (id >= n_) return 0.0;
  if (cum_.empty()) return 1.0 / static_cast<double>(n_);
  return id == 0 ? cum_[0] : cum_[id] - cum_[id - 1];
}

std::vector<std::uint32_t> sample_negatives(const NoiseDistribution& dist,
                                            std::uint32_t k, Rng& rng) {
  std::vector<std::uint32_t> out(k);
  for (auto& v : out) v = dist.sample(rng);
  return out;
}

const NoiseDistribution& NoiseModel::for_relation(Relation r) const {
  switch (relation_tail_type(r)) {
    case EntityType::item: return tails_item;
    case EntityType::brand: return tails_brand;
    default: return tails_category;
  }
}

NoiseModel build_noise(const Corpus& corpus) {
  NoiseModel nm;
  nm.purchase_items =
      NoiseDistribution::uniform(static_cast<std::uint32_t>(corpus.items.size()));
  std::vector<std::uint64_t> item_counts(corpus.items.size(), 0);
  std::vector<std::uint64_t> brand_counts(corpus.brands.size(), 0);
  std::vector<std::uint64_t> cat_counts(corpus.categories.size(), 0);
  for (const Triple& t : corpus.triples) {
    if (t.rel == Relation::search_purchase) continue;
    switch (t.tail.type) {
      case EntityType::item: item_counts[t.tail.id]++; break;
      case EntityType::brand: brand_counts[t.tail.id]++; break;
      case EntityType::category: cat_counts[t.tail.id]++; break;
      default: break;
    }
  }
  auto any = [](const std::vector<std::uint64_t>& v) {
    for (auto c : v) {
      if (c) return true;
    }
    return false;
  };
  if (any(item_counts)) nm.tails_item = NoiseDistribution::frequency(item_counts);
  if (any(brand_counts)) nm.tails_brand = NoiseDistribution::frequency(brand_counts);
  if (any(cat_counts)) nm.tails_category = NoiseDistribution::frequency(cat_counts);
  return nm;
}

std::vector<TrainItem> build_stream(const Corpus& corpus) {
  std::vector<TrainItem> stream;
  for (std::uint32_t i = 0; i < corpus.purchases.size(); ++i) {
    if (corpus.purchases[i].split != Split::train) continue;
    TrainItem it;
    it.is_purchase = true;
    it.index = i;
    stream.push_back(std::move(it));
  }
  for (std::uint32_t i = 0; i < corpus.triples.size(); ++i) {
    if (corpus.triples[i].rel == Relation::search_purchase) continue;
    TrainItem it;
    it.is_purchase = false;
    it.index = i;
    stream.push_back(std::move(it));
  }
  return stream;
}

void fill_negatives(const Corpus& corpus, const NoiseModel& noise,
                    std::uint32_t k, Rng& rng, std::span<TrainItem> items) {
  for (TrainItem& it : items) {
    const NoiseDistribution& dist =
        it.is_purchase ? noise.purchase_items
                       : noise.for_relation(corpus.triples[it.index].rel);
    it.negatives = sample_negatives(dist, k, rng);
  }
}

double loss_and_grad(const Corpus& corpus, const EmbeddingStore& store,
                     const ModelConfig& config,
                     std::span<const TrainItem> items, std::span<double> grad) {
  if (items.empty()) throw std::invalid_argument("empty batch");
  if (grad.size() != store.size()) {
    throw std::invalid_argument("gradient buffer size mismatch");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t a = store.alpha();
  double total = 0.0;

  QueryContext qctx;
  UserVectorContext uctx;
  std::vector<double> y(a), dy(a);

  for (const TrainItem& it : items) {
    std::fill(dy.begin(), dy.end(), 0.0);
    if (it.is_purchase) {
      const PurchaseRecord& rec = corpus.purchases[it.index];
      encode_query(rec.query_words, store, qctx);

      std::span<const double> u;
      UserVectorResult uv;
      if (config.kind == ModelKind::drem) {
        u = store.user_vec(rec.user);
      } else {
        uv = user_vector(rec.user, qctx.q, corpus, store, config.omega_cap,
                         &uctx);
        u = uv.u;
      }
      for (std::size_t r = 0; r < a; ++r) y[r] = u[r] + qctx.q[r];

      auto pos = store.item_vec(rec.item);
      const double sp = kernels::dot(y, pos);
      total += softplus(-sp);
      const double cp = sigmoid(sp) - 1.0;
      kernels::axpy(cp, pos, dy);
      kernels::axpy(cp, y, grad.subspan(store.offset_item(rec.item), a));
      for (std::uint32_t neg : it.negatives) {
        auto nv = store.item_vec(neg);
        const double sn = kernels::dot(y, nv);
        total += softplus(sn);
        const double cn = sigmoid(sn);
        kernels::axpy(cn, nv, dy);
        kernels::axpy(cn, y, grad.subspan(store.offset_item(neg), a));
      }

      // dy splits into the user side and the query side.
      if (config.kind == ModelKind::drem) {
        kernels::axpy(1.0, dy, grad.subspan(store.offset_user(rec.user), a));
        encode_query_backward(rec.query_words, store, qctx, dy, grad);
      } else {
        std::vector<double> dq(dy.begin(), dy.end());
        user_vector_backward(rec.user, qctx.q, corpus, store, uctx, dy, grad,
                             dq);
        encode_query_backward(rec.query_words, store, qctx, dq, grad);
      }
    } else {
      const Triple& t = corpus.triples[it.index];
      auto h = store.values().subspan(
          store.offset_entity(t.head.type, t.head.id), a);
      auto r = store.relation_vec(t.rel);
      for (std::size_t c = 0; c < a; ++c) y[c] = h[c] + r[c];

      const EntityType tail_type = relation_tail_type(t.rel);
      auto tail_span = [&](std::uint32_t id) {
        return store.values().subspan(store.offset_entity(tail_type, id), a);
      };
      auto pos = tail_span(t.tail.id);
      const double sp = kernels::dot(y, pos);
      total += softplus(-sp);
      const double cp = sigmoid(sp) - 1.0;
      kernels::axpy(cp, pos, dy);
      kernels::axpy(cp, y,
                    grad.subspan(store.offset_entity(tail_type, t.tail.id), a));
      for (std::uint32_t neg : it.negatives) {
        auto nv = tail_span(neg);
        const double sn = kernels::dot(y, nv);
        total += softplus(sn);
        const double cn = sigmoid(sn);
        kernels::axpy(cn, nv, dy);
        kernels::axpy(cn, y,
                      grad.subspan(store.offset_entity(tail_type, neg), a));
      }
      kernels::axpy(1.0, dy,
                    grad.subspan(store.offset_entity(t.head.type, t.head.id), a));
      kernels::axpy(1.0, dy, grad.subspan(store.offset_relation(t.rel), a));
    }
  }

  const double inv = 1.0 / static_cast<double>(items.size());
  kernels::scale(grad, inv);
  const double loss = total * inv;
  if (!std::isfinite(loss)) throw std::domain_error("non-finite training loss");
  return loss;
}

std::vector<double> intent_vector(std::uint32_t user,
                                  std::span<const std::uint32_t> words,
                                  const Corpus& corpus,
                                  const EmbeddingStore& store,
                                  std::uint32_t omega_cap,
                                  AttentionTrace* trace_out) {
  std::vector<double> q = encode_query(words, store);
  if (store.spec().kind == ModelKind::drem) {
    auto u = store.user_vec(user);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += u[i];
    return q;
  }
  UserVectorResult uv = user_vector(user, q, corpus, store, omega_cap);
  if (trace_out) *trace_out = std::move(uv.trace);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] += uv.u[i];
  return q;
}

TrainResult train(const Corpus& corpus, const ModelConfig& config) {
  config.validate();
  StoreSpec spec = spec_for(corpus, config.alpha, config.beta, config.kind);
  EmbeddingStore store = EmbeddingStore::init(spec, config.seed);
  NoiseModel noise = build_noise(corpus);
  std::vector<TrainItem> stream = build_stream(corpus);
  if (stream.empty()) throw std::invalid_argument("no training examples");

  const std::size_t n = stream.size();
  const std::size_t batches_per_epoch =
      (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_batches = batches_per_epoch * config.epochs;

  TrainResult result{std::move(store), {}, false};
  EmbeddingStore snapshot = result.store;
  Rng root(config.seed);

  std::size_t batch_counter = 0;
  for (std::uint32_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng = root.fork("epoch-" + std::to_string(epoch));
    rng.shuffle(stream);
    fill_negatives(corpus, noise, config.k, rng, stream);

    double epoch_loss = 0.0;
    double last_lr = 0.0;
    bool failed = false;

    if (config.threads <= 1) {
      std::vector<double> grad(result.store.size());
      for (std::size_t b = 0; b < batches_per_epoch; ++b) {
        const std::size_t lo = b * config.batch_size;
        const std::size_t hi = std::min(n, lo + config.batch_size);
        const double progress = static_cast<double>(batch_counter) /
                                static_cast<double>(total_batches);
        last_lr = decay_schedule(config.initial_lr, progress);
        try {
          const double loss = loss_and_grad(
              corpus, result.store, config,
              std::span<const TrainItem>(stream.data() + lo, hi - lo), grad);
          clip_gradients(grad, config.clip_norm);
          adagrad_apply(result.store, grad, last_lr);
          epoch_loss += loss * static_cast<double>(hi - lo);
        } catch (const std::domain_error&) {
          failed = true;
          break;
        }
        ++batch_counter;
      }
    } else {
      // Unsynchronized workers share the store; updates race benignly and
      // results are not reproducible. Offered for throughput only.
      std::atomic<std::size_t> next{0};
      std::atomic<bool> bad{false};
      std::vector<double> losses(batches_per_epoch, 0.0);
      const std::size_t base_batch = batch_counter;
      auto worker = [&]() {
        std::vector<double> grad(result.store.size());
        for (;;) {
          const std::size_t b = next.fetch_add(1);
          if (b >= batches_per_epoch || bad.load()) return;
          const std::size_t lo = b * config.batch_size;
          const std::size_t hi = std::min(n, lo + config.batch_size);
          const double progress = static_cast<double>(base_batch + b) /
                                  static_cast<double>(total_batches);
          const double lr = decay_schedule(config.initial_lr, progress);
          try {
            losses[b] = loss_and_grad(
                            corpus, result.store, config,
                            std::span<const TrainItem>(stream.data() + lo,
                                                       hi - lo), grad) *
                        static_cast<double>(hi - lo);
            clip_gradients(grad, config.clip_norm);
            adagrad_apply(result.store, grad, lr);
          } catch (const std::domain_error&) {
            bad.store(true);
            return;
          }
        }
      };
      std::vector<std::thread> pool;
      for (std::uint32_t t = 0; t < config.threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      failed = bad.load();
      for (double l : losses) epoch_loss += l;
      batch_counter += batches_per_epoch;
      last_lr = decay_schedule(config.initial_lr,
                               static_cast<double>(batch_counter - 1) /
                                   static_cast<double>(total_batches));
    }

    if (failed) {
      // Divergence: fall back to the last finished epoch.
      result.store = snapshot;
      result.diverged = true;
      break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    EpochLog el;
    el.epoch = epoch;
    el.mean_loss = epoch_loss / static_cast<double>(n);
    el.lr = last_lr;
    el.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.log.push_back(el);
    snapshot = result.store;
  }
  return result;
}

void write_training_log(const std::vector<EpochLog>& log,
                        const std::string& mode, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "# mode=" << mode << "\n";
  out << "epoch,mean_loss,lr,wall_seconds\n";
  char buf[128];
  for (const EpochLog& el : log) {
    std::snprintf(buf, sizeof(buf), "%u,%.17g,%.17g,%.6f\n", el.epoch,
                  el.mean_loss, el.lr, el.wall_seconds);
    out << buf;
  }
}

}  // namespace lkg
