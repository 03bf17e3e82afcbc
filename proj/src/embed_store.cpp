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

#include "lkg/embed_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "lkg/kernels.hpp"
#include "lkg/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace lkg {

namespace {

constexpr char kMagic[4] = {'L', 'K', 'G', 'M'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

const char* model_kind_name(ModelKind k) {
  return k == ModelKind::drem ? "drem" : "drem_hgn";
}

StoreSpec spec_for(const Corpus& corpus, std::uint32_t alpha,
                   std::uint32_t beta, ModelKind kind) {
  StoreSpec s;
  s.alpha = alpha;
  s.beta = beta;
  s.kind = kind;
  s.n_words = corpus.words.size();
  s.n_users = corpus.users.size();
  s.n_items = corpus.items.size();
  s.n_brands = corpus.brands.size();
  s.n_categories = corpus.categories.size();
  return s;
}

EmbeddingStore::EmbeddingStore(const StoreSpec& spec) : spec_(spec) {
  if (spec.alpha < 1) throw std::invalid_argument("alpha must be >= 1");
  if (spec.kind == ModelKind::drem_hgn && spec.beta < 1) {
    throw std::invalid_argument("beta must be >= 1");
  }
  if (spec.n_items == 0 || spec.n_users == 0) {
    throw std::invalid_argument("empty user or item registry");
  }
  const std::size_t a = spec.alpha;
  const std::size_t b = spec.beta;
  std::size_t off = 0;
  off_words_ = off;
  off += spec.n_words * a;
  if (spec.kind == ModelKind::drem) {
    off_users_ = off;
    off += spec.n_users * a;
  } else {
    off_users_ = static_cast<std::size_t>(-1);
  }
  off_items_ = off;
  off += spec.n_items * a;
  off_brands_ = off;
  off += spec.n_brands * a;
  off_categories_ = off;
  off += spec.n_categories * a;
  off_rel_ = off;
  off += 5 * a;  // every relation except search_purchase
  off_w_ = off;
  off += a * a;
  off_b_ = off;
  off += a;
  if (spec.kind == ModelKind::drem_hgn) {
    for (int lvl = 0; lvl < kAttnLevels; ++lvl) {
      off_attn_[lvl][0] = off;
      off += a * b * a;
      off_attn_[lvl][1] = off;
      off += a * b;
      off_attn_[lvl][2] = off;
      off += b;
    }
  }
  values_.assign(off, 0.0);
  accum_.assign(off, 0.0);
}

EmbeddingStore EmbeddingStore::init(const StoreSpec& spec, std::uint64_t seed) {
  EmbeddingStore st(spec);
  Rng rng = Rng(seed).fork("store-init");
  const double bound = 0.5 / static_cast<double>(spec.alpha);
  for (double& v : st.values_) v = rng.uniform(-bound, bound);
  // Bias vectors start at zero.
  for (double& v : st.query_b()) v = 0.0;
  if (spec.kind == ModelKind::drem_hgn) {
    for (int lvl = 0; lvl < kAttnLevels; ++lvl) {
      for (double& v : st.attn_b(lvl)) v = 0.0;
    }
  }
  return st;
}

std::size_t EmbeddingStore::offset_entity(EntityType t, std::uint32_t i) const {
  switch (t) {
    case EntityType::user: return offset_user(i);
    case EntityType::item: return offset_item(i);
    case EntityType::word: return offset_word(i);
    case EntityType::brand: return offset_brand(i);
    case EntityType::category: return offset_category(i);
  }
  throw std::logic_error("bad entity type");
}

std::span<double> EmbeddingStore::relation_vec(Relation r) {
  if (r == Relation::search_purchase) {
    throw std::logic_error("search_purchase has no static relation vector");
  }
  const std::size_t idx = static_cast<std::size_t>(r) - 1;
  return {values_.data() + off_rel_ + idx * alpha(), alpha()};
}

std::span<const double> EmbeddingStore::relation_vec(Relation r) const {
  return const_cast<EmbeddingStore*>(this)->relation_vec(r);
}

std::span<double> EmbeddingStore::attn_wf(int level) {
  return {values_.data() + off_attn_[level][0], alpha() * beta() * alpha()};
}
std::span<double> EmbeddingStore::attn_b(int level) {
  return {values_.data() + off_attn_[level][1], alpha() * beta()};
}
std::span<double> EmbeddingStore::attn_wh(int level) {
  return {values_.data() + off_attn_[level][2], beta()};
}
std::span<const double> EmbeddingStore::attn_wf(int level) const {
  return const_cast<EmbeddingStore*>(this)->attn_wf(level);
}
std::span<const double> EmbeddingStore::attn_b(int level) const {
  return const_cast<EmbeddingStore*>(this)->attn_b(level);
}
std::span<const double> EmbeddingStore::attn_wh(int level) const {
  return const_cast<EmbeddingStore*>(this)->attn_wh(level);
}

void clip_gradients(std::span<double> grad, double max_norm) {
  const double sq = kernels::sum_sq(grad);
  if (!std::isfinite(sq)) {
    throw std::domain_error("non-finite gradient: training diverged");
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) kernels::scale(grad, max_norm / norm);
}

void adagrad_apply(EmbeddingStore& store, std::span<const double> grad,
                   double lr) {
  if (grad.size() != store.size()) {
    throw std::invalid_argument("gradient / store shape mismatch");
  }
  kernels::adagrad(store.values(), store.accum(), grad, lr, kAdagradEps);
}

double decay_schedule(double initial_lr, double progress) {
  const double lr = initial_lr * (1.0 - progress);
  return std::max(lr, 1e-4 * initial_lr);
}

void save_checkpoint(const EmbeddingStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(path + ": cannot open for writing");
  const StoreSpec& s = store.spec();
  out.write(kMagic, 4);
  auto w32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto w64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  w32(kVersion);
  const std::uint8_t kind = static_cast<std::uint8_t>(s.kind);
  out.write(reinterpret_cast<const char*>(&kind), 1);
  w32(s.alpha);
  w32(s.beta);
  w64(s.n_words);
  w64(s.n_users);
  w64(s.n_items);
  w64(s.n_brands);
  w64(s.n_categories);
  out.write(reinterpret_cast<const char*>(store.values().data()),
            static_cast<std::streamsize>(store.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(store.accum().data()),
            static_cast<std::streamsize>(store.size() * sizeof(double)));
  if (!out) throw CheckpointError(path + ": write failed");
}

EmbeddingStore load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path + ": cannot open");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError(path + ": bad magic at offset 0");
  }
  auto r32 = [&]() {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto r64 = [&]() {
    std::uint64_t v;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  const std::uint32_t version = r32();
  if (version != kVersion) {
    throw CheckpointError(path + ": unsupported version " +
                          std::to_string(version));
  }
  std::uint8_t kind;
  in.read(reinterpret_cast<char*>(&kind), 1);
  if (kind > 1) throw CheckpointError(path + ": bad model kind byte");
  StoreSpec s;
  s.kind = static_cast<ModelKind>(kind);
  s.alpha = r32();
  s.beta = r32();
  s.n_words = r64();
  s.n_users = r64();
  s.n_items = r64();
  s.n_brands = r64();
  s.n_categories = r64();
  if (!in) throw CheckpointError(path + ": truncated header");
  EmbeddingStore store(s);
  in.read(reinterpret_cast<char*>(store.values().data()),
          static_cast<std::streamsize>(store.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(store.accum().data()),
          static_cast<std::streamsize>(store.size() * sizeof(double)));
  if (!in || in.gcount() !=
                 static_cast<std::streamsize>(store.size() * sizeof(double))) {
    throw CheckpointError(path + ": truncated parameter tables");
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw CheckpointError(path + ": trailing bytes after parameter tables");
  }
  return store;
}

void validate_against(const StoreSpec& spec, const Corpus& corpus) {
  auto expect = [&](std::uint64_t got, std::size_t want, const char* what) {
    if (got != want) {
      throw CheckpointError(std::string("checkpoint/corpus mismatch: ") + what +
                            " count " + std::to_string(got) + " vs " +
                            std::to_string(want));
    }
  };
  expect(spec.n_words, corpus.words.size(), "word");
  expect(spec.n_users, corpus.users.size(), "user");
  expect(spec.n_items, corpus.items.size(), "item");
  expect(spec.n_brands, corpus.brands.size(), "brand");
  expect(spec.n_categories, corpus.categories.size(), "category");
}

}  // namespace lkg
