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

#ifndef LKG_EMBED_STORE_HPP_
#define LKG_EMBED_STORE_HPP_

// All learnable parameters live in one flat 64-bit-float vector with a
// parallel Adagrad accumulator, addressed through typed row views. The flat
// layout keeps gradient clipping, optimizer steps, finite-difference probes,
// and checkpointing trivially uniform.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lkg/corpus.hpp"

namespace lkg {

enum class ModelKind : std::uint8_t { drem = 0, drem_hgn = 1 };

const char* model_kind_name(ModelKind k);

// Attention parameter levels: one per knowledge domain, then the top level
// that pools across domains.
enum AttnLevel : int {
  kAttnItem = 0,
  kAttnBrand = 1,
  kAttnCategory = 2,
  kAttnUser = 3,
  kAttnLevels = 4,
};

struct StoreSpec {
  std::uint32_t alpha = 16;
  std::uint32_t beta = 2;
  ModelKind kind = ModelKind::drem;
  std::uint64_t n_words = 0;
  std::uint64_t n_users = 0;
  std::uint64_t n_items = 0;
  std::uint64_t n_brands = 0;
  std::uint64_t n_categories = 0;

  bool operator==(const StoreSpec&) const = default;
};

StoreSpec spec_for(const Corpus& corpus, std::uint32_t alpha,
                   std::uint32_t beta, ModelKind kind);

class EmbeddingStore {
 public:
  explicit EmbeddingStore(const StoreSpec& spec);  // all zeros

  // Embedding rows and weight matrices uniform in [-0.5/alpha, +0.5/alpha],
  // bias vectors zero, accumulators zero.
  static EmbeddingStore init(const StoreSpec& spec, std::uint64_t seed);

  const StoreSpec& spec() const { return spec_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> accum() { return accum_; }
  std::span<const double> accum() const { return accum_; }

  std::span<double> word_vec(std::uint32_t i) { return row(off_words_, i); }
  std::span<double> user_vec(std::uint32_t i) { return row(off_users_, i); }
  std::span<double> item_vec(std::uint32_t i) { return row(off_items_, i); }
  std::span<double> brand_vec(std::uint32_t i) { return row(off_brands_, i); }
  std::span<double> category_vec(std::uint32_t i) {
    return row(off_categories_, i);
  }
  std::span<const double> word_vec(std::uint32_t i) const { return row(off_words_, i); }
  std::span<const double> user_vec(std::uint32_t i) const { return row(off_users_, i); }
  std::span<const double> item_vec(std::uint32_t i) const { return row(off_items_, i); }
  std::span<const double> brand_vec(std::uint32_t i) const { return row(off_brands_, i); }
  std::span<const double> category_vec(std::uint32_t i) const {
    return row(off_categories_, i);
  }

  // Static relation vector; search_purchase has none (its vector is the
  // encoded query).
  std::span<double> relation_vec(Relation r);
  std::span<const double> relation_vec(Relation r) const;

  // Query projection, row-major alpha x alpha, plus bias.
  std::span<double> query_w() { return {values_.data() + off_w_, alpha() * alpha()}; }
  std::span<const double> query_w() const { return {values_.data() + off_w_, alpha() * alpha()}; }
  std::span<double> query_b() { return {values_.data() + off_b_, alpha()}; }
  std::span<const double> query_b() const { return {values_.data() + off_b_, alpha()}; }

  // Attention parameters; alpha x beta x alpha tensor (row-major), alpha x
  // beta bias, beta head-mixing vector.
  std::span<double> attn_wf(int level);
  std::span<double> attn_b(int level);
  std::span<double> attn_wh(int level);
  std::span<const double> attn_wf(int level) const;
  std::span<const double> attn_b(int level) const;
  std::span<const double> attn_wh(int level) const;

  // Flat offsets into values()/accum(), used to address the matching slice
  // of an externally held gradient buffer.
  std::size_t offset_word(std::uint32_t i) const { return off_words_ + std::size_t{i} * alpha(); }
  std::size_t offset_user(std::uint32_t i) const { return off_users_ + std::size_t{i} * alpha(); }
  std::size_t offset_item(std::uint32_t i) const { return off_items_ + std::size_t{i} * alpha(); }
  std::size_t offset_brand(std::uint32_t i) const { return off_brands_ + std::size_t{i} * alpha(); }
  std::size_t offset_category(std::uint32_t i) const { return off_categories_ + std::size_t{i} * alpha(); }
  std::size_t offset_relation(Relation r) const {
    return off_rel_ + (static_cast<std::size_t>(r) - 1) * alpha();
  }
  std::size_t offset_query_w() const { return off_w_; }
  std::size_t offset_query_b() const { return off_b_; }
  std::size_t offset_attn_wf(int level) const { return off_attn_[level][0]; }
  std::size_t offset_attn_b(int level) const { return off_attn_[level][1]; }
  std::size_t offset_attn_wh(int level) const { return off_attn_[level][2]; }

  std::size_t offset_entity(EntityType t, std::uint32_t i) const;

  std::size_t alpha() const { return spec_.alpha; }
  std::size_t beta() const { return spec_.beta; }

 private:
  std::span<double> row(std::size_t table_off, std::uint32_t i) {
    return {values_.data() + table_off + std::size_t{i} * alpha(), alpha()};
  }
  std::span<const double> row(std::size_t table_off, std::uint32_t i) const {
    return {values_.data() + table_off + std::size_t{i} * alpha(), alpha()};
  }

  StoreSpec spec_;
  std::size_t off_words_ = 0, off_users_ = 0, off_items_ = 0, off_brands_ = 0,
              off_categories_ = 0, off_rel_ = 0, off_w_ = 0, off_b_ = 0;
  std::size_t off_attn_[kAttnLevels][3] = {};
  std::vector<double> values_;
  std::vector<double> accum_;
};

// Scales the whole gradient to max_norm when its global L2 norm exceeds it.
// Throws std::domain_error on non-finite gradients (divergence signal).
void clip_gradients(std::span<double> grad, double max_norm);

// accum += g^2; param -= lr * g / (sqrt(accum) + 1e-10), over the full store.
// Zero gradient entries are exact no-ops, so a dense pass equals the sparse
// update.
void adagrad_apply(EmbeddingStore& store, std::span<const double> grad,
                   double lr);

inline constexpr double kAdagradEps = 1e-10;

// Linear decay to zero with a small floor.
double decay_schedule(double initial_lr, double progress);

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const EmbeddingStore& store, const std::string& path);
EmbeddingStore load_checkpoint(const std::string& path);

// Rejects a checkpoint whose registry sizes disagree with the corpus.
void validate_against(const StoreSpec& spec, const Corpus& corpus);

}  // namespace lkg

#endif  // LKG_EMBED_STORE_HPP_
