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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "lkg/rng.hpp"

namespace fs = std::filesystem;

namespace {

lkg::StoreSpec small_spec(lkg::ModelKind kind, std::uint32_t alpha = 4,
                          std::uint32_t beta = 2) {
  lkg::StoreSpec s;
  s.alpha = alpha;
  s.beta = beta;
  s.kind = kind;
  s.n_words = 6;
  s.n_users = 3;
  s.n_items = 5;
  s.n_brands = 2;
  s.n_categories = 2;
  return s;
}

}  // namespace

TEST_CASE("initialization is range-bounded, bias-zero, and deterministic") {
  auto spec = small_spec(lkg::ModelKind::drem_hgn);
  auto a = lkg::EmbeddingStore::init(spec, 3);
  auto b = lkg::EmbeddingStore::init(spec, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.values()[i] == b.values()[i]);
    CHECK(std::abs(a.values()[i]) <= 0.5 / spec.alpha);
    CHECK(a.accum()[i] == 0.0);
  }
  for (double v : a.query_b()) CHECK(v == 0.0);
  for (int lvl = 0; lvl < lkg::kAttnLevels; ++lvl) {
    for (double v : a.attn_b(lvl)) CHECK(v == 0.0);
  }
  auto c = lkg::EmbeddingStore::init(spec, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size() && !differs; ++i) {
    differs = a.values()[i] != c.values()[i];
  }
  CHECK(differs);
}

TEST_CASE("initial coordinates average to zero within three sigma") {
  lkg::StoreSpec spec = small_spec(lkg::ModelKind::drem, 4, 1);
  spec.n_words = 25000;  // 25000 * 4 = 1e5 coordinates
  spec.n_users = 1;
  spec.n_items = 1;
  spec.n_brands = 0;
  spec.n_categories = 0;
  auto st = lkg::EmbeddingStore::init(spec, 12);
  double sum = 0.0;
  std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) sum += st.values()[i];
  const double sigma_coord = (1.0 / spec.alpha) / std::sqrt(12.0);
  const double bound = 3.0 * sigma_coord / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / static_cast<double>(n)) <= bound);
}

TEST_CASE("store layout separates tables per model kind") {
  auto drem = lkg::EmbeddingStore(small_spec(lkg::ModelKind::drem));
  auto hgn = lkg::EmbeddingStore(small_spec(lkg::ModelKind::drem_hgn));
  // drem has a user table but no attention parameters; drem_hgn the reverse.
  const std::size_t a = 4, b = 2;
  const std::size_t base = (6 + 5 + 2 + 2) * a + 5 * a + a * a + a;
  CHECK(drem.size() == base + 3 * a);
  CHECK(hgn.size() == base + lkg::kAttnLevels * (a * b * a + a * b + b));

  auto wf = hgn.attn_wf(lkg::kAttnUser);
  CHECK(wf.size() == a * b * a);
  CHECK(hgn.attn_b(lkg::kAttnItem).size() == a * b);
  CHECK(hgn.attn_wh(lkg::kAttnBrand).size() == b);
  CHECK_THROWS(drem.relation_vec(lkg::Relation::search_purchase));
  CHECK(drem.relation_vec(lkg::Relation::also_bought).size() == a);
}

TEST_CASE("gradient clipping scales exactly at the norm boundary") {
  std::vector<double> g = {3.0, 4.0};
  lkg::clip_gradients(g, 5.0);
  CHECK(g == std::vector<double>{3.0, 4.0});

  g = {6.0, 8.0};
  lkg::clip_gradients(g, 5.0);
  CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-15));

  g = {0.0, 0.0, 0.0};
  lkg::clip_gradients(g, 5.0);
  for (double v : g) CHECK(v == 0.0);

  g = {1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(lkg::clip_gradients(g, 5.0), std::domain_error);

  {
    lkg::Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> v(1 + rng.uniform_int(40));
      for (auto& x : v) x = rng.uniform(-100.0, 100.0);
      lkg::clip_gradients(v, 5.0);
      double sq = 0.0;
      for (double x : v) sq += x * x;
      CHECK(std::sqrt(sq) <= 5.0 + 1e-12);
    }
  }
}

TEST_CASE("adagrad matches the hand-computed recurrences") {
  auto spec = small_spec(lkg::ModelKind::drem, 1, 1);
  spec.n_words = 1;
  spec.n_users = 1;
  spec.n_items = 1;
  spec.n_brands = 1;
  spec.n_categories = 1;
  lkg::EmbeddingStore st(spec);
  std::vector<double> grad(st.size(), 0.0);

  st.word_vec(0)[0] = 1.0;
  grad[0] = 2.0;
  lkg::adagrad_apply(st, grad, 0.5);
  CHECK(st.accum()[0] == 4.0);
  CHECK(st.word_vec(0)[0] == 0.500000000025);

  // Fresh coordinate: two unit steps from zero at lr 1.
  grad.assign(st.size(), 0.0);
  grad[1] = 1.0;
  lkg::adagrad_apply(st, grad, 1.0);
  lkg::adagrad_apply(st, grad, 1.0);
  CHECK(st.values()[1] == doctest::Approx(-1.7071067810365474).epsilon(1e-15));

  // Zero gradient is an exact no-op everywhere.
  auto before_vals = std::vector<double>(st.values().begin(), st.values().end());
  auto before_acc = std::vector<double>(st.accum().begin(), st.accum().end());
  grad.assign(st.size(), 0.0);
  lkg::adagrad_apply(st, grad, 123.0);
  CHECK(std::vector<double>(st.values().begin(), st.values().end()) ==
        before_vals);
  CHECK(std::vector<double>(st.accum().begin(), st.accum().end()) == before_acc);

  // lr 0 leaves parameters alone but still accumulates.
  grad[2] = 3.0;
  lkg::adagrad_apply(st, grad, 0.0);
  CHECK(st.values()[2] == before_vals[2]);
  CHECK(st.accum()[2] == 9.0);
}

TEST_CASE("accumulators never decrease") {
  auto spec = small_spec(lkg::ModelKind::drem, 2, 1);
  lkg::EmbeddingStore st(spec);
  lkg::Rng rng(17);
  std::vector<double> prev(st.accum().begin(), st.accum().end());
  for (int step = 0; step < 50; ++step) {
    std::vector<double> grad(st.size());
    for (auto& g : grad) g = rng.uniform(-1.0, 1.0);
    lkg::adagrad_apply(st, grad, 0.1);
    for (std::size_t i = 0; i < st.size(); ++i) {
      CHECK(st.accum()[i] >= prev[i]);
      prev[i] = st.accum()[i];
    }
  }
}

TEST_CASE("learning-rate decay is linear with a floor") {
  CHECK(lkg::decay_schedule(0.5, 0.0) == 0.5);
  CHECK(lkg::decay_schedule(0.5, 0.5) == 0.25);
  CHECK(lkg::decay_schedule(0.5, 1.0) == 5e-5);
  CHECK(lkg::decay_schedule(0.5, 0.99999999) == 5e-5);
}

TEST_CASE("checkpoints round-trip and reject corruption") {
  fs::path dir = fs::temp_directory_path() / "lkg_store_tests";
  fs::create_directories(dir);
  auto path = (dir / "model.ckpt").string();

  auto spec = small_spec(lkg::ModelKind::drem_hgn);
  auto st = lkg::EmbeddingStore::init(spec, 9);
  std::vector<double> grad(st.size());
  lkg::Rng rng(2);
  for (auto& g : grad) g = rng.uniform(-1.0, 1.0);
  lkg::adagrad_apply(st, grad, 0.3);

  lkg::save_checkpoint(st, path);
  auto loaded = lkg::load_checkpoint(path);
  CHECK(loaded.spec() == st.spec());
  REQUIRE(loaded.size() == st.size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    CHECK(loaded.values()[i] == st.values()[i]);
    CHECK(loaded.accum()[i] == st.accum()[i]);
  }

  // Corrupted magic.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(lkg::load_checkpoint(path), lkg::CheckpointError);
  lkg::save_checkpoint(st, path);

  // Truncation.
  fs::resize_file(path, fs::file_size(path) - 16);
  CHECK_THROWS_AS(lkg::load_checkpoint(path), lkg::CheckpointError);
  lkg::save_checkpoint(st, path);

  // Registry mismatch against a corpus.
  lkg::Corpus c;
  c.users.get_or_add("u1");
  c.items.get_or_add("i1");
  CHECK_THROWS_AS(lkg::validate_against(st.spec(), c), lkg::CheckpointError);
}
