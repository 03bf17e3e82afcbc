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

#include "lkg/explain.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "lkg/model.hpp"
#include "lkg/rng.hpp"
#include "lkg/synth.hpp"

namespace {

namespace fs = std::filesystem;

// Three items, three brands, one category, three users (u3 cold in train).
lkg::Corpus tiny_corpus() {
  fs::path dir = fs::temp_directory_path() / "lkg_explain_tests";
  fs::create_directories(dir);
  {
    std::ofstream t(dir / "t.tsv", std::ios::binary);
    t << "item\ti1\tbrand\tbrand\tb1\n"
         "item\ti2\tbrand\tbrand\tb2\n"
         "item\ti3\tbrand\tbrand\tb3\n"
         "item\ti1\tcategory\tcategory\tc1\n"
         "item\ti1\talso_bought\titem\ti2\n"
         "item\ti2\tbought_together\titem\ti3\n";
    std::ofstream p(dir / "p.tsv", std::ios::binary);
    p << "u1\tred shoes\ti1\ttrain\n"
         "u2\tblue hat\ti2\ttrain\n"
         "u3\tzz query\ti3\ttest\n";
  }
  return lkg::build_corpus((dir / "t.tsv").string(), (dir / "p.tsv").string());
}

lkg::Corpus synth_corpus() {
  fs::path dir = fs::temp_directory_path() / "lkg_explain_tests";
  fs::create_directories(dir);
  lkg::SynthSpec spec;
  spec.users = 8;
  spec.items = 12;
  spec.brands = 2;
  spec.categories = 2;
  spec.queries = 6;
  spec.queries_per_user = 3;
  auto t = (dir / "striples.tsv").string();
  auto p = (dir / "spurchases.tsv").string();
  auto g = (dir / "struth.jsonl").string();
  lkg::generate_synthetic(spec, 4, t, p, g);
  lkg::Corpus c = lkg::build_corpus(t, p);
  lkg::split_corpus(c, 0.3, 4);
  return c;
}

// Independent schema walk used as the enumeration oracle.
void oracle_walk(lkg::EntityType at, int left,
                 std::vector<lkg::Relation>& cur,
                 std::vector<std::vector<lkg::Relation>>& out) {
  out.push_back(cur);
  if (left == 0) return;
  for (int r = 0; r < lkg::kRelationCount; ++r) {
    auto rel = static_cast<lkg::Relation>(r);
    if (rel == lkg::Relation::search_purchase) continue;
    if (lkg::relation_head_type(rel) != at) continue;
    cur.push_back(rel);
    oracle_walk(lkg::relation_tail_type(rel), left - 1, cur, out);
    cur.pop_back();
  }
}

std::string shape_key(const lkg::PathShape& s) {
  std::string k;
  for (auto r : s.user_side) k += std::string(lkg::relation_name(r)) + ",";
  k += "|";
  for (auto r : s.item_side) k += std::string(lkg::relation_name(r)) + ",";
  return k;
}

}  // namespace

TEST_CASE("path enumeration matches an exhaustive schema walk") {
  for (std::uint32_t max : {1u, 2u}) {
    auto shapes = lkg::enumerate_paths(max);

    std::vector<std::vector<lkg::Relation>> walks;
    std::vector<lkg::Relation> cur;
    oracle_walk(lkg::EntityType::item, static_cast<int>(max), cur, walks);
    const auto end_of = [](const std::vector<lkg::Relation>& w) {
      return w.empty() ? lkg::EntityType::item
                       : lkg::relation_tail_type(w.back());
    };
    std::set<std::string> expected;
    for (const auto& uw : walks) {
      for (const auto& iw : walks) {
        if (end_of(uw) != end_of(iw)) continue;
        lkg::PathShape s;
        s.user_side.push_back(lkg::Relation::search_purchase);
        s.user_side.insert(s.user_side.end(), uw.begin(), uw.end());
        s.item_side = iw;
        s.meet = end_of(uw);
        expected.insert(shape_key(s));
      }
    }

    std::set<std::string> got;
    for (const auto& s : shapes) {
      CHECK(s.user_side.front() == lkg::Relation::search_purchase);
      // Both sides must type-check and end at the declared meeting type.
      lkg::EntityType at = lkg::EntityType::item;
      for (std::size_t j = 1; j < s.user_side.size(); ++j) {
        CHECK(lkg::relation_head_type(s.user_side[j]) == at);
        at = lkg::relation_tail_type(s.user_side[j]);
      }
      CHECK(at == s.meet);
      at = lkg::EntityType::item;
      for (auto r : s.item_side) {
        CHECK(lkg::relation_head_type(r) == at);
        at = lkg::relation_tail_type(r);
      }
      CHECK(at == s.meet);
      CHECK(got.insert(shape_key(s)).second);  // deduplicated
    }
    CHECK(got == expected);
    CHECK(shapes.size() == (max == 2 ? 201 : 18));
  }

  // The two pinned base shapes exist.
  auto shapes = lkg::enumerate_paths(2);
  lkg::PathShape direct{{lkg::Relation::search_purchase}, {},
                        lkg::EntityType::item};
  lkg::PathShape brand2{{lkg::Relation::search_purchase, lkg::Relation::brand},
                        {lkg::Relation::brand},
                        lkg::EntityType::brand};
  CHECK(std::count(shapes.begin(), shapes.end(), direct) == 1);
  CHECK(std::count(shapes.begin(), shapes.end(), brand2) == 1);

  CHECK_THROWS_AS(lkg::enumerate_paths(0), std::invalid_argument);
  CHECK_THROWS_AS(lkg::enumerate_paths(3), std::invalid_argument);
}

TEST_CASE("soft match reproduces the frozen hand computation") {
  lkg::Corpus c = tiny_corpus();
  lkg::EmbeddingStore st(lkg::spec_for(c, 2, 1, lkg::ModelKind::drem));
  auto u1 = static_cast<std::uint32_t>(c.users.find("u1"));
  auto i2 = static_cast<std::uint32_t>(c.items.find("i2"));
  st.user_vec(u1)[0] = 0.3;
  st.user_vec(u1)[1] = -0.2;
  st.relation_vec(lkg::Relation::brand)[0] = 0.1;
  st.relation_vec(lkg::Relation::brand)[1] = 0.4;
  st.item_vec(i2)[0] = -0.5;
  st.item_vec(i2)[1] = 0.2;
  const double brows[3][2] = {{1.0, 0.0}, {-0.3, 0.8}, {0.2, -0.6}};
  for (int b = 0; b < 3; ++b) {
    st.brand_vec(b)[0] = brows[b][0];
    st.brand_vec(b)[1] = brows[b][1];
  }

  lkg::PathShape shape{{lkg::Relation::search_purchase, lkg::Relation::brand},
                       {lkg::Relation::brand},
                       lkg::EntityType::brand};
  std::vector<std::uint32_t> words;
  CHECK(lkg::soft_match(shape, 1, u1, words, i2, c, st, 0.7) ==
        doctest::Approx(-3.153982248002821).epsilon(1e-12));

  CHECK_THROWS_AS(lkg::soft_match(shape, 9, u1, words, i2, c, st, 0.7),
                  std::out_of_range);
}

TEST_CASE("the penalty shift identity holds for fuzzed paths") {
  lkg::Corpus c = synth_corpus();
  auto shapes = lkg::enumerate_paths(2);
  lkg::Rng rng(73);
  std::vector<std::uint32_t> words = {0, 1};
  for (int trial = 0; trial < 40; ++trial) {
    auto st = lkg::EmbeddingStore::init(
        lkg::spec_for(c, 4, 1, lkg::ModelKind::drem), 100 + trial);
    for (double& v : st.values()) v *= 4.0;
    const auto& shape = shapes[rng.uniform_int(shapes.size())];
    const auto n = c.registry(shape.meet).size();
    const auto e = static_cast<std::uint32_t>(rng.uniform_int(n));
    const auto user = static_cast<std::uint32_t>(rng.uniform_int(c.users.size()));
    const auto item = static_cast<std::uint32_t>(rng.uniform_int(c.items.size()));
    const double g1 = rng.uniform(0.0, 2.0);
    const double g2 = rng.uniform(0.0, 2.0);
    const double m1 = lkg::soft_match(shape, e, user, words, item, c, st, g1);
    const double m2 = lkg::soft_match(shape, e, user, words, item, c, st, g2);
    const double hops =
        static_cast<double>(shape.user_extra() + shape.item_extra());
    CHECK(std::abs((m2 - m1) + hops * (g2 - g1)) < 1e-9);
  }
}

TEST_CASE("identical meeting entities reduce soft match to its closed form") {
  lkg::Corpus c = tiny_corpus();
  lkg::EmbeddingStore st(lkg::spec_for(c, 2, 1, lkg::ModelKind::drem));
  // Same row for every brand: both log-softmax terms become -log 3.
  for (int b = 0; b < 3; ++b) {
    st.brand_vec(b)[0] = 0.4;
    st.brand_vec(b)[1] = -0.9;
  }
  st.user_vec(0)[0] = 1.3;
  st.item_vec(0)[1] = -2.0;
  lkg::PathShape shape{{lkg::Relation::search_purchase, lkg::Relation::brand},
                       {lkg::Relation::brand},
                       lkg::EntityType::brand};
  std::vector<std::uint32_t> words;
  const double g = 1.25;
  for (std::uint32_t e = 0; e < 3; ++e) {
    CHECK(lkg::soft_match(shape, e, 0, words, 0, c, st, g) ==
          doctest::Approx(-2.0 * g - 2.0 * std::log(3.0)).epsilon(1e-12));
  }
}

TEST_CASE("top paths agree with exhaustive per-entity scoring") {
  lkg::Corpus c = synth_corpus();
  auto st = lkg::EmbeddingStore::init(
      lkg::spec_for(c, 4, 1, lkg::ModelKind::drem), 12);
  for (double& v : st.values()) v *= 4.0;
  std::vector<std::uint32_t> words = {0};
  const double gamma = 1.0;

  double best = -1e300;
  lkg::PathShape best_shape;
  std::uint32_t best_entity = 0;
  for (const auto& shape : lkg::enumerate_paths(2)) {
    const auto n = c.registry(shape.meet).size();
    for (std::uint32_t e = 0; e < n; ++e) {
      const double m = lkg::soft_match(shape, e, 1, words, 2, c, st, gamma);
      if (m > best) {
        best = m;
        best_shape = shape;
        best_entity = e;
      }
    }
  }

  auto paths = lkg::top_paths(1, words, 2, c, st, gamma, 5);
  REQUIRE(paths.size() == 5);
  CHECK(paths[0].score == doctest::Approx(best).epsilon(1e-12));
  CHECK(paths[0].shape == best_shape);
  CHECK(paths[0].entities[0].id == best_entity);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    CHECK(paths[i - 1].score >= paths[i].score);
  }
  for (const auto& p : paths) {
    CHECK(p.entities.size() <= 3);
    for (std::size_t i = 1; i < p.entities.size(); ++i) {
      CHECK(p.entities[i - 1].m >= p.entities[i].m);
    }
  }

  // Asking for more shapes than exist returns every scoreable one.
  auto all = lkg::top_paths(1, words, 2, c, st, gamma, 10000);
  CHECK(all.size() == 201);
}

TEST_CASE("zero parameters rank the direct match first by the tie rule") {
  lkg::Corpus c = synth_corpus();
  lkg::EmbeddingStore st(lkg::spec_for(c, 4, 1, lkg::ModelKind::drem));
  std::vector<std::uint32_t> words;
  // At this penalty every extra hop costs more than the widest softmax
  // spread, so the zero-hop direct shape is the unique best and ties inside
  // it break by entity id.
  auto paths = lkg::top_paths(0, words, 0, c, st, 2.5, 3);
  CHECK(paths[0].shape ==
        lkg::PathShape{{lkg::Relation::search_purchase}, {},
                       lkg::EntityType::item});
  CHECK(paths[0].entities[0].id == 0);
}

TEST_CASE("a dominant bought-together neighbor wins the explanation") {
  lkg::Corpus c = tiny_corpus();
  lkg::EmbeddingStore st(lkg::spec_for(c, 2, 1, lkg::ModelKind::drem));
  auto i3 = static_cast<std::uint32_t>(c.items.find("i3"));
  st.relation_vec(lkg::Relation::bought_together)[0] = 10.0;
  st.item_vec(0)[0] = -1.0;
  st.item_vec(1)[0] = -1.0;
  st.item_vec(i3)[0] = 1.0;

  std::vector<std::uint32_t> words;
  auto paths = lkg::top_paths(0, words, i3, c, st, 1.0, 1);
  lkg::PathShape bt{{lkg::Relation::search_purchase,
                     lkg::Relation::bought_together},
                    {},
                    lkg::EntityType::item};
  CHECK(paths[0].shape == bt);
  CHECK(paths[0].entities[0].id == i3);

  auto group = lkg::explain_mae(0, words, i3, c, st,
                                lkg::Templates::defaults(), "red shoes");
  REQUIRE(group.kind == lkg::ExplanationGroup::Kind::mae);
  REQUIRE(group.explanations.size() == 1);
  const auto& e = group.explanations[0];
  CHECK(e.source == lkg::ExplSource::path);
  CHECK(e.meet == lkg::EntityType::item);
  CHECK(e.percent == -1);
  CHECK(e.evidence[0].name == "i3");
  CHECK(e.text ==
        "This product was retrieved because it is frequently bought together "
        "with products retrieved by the query \"red shoes\".");
}

TEST_CASE("without a qualifying path the group is the direct match alone") {
  lkg::Corpus c = tiny_corpus();
  lkg::EmbeddingStore st(lkg::spec_for(c, 2, 1, lkg::ModelKind::drem));
  std::vector<std::uint32_t> words;
  // A steep penalty sinks every path with extra hops below the direct one.
  auto group = lkg::explain_mae(0, words, 0, c, st,
                                lkg::Templates::defaults(), "red shoes", 3.0);
  REQUIRE(group.explanations.size() == 1);
  const auto& e = group.explanations[0];
  CHECK(e.user_side ==
        std::vector<lkg::Relation>{lkg::Relation::search_purchase});
  CHECK(e.item_side.empty());
  CHECK(e.text.find("directly matched") != std::string::npos);
}

TEST_CASE("rendered groups respect the schema on random models") {
  lkg::Corpus c = synth_corpus();
  const auto tpl = lkg::Templates::defaults();
  lkg::Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto st = lkg::EmbeddingStore::init(
        lkg::spec_for(c, 4, 2, lkg::ModelKind::drem_hgn), 300 + trial);
    for (double& v : st.values()) v *= 4.0;
    const auto user = static_cast<std::uint32_t>(rng.uniform_int(c.users.size()));
    const auto item = static_cast<std::uint32_t>(rng.uniform_int(c.items.size()));
    std::vector<std::uint32_t> words = {0, 1};

    auto mae = lkg::explain_mae(user, words, item, c, st, tpl, "q");
    CHECK(mae.explanations.size() >= 1);
    CHECK(mae.explanations.size() <= 3);
    for (std::size_t i = 1; i < mae.explanations.size(); ++i) {
      CHECK(mae.explanations[i - 1].score >= mae.explanations[i].score);
    }
    for (const auto& e : mae.explanations) {
      CHECK(e.evidence.size() <= 3);
      CHECK(e.percent == -1);
      for (const auto& ev : e.evidence) {
        CHECK(c.registry(e.meet).find(ev.name) >= 0);
        if (e.shows_entities()) {
          CHECK(e.text.find(ev.name) != std::string::npos);
        }
      }
    }

    auto mie = lkg::explain_mie(user, words, item, c, st, tpl, "q", 64);
    CHECK(mie.explanations.size() >= 1);
    CHECK(mie.explanations.size() <= 3);
    int percent_sum = 0;
    for (std::size_t i = 1; i < mie.explanations.size(); ++i) {
      CHECK(mie.explanations[i - 1].score >= mie.explanations[i].score);
    }
    for (const auto& e : mie.explanations) {
      CHECK(e.percent >= 0);
      CHECK(e.percent <= 100);
      CHECK(std::abs(e.percent - std::llround(100.0 * e.score)) <= 1);
      CHECK(e.text.find(std::to_string(e.percent) + "%") !=
            std::string::npos);
      percent_sum += e.percent;
      for (const auto& ev : e.evidence) {
        CHECK(c.registry(e.meet).find(ev.name) >= 0);
        CHECK(e.text.find(ev.name) != std::string::npos);
      }
      if (e.source == lkg::ExplSource::attention_popularity) {
        CHECK(e.evidence.empty());
      }
    }
    CHECK(percent_sum <= 100);

    // Re-deriving the groups reproduces identical text.
    auto mie2 = lkg::explain_mie(user, words, item, c, st, tpl, "q", 64);
    REQUIRE(mie2.explanations.size() == mie.explanations.size());
    for (std::size_t i = 0; i < mie.explanations.size(); ++i) {
      CHECK(mie2.explanations[i].text == mie.explanations[i].text);
    }
  }
}

TEST_CASE("a cold user gets exactly the popularity explanation") {
  lkg::Corpus c = tiny_corpus();
  lkg::EmbeddingStore st(lkg::spec_for(c, 4, 2, lkg::ModelKind::drem_hgn));
  auto u3 = static_cast<std::uint32_t>(c.users.find("u3"));
  std::vector<std::uint32_t> words;
  auto group = lkg::explain_mie(u3, words, 0, c, st,
                                lkg::Templates::defaults(), "zz query", 64);
  REQUIRE(group.explanations.size() == 1);
  const auto& e = group.explanations[0];
  CHECK(e.source == lkg::ExplSource::attention_popularity);
  // All-zero parameters: four equal top-level gates of weight 1/4.
  CHECK(e.percent == 25);
  CHECK(e.text ==
        "This product was retrieved 25% because of its popularity under the "
        "query.");
}

TEST_CASE("the paper-style renderings come out verbatim") {
  const auto tpl = lkg::Templates::defaults();
  lkg::Explanation brand;
  brand.source = lkg::ExplSource::attention_domain;
  brand.meet = lkg::EntityType::brand;
  brand.evidence = {{"Apple", 0.7}};
  brand.percent = 50;
  CHECK(lkg::render(tpl, brand, "ipad") ==
        "This product was retrieved 50% because the user often buys products "
        "with brands such as Apple.");

  lkg::Explanation pop;
  pop.source = lkg::ExplSource::attention_popularity;
  pop.percent = 30;
  CHECK(lkg::render(tpl, pop, "ipad") ==
        "This product was retrieved 30% because of its popularity under the "
        "query.");

  lkg::Explanation cat;
  cat.source = lkg::ExplSource::path;
  cat.user_side = {lkg::Relation::search_purchase, lkg::Relation::category};
  cat.item_side = {lkg::Relation::category};
  cat.meet = lkg::EntityType::category;
  cat.evidence = {{"tablets", -1.0}, {"stylus", -2.0}};
  CHECK(lkg::render(tpl, cat, "ipad") ==
        "This product was retrieved because the user often buys products "
        "with categories such as tablets, stylus.");
}

TEST_CASE("template files override the defaults entry by entry") {
  fs::path dir = fs::temp_directory_path() / "lkg_explain_tests";
  fs::create_directories(dir);
  auto path = (dir / "templates.txt").string();
  lkg::write_default_templates(path);
  auto loaded = lkg::Templates::load(path);
  const auto def = lkg::Templates::defaults();
  CHECK(loaded.t1 == def.t1);
  CHECK(loaded.t2 == def.t2);
  CHECK(loaded.t3 == def.t3);
  CHECK(loaded.direct_phrase == def.direct_phrase);

  {
    std::ofstream out(path, std::ios::binary);
    out << "# comment\n"
           "rel.bought_together\tco-purchased\n";
  }
  auto tweaked = lkg::Templates::load(path);
  lkg::Explanation e;
  e.source = lkg::ExplSource::path;
  e.user_side = {lkg::Relation::search_purchase,
                 lkg::Relation::bought_together};
  e.meet = lkg::EntityType::item;
  CHECK(lkg::render(tweaked, e, "q").find("co-purchased") !=
        std::string::npos);

  {
    std::ofstream out(path, std::ios::binary);
    out << "T9\twhatever\n";
  }
  CHECK_THROWS_AS(lkg::Templates::load(path), std::runtime_error);
}

TEST_CASE("log purchase probability is a proper log-softmax share") {
  lkg::Corpus c = tiny_corpus();
  lkg::EmbeddingStore st(lkg::spec_for(c, 2, 1, lkg::ModelKind::drem));
  std::vector<std::uint32_t> words;
  // Zero scores over 3 items: every share is 1/3.
  CHECK(lkg::log_purchase_prob(0, words, 0, c, st, 100, 64) ==
        doctest::Approx(-std::log(3.0)).epsilon(1e-12));

  // A dominant item takes nearly everything.
  st.user_vec(0)[0] = 1.0;
  st.item_vec(2)[0] = 30.0;
  CHECK(lkg::log_purchase_prob(0, words, 2, c, st, 100, 64) >
        -1e-6);
  // The same probability stays a log-probability when the item is ranked
  // outside the kept list.
  st.item_vec(0)[0] = -5.0;
  const double lp = lkg::log_purchase_prob(0, words, 0, c, st, 1, 64);
  CHECK(lp < 0.0);
  CHECK(std::isfinite(lp));
}

TEST_CASE("explanation cases round-trip through the JSON lines file") {
  lkg::Corpus c = synth_corpus();
  auto st = lkg::EmbeddingStore::init(
      lkg::spec_for(c, 4, 2, lkg::ModelKind::drem_hgn), 77);
  for (double& v : st.values()) v *= 4.0;
  const auto tpl = lkg::Templates::defaults();

  std::vector<lkg::ExplanationCase> cases;
  for (std::uint32_t u = 0; u < 3; ++u) {
    lkg::ExplanationCase cs;
    cs.user = c.users.name(u);
    cs.item = c.items.name(u + 2);
    cs.query_key = cs.user + "#q" + std::to_string(u);
    cs.query_text = "query " + std::to_string(u);
    std::vector<std::uint32_t> words = {u};
    cs.mae = lkg::explain_mae(u, words, u + 2, c, st, tpl, cs.query_text);
    cs.mie = lkg::explain_mie(u, words, u + 2, c, st, tpl, cs.query_text, 64);
    cs.mrr = 0.25 * (u + 1);
    cs.log_purchase_prob =
        lkg::log_purchase_prob(u, words, u + 2, c, st, 100, 64);
    cases.push_back(std::move(cs));
  }

  fs::path dir = fs::temp_directory_path() / "lkg_explain_tests";
  auto path = (dir / "cases.jsonl").string();
  lkg::write_explanations(cases, path);
  auto back = lkg::read_explanations(path);
  REQUIRE(back.size() == cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(back[i].user == cases[i].user);
    CHECK(back[i].item == cases[i].item);
    CHECK(back[i].query_key == cases[i].query_key);
    CHECK(back[i].query_text == cases[i].query_text);
    CHECK(back[i].mrr == cases[i].mrr);
    CHECK(back[i].log_purchase_prob == cases[i].log_purchase_prob);
    for (auto pair : {std::make_pair(&back[i].mae, &cases[i].mae),
                      std::make_pair(&back[i].mie, &cases[i].mie)}) {
      REQUIRE(pair.first->explanations.size() ==
              pair.second->explanations.size());
      CHECK(pair.first->kind == pair.second->kind);
      for (std::size_t k = 0; k < pair.first->explanations.size(); ++k) {
        const auto& a = pair.first->explanations[k];
        const auto& b = pair.second->explanations[k];
        CHECK(a.source == b.source);
        CHECK(a.user_side == b.user_side);
        CHECK(a.item_side == b.item_side);
        CHECK(a.meet == b.meet);
        CHECK(a.evidence == b.evidence);
        CHECK(a.percent == b.percent);
        CHECK(a.score == b.score);
        CHECK(a.text == b.text);
      }
    }
  }

  // Writing the same cases twice is byte-identical.
  auto path2 = (dir / "cases2.jsonl").string();
  lkg::write_explanations(cases, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);

  {
    std::ofstream out(path, std::ios::binary);
    out << "{\"user\":\"u\"}\n";
  }
  CHECK_THROWS_AS(lkg::read_explanations(path), std::runtime_error);
}
