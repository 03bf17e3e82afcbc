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

#include "lkg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "lkg/rng.hpp"

namespace lkg {

namespace {

constexpr const char* kEntityTypeNames[kEntityTypeCount] = {
    "user", "item", "word", "brand", "category"};

constexpr const char* kRelationNames[kRelationCount] = {
    "search_purchase", "also_bought",      "also_viewed",
    "bought_together", "brand",            "category"};

constexpr EntityType kRelationHead[kRelationCount] = {
    EntityType::user, EntityType::item, EntityType::item,
    EntityType::item, EntityType::item, EntityType::item};

constexpr EntityType kRelationTail[kRelationCount] = {
    EntityType::item, EntityType::item,  EntityType::item,
    EntityType::item, EntityType::brand, EntityType::category};

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& msg) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> tokenize_query(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

void add_unique(std::vector<std::uint32_t>& v, std::uint32_t x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

const char* entity_type_name(EntityType t) {
  return kEntityTypeNames[static_cast<int>(t)];
}

std::optional<EntityType> entity_type_from(std::string_view s) {
  for (int i = 0; i < kEntityTypeCount; ++i) {
    if (s == kEntityTypeNames[i]) return static_cast<EntityType>(i);
  }
  return std::nullopt;
}

const char* relation_name(Relation r) {
  return kRelationNames[static_cast<int>(r)];
}

std::optional<Relation> relation_from(std::string_view s) {
  for (int i = 0; i < kRelationCount; ++i) {
    if (s == kRelationNames[i]) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

EntityType relation_head_type(Relation r) {
  return kRelationHead[static_cast<int>(r)];
}

EntityType relation_tail_type(Relation r) {
  return kRelationTail[static_cast<int>(r)];
}

std::uint32_t Registry::get_or_add(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::int64_t Registry::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Registry& Corpus::registry(EntityType t) {
  switch (t) {
    case EntityType::user: return users;
    case EntityType::item: return items;
    case EntityType::word: return words;
    case EntityType::brand: return brands;
    case EntityType::category: return categories;
  }
  throw std::logic_error("bad entity type");
}

const Registry& Corpus::registry(EntityType t) const {
  return const_cast<Corpus*>(this)->registry(t);
}

void Corpus::rebuild_derived() {
  const std::size_t ni = items.size();
  item_also_bought.assign(ni, {});
  item_also_viewed.assign(ni, {});
  item_bought_together.assign(ni, {});
  item_brands.assign(ni, {});
  item_categories.assign(ni, {});
  for (const Triple& t : triples) {
    switch (t.rel) {
      case Relation::also_bought:
        add_unique(item_also_bought[t.head.id], t.tail.id);
        break;
      case Relation::also_viewed:
        add_unique(item_also_viewed[t.head.id], t.tail.id);
        break;
      case Relation::bought_together:
        add_unique(item_bought_together[t.head.id], t.tail.id);
        break;
      case Relation::brand:
        add_unique(item_brands[t.head.id], t.tail.id);
        break;
      case Relation::category:
        add_unique(item_categories[t.head.id], t.tail.id);
        break;
      case Relation::search_purchase:
        break;  // folded into purchases below
    }
  }

  const std::size_t nu = users.size();
  user_items.assign(nu, {});
  user_brands.assign(nu, {});
  user_categories.assign(nu, {});
  for (const Triple& t : triples) {
    if (t.rel == Relation::search_purchase) {
      add_unique(user_items[t.head.id], t.tail.id);
      for (std::uint32_t b : item_brands[t.tail.id])
        add_unique(user_brands[t.head.id], b);
      for (std::uint32_t cg : item_categories[t.tail.id])
        add_unique(user_categories[t.head.id], cg);
    }
  }
  for (const PurchaseRecord& p : purchases) {
    if (p.split != Split::train) continue;
    add_unique(user_items[p.user], p.item);
    for (std::uint32_t b : item_brands[p.item]) add_unique(user_brands[p.user], b);
    for (std::uint32_t cg : item_categories[p.item])
      add_unique(user_categories[p.user], cg);
  }
}

bool Corpus::operator==(const Corpus& o) const {
  return users == o.users && items == o.items && words == o.words &&
         brands == o.brands && categories == o.categories &&
         word_freq == o.word_freq && triples == o.triples &&
         duplicate_triples == o.duplicate_triples && purchases == o.purchases &&
         item_also_bought == o.item_also_bought &&
         item_also_viewed == o.item_also_viewed &&
         item_bought_together == o.item_bought_together &&
         item_brands == o.item_brands && item_categories == o.item_categories &&
         user_items == o.user_items && user_brands == o.user_brands &&
         user_categories == o.user_categories;
}

void parse_triples_into(Corpus& c, const std::string& path) {
  auto lines = read_lines(path);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(lines.size() * 2);
  for (const Triple& t : c.triples) {
    seen.insert((static_cast<std::uint64_t>(t.rel) << 56) |
                (static_cast<std::uint64_t>(t.head.id) << 28) | t.tail.id);
  }
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 5) fail(path, ln + 1, "expected 5 tab-separated columns");
    for (auto col : cols) {
      if (col.empty()) fail(path, ln + 1, "empty field");
    }
    auto ht = entity_type_from(cols[0]);
    auto rel = relation_from(cols[2]);
    auto tt = entity_type_from(cols[3]);
    if (!ht) fail(path, ln + 1, "unknown head type '" + std::string(cols[0]) + "'");
    if (!rel) fail(path, ln + 1, "unknown relation '" + std::string(cols[2]) + "'");
    if (!tt) fail(path, ln + 1, "unknown tail type '" + std::string(cols[3]) + "'");
    if (*ht != relation_head_type(*rel) || *tt != relation_tail_type(*rel)) {
      fail(path, ln + 1,
           std::string("relation '") + relation_name(*rel) +
               "' expects head " + entity_type_name(relation_head_type(*rel)) +
               ", tail " + entity_type_name(relation_tail_type(*rel)));
    }
    std::uint32_t hid = c.registry(*ht).get_or_add(cols[1]);
    std::uint32_t tid = c.registry(*tt).get_or_add(cols[4]);
    if (hid >= (1u << 28) || tid >= (1u << 28)) {
      fail(path, ln + 1, "registry exceeds 2^28 entities");
    }
    std::uint64_t key = (static_cast<std::uint64_t>(*rel) << 56) |
                        (static_cast<std::uint64_t>(hid) << 28) | tid;
    if (!seen.insert(key).second) {
      c.duplicate_triples++;
      continue;
    }
    c.triples.push_back(Triple{{*ht, hid}, *rel, {*tt, tid}});
  }
}

void parse_purchases_into(Corpus& c, const std::string& path,
                          std::uint64_t vocab_min_count) {
  auto lines = read_lines(path);
  bool any = false;

  // Pass 1: token frequencies across the whole file.
  std::unordered_map<std::string, std::uint64_t> freq;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    any = true;
    auto cols = split_tabs(line);
    if (cols.size() != 3 && cols.size() != 4) {
      fail(path, ln + 1, "expected 3 or 4 tab-separated columns");
    }
    for (const std::string& tok : tokenize_query(cols[1])) freq[tok]++;
  }
  if (!any) throw ParseError(path + ": empty purchase file");

  // Pass 2: records, with sub-threshold tokens dropped from query_words.
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols[0].empty() || cols[2].empty()) fail(path, ln + 1, "empty field");
    PurchaseRecord rec;
    rec.user = c.users.get_or_add(cols[0]);
    rec.item = c.items.get_or_add(cols[2]);
    if (cols.size() == 4) {
      if (cols[3] == "train") {
        rec.split = Split::train;
      } else if (cols[3] == "test") {
        rec.split = Split::test;
      } else {
        fail(path, ln + 1, "unknown split tag '" + std::string(cols[3]) + "'");
      }
    }
    auto tokens = tokenize_query(cols[1]);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) rec.query_text.push_back(' ');
      rec.query_text += tokens[i];
      if (freq[tokens[i]] >= vocab_min_count) {
        std::uint32_t wid = c.words.get_or_add(tokens[i]);
        if (wid >= c.word_freq.size()) c.word_freq.resize(wid + 1, 0);
        rec.query_words.push_back(wid);
      }
    }
    for (std::uint32_t wid : rec.query_words) c.word_freq[wid]++;
    c.purchases.push_back(std::move(rec));
  }
}

Corpus build_corpus(const std::string& triples_path,
                    const std::string& purchases_path,
                    std::uint64_t vocab_min_count) {
  Corpus c;
  parse_triples_into(c, triples_path);
  parse_purchases_into(c, purchases_path, vocab_min_count);
  c.rebuild_derived();
  return c;
}

void split_corpus(Corpus& c, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  std::vector<std::string> queries;
  std::unordered_set<std::string> seen;
  for (const PurchaseRecord& p : c.purchases) {
    if (seen.insert(p.query_text).second) queries.push_back(p.query_text);
  }
  if (queries.size() < 2) {
    throw std::invalid_argument("need at least 2 distinct queries to split");
  }
  std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(queries.size())));
  n_test = std::max<std::size_t>(1, std::min(n_test, queries.size() - 1));

  Rng rng = Rng(seed).fork("query-split");
  rng.shuffle(queries);
  std::unordered_set<std::string> test_set(queries.begin(),
                                           queries.begin() + n_test);
  for (PurchaseRecord& p : c.purchases) {
    p.split = test_set.count(p.query_text) ? Split::test : Split::train;
  }
  c.rebuild_derived();
}

void emit_triples(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const Triple& t : c.triples) {
    out << entity_type_name(t.head.type) << '\t'
        << c.registry(t.head.type).name(t.head.id) << '\t'
        << relation_name(t.rel) << '\t' << entity_type_name(t.tail.type)
        << '\t' << c.registry(t.tail.type).name(t.tail.id) << '\n';
  }
}

void emit_purchases(const Corpus& c, const std::string& path, bool with_split) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const PurchaseRecord& p : c.purchases) {
    out << c.users.name(p.user) << '\t' << p.query_text << '\t'
        << c.items.name(p.item);
    if (with_split) out << '\t' << (p.split == Split::train ? "train" : "test");
    out << '\n';
  }
}

}  // namespace lkg
