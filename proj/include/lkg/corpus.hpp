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

#ifndef LKG_CORPUS_HPP_
#define LKG_CORPUS_HPP_

// Product-search corpus: typed entities, knowledge-graph triples, and
// (user, query, item) purchase records, plus the per-user association sets
// the gated network attends over.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lkg {

enum class EntityType : std::uint8_t { user = 0, item, word, brand, category };
inline constexpr int kEntityTypeCount = 5;

const char* entity_type_name(EntityType t);
std::optional<EntityType> entity_type_from(std::string_view s);

// The fixed relation schema. search_purchase links a user to an item and its
// relation vector is the query embedding rather than a stored table row.
enum class Relation : std::uint8_t {
  search_purchase = 0,
  also_bought,
  also_viewed,
  bought_together,
  brand,
  category,
};
inline constexpr int kRelationCount = 6;

const char* relation_name(Relation r);
std::optional<Relation> relation_from(std::string_view s);
EntityType relation_head_type(Relation r);
EntityType relation_tail_type(Relation r);

struct EntityRef {
  EntityType type;
  std::uint32_t id;
  bool operator==(const EntityRef&) const = default;
};

struct Triple {
  EntityRef head;
  Relation rel;
  EntityRef tail;
  bool operator==(const Triple&) const = default;
};

enum class Split : std::uint8_t { train = 0, test = 1 };

struct PurchaseRecord {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  // Vocabulary-filtered word ids, order preserved. May be empty when every
  // token fell below the frequency cutoff.
  std::vector<std::uint32_t> query_words;
  // Lowercased raw tokens joined by single spaces; the grouping key for
  // train/test splitting and run files.
  std::string query_text;
  Split split = Split::train;
  bool operator==(const PurchaseRecord&) const = default;
};

// Dense per-type id registry; ids are assigned in first-seen order.
class Registry {
 public:
  std::uint32_t get_or_add(std::string_view name);
  // -1 when absent.
  std::int64_t find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool operator==(const Registry& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Corpus {
  Registry users, items, words, brands, categories;
  std::vector<std::uint64_t> word_freq;  // parallel to words registry

  std::vector<Triple> triples;  // deduplicated, file order
  std::uint64_t duplicate_triples = 0;
  std::vector<PurchaseRecord> purchases;

  // Deduplicated adjacency derived from triples, first-seen order.
  std::vector<std::vector<std::uint32_t>> item_also_bought;
  std::vector<std::vector<std::uint32_t>> item_also_viewed;
  std::vector<std::vector<std::uint32_t>> item_bought_together;
  std::vector<std::vector<std::uint32_t>> item_brands;
  std::vector<std::vector<std::uint32_t>> item_categories;

  // Per-user association sets over {item, brand, category}, derived from
  // TRAIN purchases only, deduplicated, first-association order.
  std::vector<std::vector<std::uint32_t>> user_items;
  std::vector<std::vector<std::uint32_t>> user_brands;
  std::vector<std::vector<std::uint32_t>> user_categories;

  Registry& registry(EntityType t);
  const Registry& registry(EntityType t) const;

  // Recomputes adjacency and association sets from triples + purchases.
  // Call after parsing or after splits change.
  void rebuild_derived();

  bool operator==(const Corpus& o) const;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Extends the corpus from a 5-column TSV of knowledge-graph triples:
// head_type, head_id, relation, tail_type, tail_id.
void parse_triples_into(Corpus& c, const std::string& path);

// Extends the corpus from a TSV of purchases: user_id, query_text,
// item_id[, split]. Tokens occurring fewer than vocab_min_count times across
// the file are dropped from query_words (never from query_text).
void parse_purchases_into(Corpus& c, const std::string& path,
                          std::uint64_t vocab_min_count = 1);

// Triples first, then purchases, then derived tables.
Corpus build_corpus(const std::string& triples_path,
                    const std::string& purchases_path,
                    std::uint64_t vocab_min_count = 1);

// Partitions distinct query strings and assigns each purchase the split of
// its query string. Rebuilds derived tables.
void split_corpus(Corpus& c, double test_fraction, std::uint64_t seed);

void emit_triples(const Corpus& c, const std::string& path);
void emit_purchases(const Corpus& c, const std::string& path,
                    bool with_split = true);

}  // namespace lkg

#endif  // LKG_CORPUS_HPP_
