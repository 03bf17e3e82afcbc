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

#ifndef LKG_EXPLAIN_HPP_
#define LKG_EXPLAIN_HPP_

// Search explanations. The model-agnostic kind walks the relation schema for
// soft-matching paths that connect the (user, query) pair and the item
// through a meeting entity; the model-intrinsic kind reads the gated
// network's attention trace. Both render through one template table.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/embed_store.hpp"
#include "lkg/hgn.hpp"

namespace lkg {

// A pair of relation sequences meeting at a shared entity type. The user
// side always begins with search_purchase (whose vector is the query
// embedding); anything after it, and the whole item side, are extra hops.
struct PathShape {
  std::vector<Relation> user_side;
  std::vector<Relation> item_side;
  EntityType meet = EntityType::item;
  bool operator==(const PathShape&) const = default;

  std::size_t user_extra() const { return user_side.size() - 1; }
  std::size_t item_extra() const { return item_side.size(); }
};

// All schema-valid shapes with at most max_extra_per_side hops beyond
// search_purchase on each side (1 or 2), both sides ending at one type.
std::vector<PathShape> enumerate_paths(std::uint32_t max_extra_per_side);

struct PathEntity {
  std::uint32_t id;  // dense id within the meeting type's registry
  double m;
};

struct InferencePath {
  PathShape shape;
  std::vector<PathEntity> entities;  // best first, at most 3
  double score = 0.0;                // the best entity's match score
};

// Log-probability that `entity` is the meeting point of the path: one
// log-softmax from the user side plus one from the item side, each taken
// over every entity of the meeting type, with the numerators penalized by
// gamma per extra hop. Throws when the meeting type has no entities.
double soft_match(const PathShape& shape, std::uint32_t entity,
                  std::uint32_t user, std::span<const std::uint32_t> words,
                  std::uint32_t item, const Corpus& corpus,
                  const EmbeddingStore& store, double gamma);

// The topk shapes ranked by their best entity's soft match, each carrying
// its up-to-3 best meeting entities. Ties break toward shorter paths, then
// lower entity ids, then the relation sequences themselves.
std::vector<InferencePath> top_paths(std::uint32_t user,
                                     std::span<const std::uint32_t> words,
                                     std::uint32_t item, const Corpus& corpus,
                                     const EmbeddingStore& store, double gamma,
                                     std::uint32_t topk,
                                     std::uint32_t max_extra_per_side = 2);

// Rendering templates and the relation phrase table. Loadable from a text
// file with one tab-separated `id<TAB>text` entry per line (ids: T1, T2,
// T3, rel.<relation>, rel.direct, domain.<entity type>); entries missing
// from the file keep the built-in defaults.
struct Templates {
  std::string t1;  // path explanation, item-type meeting entity
  std::string t2;  // entity-bearing explanation, with optional [{percent}% ]
  std::string t3;  // popularity explanation
  std::array<std::string, kRelationCount> rel_phrase;
  std::string direct_phrase;
  std::array<std::string, kEntityTypeCount> domain_word;

  static Templates defaults();
  static Templates load(const std::string& path);
};

void write_default_templates(const std::string& path);

enum class ExplSource : std::uint8_t {
  path = 0,
  attention_domain,
  attention_popularity,
};
const char* expl_source_name(ExplSource s);

struct ExplEntity {
  std::string name;
  double score;  // M for path evidence, attention weight for traces
  bool operator==(const ExplEntity&) const = default;
};

struct Explanation {
  ExplSource source = ExplSource::path;
  std::vector<Relation> user_side;  // path source only
  std::vector<Relation> item_side;
  EntityType meet = EntityType::item;  // meeting type / attention domain
  std::vector<ExplEntity> evidence;    // scored entities backing the claim
  int percent = -1;                    // attention share, -1 when absent
  double score = 0.0;                  // ranking score within the group
  std::string text;

  // Entity names shown by the template: evidence names for entity-bearing
  // templates, nothing for the others.
  bool shows_entities() const {
    return source == ExplSource::attention_domain ||
           (source == ExplSource::path && meet != EntityType::item);
  }
};

struct ExplanationGroup {
  enum class Kind : std::uint8_t { mae = 0, mie = 1 };
  Kind kind = Kind::mae;
  std::vector<Explanation> explanations;  // descending score, at most 3
};

std::string render(const Templates& tpl, const Explanation& e,
                   const std::string& query_text);

// Model-agnostic group: the top-3 paths that beat the zero-hop direct
// match, or the direct match alone when nothing does.
ExplanationGroup explain_mae(std::uint32_t user,
                             std::span<const std::uint32_t> words,
                             std::uint32_t item, const Corpus& corpus,
                             const EmbeddingStore& store,
                             const Templates& tpl,
                             const std::string& query_text,
                             double gamma = 1.0,
                             std::uint32_t max_extra_per_side = 2);

// Model-intrinsic group: nonempty attention domains and the popularity
// gate ranked by top-level weight, top 3 kept, entity and percent shares
// read straight off the trace.
ExplanationGroup explain_mie(std::uint32_t user,
                             std::span<const std::uint32_t> words,
                             std::uint32_t item, const Corpus& corpus,
                             const EmbeddingStore& store,
                             const Templates& tpl,
                             const std::string& query_text,
                             std::uint32_t omega_cap);

// log P(item | user, query) restricted to the retrieved top-k candidates
// plus the item itself.
double log_purchase_prob(std::uint32_t user,
                         std::span<const std::uint32_t> words,
                         std::uint32_t item, const Corpus& corpus,
                         const EmbeddingStore& store, std::uint32_t k,
                         std::uint32_t omega_cap);

// One explained (user, query, item) case with both groups and the
// group-level model outputs needed downstream.
struct ExplanationCase {
  std::string user;
  std::string item;
  std::string query_key;
  std::string query_text;
  ExplanationGroup mae;
  ExplanationGroup mie;
  double mrr = 0.0;
  double log_purchase_prob = 0.0;
};

// JSON lines, one case per line, full provenance, %.17g numbers.
void write_explanations(std::span<const ExplanationCase> cases,
                        const std::string& path);
std::vector<ExplanationCase> read_explanations(const std::string& path);

}  // namespace lkg

#endif  // LKG_EXPLAIN_HPP_
