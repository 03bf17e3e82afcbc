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

#ifndef LKG_QUALITY_HPP_
#define LKG_QUALITY_HPP_

// Explanation-quality pipeline: per-group feature vectors grounded in corpus
// statistics, pairwise preference datasets built from human annotations, a
// cross-validated preference predictor, and annotator-agreement utilities.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/explain.hpp"
#include "lkg/gbdt.hpp"

namespace lkg {

// ---------------------------------------------------------------------------
// Corpus statistics behind the entity-level features.

// Association tables counted once over the corpus. User associations walk
// train purchases and the purchased items' outgoing links, with multiplicity
// (a user who bought three items of one brand holds that brand association
// with count 3). Item associations count outgoing triples per head item.
class CorpusStats {
 public:
  static CorpusStats build(const Corpus& c);

  // ln(|U| / (1 + distinct users associated with the entity)). Unseen
  // entities get ln |U|.
  double iuf(EntityType type, std::uint32_t id) const;
  // Same shape over distinct associated items.
  double iif(EntityType type, std::uint32_t id) const;

  // Pointwise mutual information with add-one smoothing on the pair count
  // and both marginals: ln(N (c(a,e)+1) / ((c(a)+1) (c(e)+1))).
  double user_pmi(std::uint32_t user, EntityType type, std::uint32_t id) const;
  double item_pmi(std::uint32_t item, EntityType type, std::uint32_t id) const;

  // Shannon entropy of the per-user multiplicity distribution of one
  // (relation, entity) association. Zero or one holder gives 0.
  double relation_entropy(Relation rel, EntityType type,
                          std::uint32_t id) const;

  std::uint64_t user_count() const { return users_; }
  std::uint64_t item_count() const { return items_; }

 private:
  using CountMap = std::unordered_map<std::uint32_t, std::uint32_t>;

  const CountMap* user_map(EntityType type, std::uint32_t id) const;
  const CountMap* item_map(EntityType type, std::uint32_t id) const;
  const CountMap* rel_map(Relation rel, std::uint32_t id) const;

  std::uint64_t users_ = 0;
  std::uint64_t items_ = 0;
  // Indexed [entity type][entity id] -> counterparty -> multiplicity.
  std::array<std::vector<CountMap>, kEntityTypeCount> user_assoc_;
  std::array<std::vector<CountMap>, kEntityTypeCount> item_assoc_;
  // Indexed [relation][tail id] -> user -> multiplicity.
  std::array<std::vector<CountMap>, kRelationCount> rel_users_;
  std::vector<std::uint64_t> user_totals_;  // per user id
  std::vector<std::uint64_t> item_totals_;  // per item id
  std::array<std::vector<std::uint64_t>, kEntityTypeCount> entity_user_totals_;
  std::array<std::vector<std::uint64_t>, kEntityTypeCount> entity_item_totals_;
  std::uint64_t user_grand_total_ = 0;
  std::uint64_t item_grand_total_ = 0;
};

// ---------------------------------------------------------------------------
// Explanation-level features.

// Per-claim model confidence: knowledge-path explanations carry one matching
// score per evidence entity; attention explanations claim observed
// associations, so their confidence is the constant 1.
std::vector<double> feature_exist_confidence(const Explanation& e);

// Fraction of the explanation's association claims realized by corpus data.
// A path claims, per entity, one user-side chain (some train purchase of the
// user reaches the entity through the path's extra relations) and one
// item-side chain from the explained item. Attention entities claim a single
// direct user association. An explanation with no claims is vacuously 1.
double feature_existence_rate(const Explanation& e, std::uint32_t user,
                              std::uint32_t item, const Corpus& c);

// The relation tying the user's purchases to an evidence entity: the last
// user-side hop for paths with extra hops, otherwise the entity domain's own
// link (purchase for items, brand/category links for the rest).
Relation arriving_relation(const Explanation& e);

// ---------------------------------------------------------------------------
// Group feature vectors.

// Layout: 3 explanation slots, each a presence flag plus (max, min, mean)
// over evidence entities of the 7 entity features, then the two group-level
// scores. group_feature_names() documents every position.
inline constexpr std::size_t kGroupFeatureLength = 3 * (1 + 7 * 3) + 2;

const std::vector<std::string>& group_feature_names();

struct GroupContext {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double mrr = 0.0;
  double log_purchase_prob = 0.0;
};

std::vector<double> build_group_vector(const ExplanationGroup& g,
                                       const GroupContext& ctx,
                                       const Corpus& c,
                                       const CorpusStats& stats);

// ---------------------------------------------------------------------------
// Annotations and preference pairs.

enum class Aspect : std::uint8_t {
  informativeness = 0,
  usefulness,
  satisfaction,
};
inline constexpr int kAspectCount = 3;
const char* aspect_name(Aspect a);
std::optional<Aspect> aspect_from(std::string_view s);

// Preference labels relative to the pair's display order: "first" means the
// A side, the group shown first.
enum class PrefLabel : std::uint8_t { first = 0, second, equal, none };
const char* pref_label_name(PrefLabel l);
std::optional<PrefLabel> pref_label_from(std::string_view s);
PrefLabel mirror_label(PrefLabel l);

// Modal label of exactly three annotations; a three-way tie is "equal".
PrefLabel majority_vote(std::span<const PrefLabel> labels);

struct Annotation {
  std::string case_id;
  Aspect aspect = Aspect::informativeness;
  std::string worker;
  PrefLabel label = PrefLabel::equal;
  bool operator==(const Annotation&) const = default;
};

// CSV with header case_id,aspect,worker_id,label; label in {A,B,equal,none}.
std::vector<Annotation> read_annotations(const std::string& path);
void write_annotations(std::span<const Annotation> rows,
                       const std::string& path);

// Which anonymized side holds the attention-trace group, per case.
// CSV with header case_id,group_a; group_a in {mie,mae}.
using CaseManifest = std::map<std::string, bool>;  // true: A side is MIE
CaseManifest read_manifest(const std::string& path);
void write_manifest(const CaseManifest& m, const std::string& path);

std::string case_id_of(const ExplanationCase& c);

struct PreferencePair {
  std::string case_id;
  Aspect aspect = Aspect::informativeness;
  std::vector<double> features;  // A-side vector then B-side vector
  PrefLabel label = PrefLabel::equal;
  bool operator==(const PreferencePair&) const = default;
};

// One forward and one mirrored backward pair per case and aspect. Feature
// sides follow the manifest; labels come from the majority vote over each
// case-aspect's three annotations. Throws when a case misses its manifest
// entry or any aspect's annotations. `threads` parallelizes the per-case
// feature extraction.
std::vector<PreferencePair> build_pair_dataset(
    std::span<const ExplanationCase> cases,
    std::span<const Annotation> annotations, const CaseManifest& manifest,
    const Corpus& c, const CorpusStats& stats, unsigned threads = 1);

// CSV with header case_id,aspect,label,a_<feature names...>,b_<...>.
void write_pairs_csv(std::span<const PreferencePair> pairs,
                     const std::string& path);
std::vector<PreferencePair> read_pairs_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Cross-validated preference prediction.

struct GbdtGrid {
  std::vector<int> depths = {5, 10, 20};
  std::vector<int> leaves = {10, 20, 30};
  std::vector<int> min_leaf = {10, 30, 50};
  std::vector<double> learning_rates = {0.1, 0.3, 0.5};
  int trees = 50;
};

struct CvRow {
  Aspect aspect = Aspect::informativeness;
  int total = 0;
  int correct = 0;   // prediction agrees with the voted label
  int type1 = 0;     // truth is equal/none but a preference was predicted
  int type2 = 0;     // truth prefers one side and the model disagrees
  GbdtParams chosen;
};

// Per aspect: deterministic case-level folds (mirrored pairs always share a
// fold), one grid sweep scored by total correct pairs over all folds, best
// grid point reported. Throws when folds < 2 or an aspect has fewer cases
// than folds.
std::vector<CvRow> cross_validate(std::span<const PreferencePair> pairs,
                                  int folds, const GbdtGrid& grid,
                                  std::uint64_t seed);

// CSV with header aspect,total,correct,type1,type2.
void write_cv_report(std::span<const CvRow> rows, const std::string& path);

// ---------------------------------------------------------------------------
// Agreement statistics.

// Per-case binary judgment counts (category counts sum to the rater count,
// identical across cases). Throws on ragged input or when every judgment
// lands in one category (chance agreement 1 leaves kappa undefined).
double fleiss_kappa(std::span<const std::array<int, 2>> counts);

// Per-case (rated MIE better, rated otherwise) counts for one aspect.
std::vector<std::array<int, 2>> mie_better_counts(
    std::span<const Annotation> annotations, const CaseManifest& manifest,
    Aspect aspect);

// Sample Pearson correlation; throws on length mismatch, fewer than two
// points, or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace lkg

#endif  // LKG_QUALITY_HPP_
