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

#include "lkg/quality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "lkg/rng.hpp"

namespace lkg {
namespace {

void append_g17(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line,
                          const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

const std::vector<std::vector<std::uint32_t>>& adjacency(const Corpus& c,
                                                         Relation rel) {
  switch (rel) {
    case Relation::also_bought:
      return c.item_also_bought;
    case Relation::also_viewed:
      return c.item_also_viewed;
    case Relation::bought_together:
      return c.item_bought_together;
    case Relation::brand:
      return c.item_brands;
    case Relation::category:
      return c.item_categories;
    case Relation::search_purchase:
      break;
  }
  throw std::invalid_argument("no item adjacency for this relation");
}

const std::vector<std::uint32_t>& user_domain(const Corpus& c,
                                              EntityType type,
                                              std::uint32_t user) {
  switch (type) {
    case EntityType::item:
      return c.user_items[user];
    case EntityType::brand:
      return c.user_brands[user];
    case EntityType::category:
      return c.user_categories[user];
    default:
      throw std::invalid_argument("entity type has no user association set");
  }
}

bool chain_reaches(const Corpus& c, std::vector<std::uint32_t> frontier,
                   std::span<const Relation> chain, std::uint32_t target) {
  for (Relation rel : chain) {
    const auto& adj = adjacency(c, rel);
    std::unordered_set<std::uint32_t> next;
    for (std::uint32_t id : frontier) {
      for (std::uint32_t t : adj[id]) next.insert(t);
    }
    frontier.assign(next.begin(), next.end());
    if (frontier.empty()) return false;
  }
  return std::find(frontier.begin(), frontier.end(), target) !=
         frontier.end();
}

struct Agg {
  double max = 0.0, min = 0.0, mean = 0.0;
};

Agg aggregate(const std::vector<double>& v) {
  Agg a;
  if (v.empty()) return a;
  a.max = *std::max_element(v.begin(), v.end());
  a.min = *std::min_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  a.mean = s / static_cast<double>(v.size());
  return a;
}

double smoothed_pmi(std::uint64_t joint, std::uint64_t ca, std::uint64_t ce,
                    std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::log(static_cast<double>(n) * (static_cast<double>(joint) + 1.0) /
                  ((static_cast<double>(ca) + 1.0) *
                   (static_cast<double>(ce) + 1.0)));
}

constexpr const char* kAnnotationHeader = "case_id,aspect,worker_id,label";
constexpr const char* kManifestHeader = "case_id,group_a";
constexpr const char* kCvHeader = "aspect,total,correct,type1,type2";

}  // namespace

// ---------------------------------------------------------------------------
// CorpusStats

CorpusStats CorpusStats::build(const Corpus& c) {
  CorpusStats s;
  s.users_ = c.users.size();
  s.items_ = c.items.size();
  for (int t = 0; t < kEntityTypeCount; ++t) {
    const auto n = c.registry(static_cast<EntityType>(t)).size();
    s.user_assoc_[t].resize(n);
    s.item_assoc_[t].resize(n);
    s.entity_user_totals_[t].assign(n, 0);
    s.entity_item_totals_[t].assign(n, 0);
  }
  for (int r = 0; r < kRelationCount; ++r) {
    const auto rel = static_cast<Relation>(r);
    s.rel_users_[r].resize(c.registry(relation_tail_type(rel)).size());
  }
  s.user_totals_.assign(c.users.size(), 0);
  s.item_totals_.assign(c.items.size(), 0);

  const auto bump_user = [&](std::uint32_t user, Relation rel,
                             EntityType type, std::uint32_t id) {
    const auto t = static_cast<std::size_t>(type);
    ++s.user_assoc_[t][id][user];
    ++s.rel_users_[static_cast<std::size_t>(rel)][id][user];
    ++s.entity_user_totals_[t][id];
    ++s.user_totals_[user];
    ++s.user_grand_total_;
  };

  for (const PurchaseRecord& p : c.purchases) {
    if (p.split != Split::train) continue;
    bump_user(p.user, Relation::search_purchase, EntityType::item, p.item);
    for (std::uint32_t t : c.item_also_bought[p.item]) {
      bump_user(p.user, Relation::also_bought, EntityType::item, t);
    }
    for (std::uint32_t t : c.item_also_viewed[p.item]) {
      bump_user(p.user, Relation::also_viewed, EntityType::item, t);
    }
    for (std::uint32_t t : c.item_bought_together[p.item]) {
      bump_user(p.user, Relation::bought_together, EntityType::item, t);
    }
    for (std::uint32_t t : c.item_brands[p.item]) {
      bump_user(p.user, Relation::brand, EntityType::brand, t);
    }
    for (std::uint32_t t : c.item_categories[p.item]) {
      bump_user(p.user, Relation::category, EntityType::category, t);
    }
  }

  for (const Triple& t : c.triples) {
    const auto type = static_cast<std::size_t>(t.tail.type);
    ++s.item_assoc_[type][t.tail.id][t.head.id];
    ++s.entity_item_totals_[type][t.tail.id];
    ++s.item_totals_[t.head.id];
    ++s.item_grand_total_;
  }
  return s;
}

const CorpusStats::CountMap* CorpusStats::user_map(EntityType type,
                                                   std::uint32_t id) const {
  const auto& table = user_assoc_[static_cast<std::size_t>(type)];
  return id < table.size() ? &table[id] : nullptr;
}

const CorpusStats::CountMap* CorpusStats::item_map(EntityType type,
                                                   std::uint32_t id) const {
  const auto& table = item_assoc_[static_cast<std::size_t>(type)];
  return id < table.size() ? &table[id] : nullptr;
}

const CorpusStats::CountMap* CorpusStats::rel_map(Relation rel,
                                                  std::uint32_t id) const {
  const auto& table = rel_users_[static_cast<std::size_t>(rel)];
  return id < table.size() ? &table[id] : nullptr;
}

double CorpusStats::iuf(EntityType type, std::uint32_t id) const {
  const CountMap* m = user_map(type, id);
  const double holders = m ? static_cast<double>(m->size()) : 0.0;
  return std::log(static_cast<double>(users_) / (1.0 + holders));
}

double CorpusStats::iif(EntityType type, std::uint32_t id) const {
  const CountMap* m = item_map(type, id);
  const double holders = m ? static_cast<double>(m->size()) : 0.0;
  return std::log(static_cast<double>(items_) / (1.0 + holders));
}

double CorpusStats::user_pmi(std::uint32_t user, EntityType type,
                             std::uint32_t id) const {
  const CountMap* m = user_map(type, id);
  std::uint64_t joint = 0;
  if (m != nullptr) {
    auto it = m->find(user);
    if (it != m->end()) joint = it->second;
  }
  const std::uint64_t ca =
      user < user_totals_.size() ? user_totals_[user] : 0;
  const std::uint64_t ce =
      entity_user_totals_[static_cast<std::size_t>(type)][id];
  return smoothed_pmi(joint, ca, ce, user_grand_total_);
}

double CorpusStats::item_pmi(std::uint32_t item, EntityType type,
                             std::uint32_t id) const {
  const CountMap* m = item_map(type, id);
  std::uint64_t joint = 0;
  if (m != nullptr) {
    auto it = m->find(item);
    if (it != m->end()) joint = it->second;
  }
  const std::uint64_t ca =
      item < item_totals_.size() ? item_totals_[item] : 0;
  const std::uint64_t ce =
      entity_item_totals_[static_cast<std::size_t>(type)][id];
  return smoothed_pmi(joint, ca, ce, item_grand_total_);
}

double CorpusStats::relation_entropy(Relation rel, EntityType type,
                                     std::uint32_t id) const {
  if (relation_tail_type(rel) != type) {
    throw std::invalid_argument("relation does not reach this entity type");
  }
  const CountMap* m = rel_map(rel, id);
  if (m == nullptr || m->size() < 2) return 0.0;
  double total = 0.0;
  for (const auto& [_, n] : *m) total += static_cast<double>(n);
  double h = 0.0;
  for (const auto& [_, n] : *m) {
    const double p = static_cast<double>(n) / total;
    h -= p * std::log(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Explanation features

std::vector<double> feature_exist_confidence(const Explanation& e) {
  if (e.source == ExplSource::path) {
    std::vector<double> out;
    out.reserve(e.evidence.size());
    for (const ExplEntity& ev : e.evidence) out.push_back(ev.score);
    return out;
  }
  return {1.0};
}

double feature_existence_rate(const Explanation& e, std::uint32_t user,
                              std::uint32_t item, const Corpus& c) {
  if (e.source == ExplSource::attention_popularity) return 1.0;
  if (e.evidence.empty()) return 1.0;

  std::size_t claims = 0, realized = 0;
  if (e.source == ExplSource::attention_domain) {
    const auto& held = user_domain(c, e.meet, user);
    for (const ExplEntity& ev : e.evidence) {
      const auto id = static_cast<std::uint32_t>(
          c.registry(e.meet).find(ev.name));
      ++claims;
      if (std::find(held.begin(), held.end(), id) != held.end()) ++realized;
    }
    return static_cast<double>(realized) / static_cast<double>(claims);
  }

  std::span<const Relation> user_chain(e.user_side);
  user_chain = user_chain.subspan(1);  // drop the purchase edge
  for (const ExplEntity& ev : e.evidence) {
    const auto found = c.registry(e.meet).find(ev.name);
    if (found < 0) {
      throw std::invalid_argument("evidence entity not in corpus: " + ev.name);
    }
    const auto id = static_cast<std::uint32_t>(found);
    claims += 2;
    if (chain_reaches(c, c.user_items[user], user_chain, id)) ++realized;
    if (chain_reaches(c, {item}, e.item_side, id)) ++realized;
  }
  return static_cast<double>(realized) / static_cast<double>(claims);
}

Relation arriving_relation(const Explanation& e) {
  if (e.source == ExplSource::path && e.user_side.size() > 1) {
    return e.user_side.back();
  }
  switch (e.meet) {
    case EntityType::item:
      return Relation::search_purchase;
    case EntityType::brand:
      return Relation::brand;
    case EntityType::category:
      return Relation::category;
    default:
      throw std::invalid_argument("no arriving relation for this entity type");
  }
}

// ---------------------------------------------------------------------------
// Group vectors

const std::vector<std::string>& group_feature_names() {
  static const std::vector<std::string> names = [] {
    const char* feats[] = {"exist_confidence",  "existence_rate",
                           "entity_iuf",        "entity_iif",
                           "user_entity_pmi",   "item_entity_pmi",
                           "relation_entropy"};
    const char* aggs[] = {"max", "min", "mean"};
    std::vector<std::string> v;
    for (int slot = 1; slot <= 3; ++slot) {
      const std::string prefix = "slot" + std::to_string(slot) + "_";
      v.push_back(prefix + "present");
      for (const char* f : feats) {
        for (const char* a : aggs) {
          v.push_back(prefix + f + "_" + a);
        }
      }
    }
    v.push_back("model_mrr");
    v.push_back("log_purchase_prob");
    return v;
  }();
  return names;
}

std::vector<double> build_group_vector(const ExplanationGroup& g,
                                       const GroupContext& ctx,
                                       const Corpus& c,
                                       const CorpusStats& stats) {
  if (g.explanations.size() > 3) {
    throw std::invalid_argument("explanation group larger than 3");
  }
  std::vector<double> out;
  out.reserve(kGroupFeatureLength);
  const auto push_agg = [&out](const Agg& a) {
    out.push_back(a.max);
    out.push_back(a.min);
    out.push_back(a.mean);
  };

  for (std::size_t slot = 0; slot < 3; ++slot) {
    if (slot >= g.explanations.size()) {
      out.insert(out.end(), 1 + 7 * 3, 0.0);
      continue;
    }
    const Explanation& e = g.explanations[slot];
    out.push_back(1.0);

    push_agg(aggregate(feature_exist_confidence(e)));
    const double rate = feature_existence_rate(e, ctx.user, ctx.item, c);
    push_agg(Agg{rate, rate, rate});

    std::vector<double> iuf, iif, upmi, ipmi, rent;
    const Relation rel = arriving_relation(e);
    for (const ExplEntity& ev : e.evidence) {
      const auto found = c.registry(e.meet).find(ev.name);
      if (found < 0) {
        throw std::invalid_argument("evidence entity not in corpus: " +
                                    ev.name);
      }
      const auto id = static_cast<std::uint32_t>(found);
      iuf.push_back(stats.iuf(e.meet, id));
      iif.push_back(stats.iif(e.meet, id));
      upmi.push_back(stats.user_pmi(ctx.user, e.meet, id));
      ipmi.push_back(stats.item_pmi(ctx.item, e.meet, id));
      rent.push_back(stats.relation_entropy(rel, e.meet, id));
    }
    push_agg(aggregate(iuf));
    push_agg(aggregate(iif));
    push_agg(aggregate(upmi));
    push_agg(aggregate(ipmi));
    push_agg(aggregate(rent));
  }
  out.push_back(ctx.mrr);
  out.push_back(ctx.log_purchase_prob);
  return out;
}

// ---------------------------------------------------------------------------
// Annotations

const char* aspect_name(Aspect a) {
  switch (a) {
    case Aspect::informativeness:
      return "informativeness";
    case Aspect::usefulness:
      return "usefulness";
    case Aspect::satisfaction:
      return "satisfaction";
  }
  throw std::invalid_argument("bad aspect");
}

std::optional<Aspect> aspect_from(std::string_view s) {
  for (int a = 0; a < kAspectCount; ++a) {
    if (s == aspect_name(static_cast<Aspect>(a))) {
      return static_cast<Aspect>(a);
    }
  }
  return std::nullopt;
}

const char* pref_label_name(PrefLabel l) {
  switch (l) {
    case PrefLabel::first:
      return "first";
    case PrefLabel::second:
      return "second";
    case PrefLabel::equal:
      return "equal";
    case PrefLabel::none:
      return "none";
  }
  throw std::invalid_argument("bad label");
}

std::optional<PrefLabel> pref_label_from(std::string_view s) {
  if (s == "A" || s == "first") return PrefLabel::first;
  if (s == "B" || s == "second") return PrefLabel::second;
  if (s == "equal") return PrefLabel::equal;
  if (s == "none") return PrefLabel::none;
  return std::nullopt;
}

PrefLabel mirror_label(PrefLabel l) {
  if (l == PrefLabel::first) return PrefLabel::second;
  if (l == PrefLabel::second) return PrefLabel::first;
  return l;
}

PrefLabel majority_vote(std::span<const PrefLabel> labels) {
  if (labels.size() != 3) {
    throw std::invalid_argument("majority vote needs exactly 3 labels");
  }
  int counts[4] = {0, 0, 0, 0};
  for (PrefLabel l : labels) ++counts[static_cast<int>(l)];
  for (int i = 0; i < 4; ++i) {
    if (counts[i] >= 2) return static_cast<PrefLabel>(i);
  }
  return PrefLabel::equal;
}

std::vector<Annotation> read_annotations(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<Annotation> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != kAnnotationHeader) fail_at(path, lineno, "bad header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) fail_at(path, lineno, "expected 4 columns");
    Annotation a;
    a.case_id = std::string(f[0]);
    const auto aspect = aspect_from(f[1]);
    if (!aspect) fail_at(path, lineno, "unknown aspect");
    a.aspect = *aspect;
    a.worker = std::string(f[2]);
    const auto label = pref_label_from(f[3]);
    if (!label) fail_at(path, lineno, "unknown label");
    a.label = *label;
    out.push_back(std::move(a));
  }
  return out;
}

void write_annotations(std::span<const Annotation> rows,
                       const std::string& path) {
  std::ofstream out = open_out(path);
  out << kAnnotationHeader << "\n";
  for (const Annotation& a : rows) {
    const char* raw = a.label == PrefLabel::first    ? "A"
                      : a.label == PrefLabel::second ? "B"
                                                     : pref_label_name(a.label);
    out << a.case_id << "," << aspect_name(a.aspect) << "," << a.worker << ","
        << raw << "\n";
  }
}

CaseManifest read_manifest(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  CaseManifest m;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != kManifestHeader) fail_at(path, lineno, "bad header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 2) fail_at(path, lineno, "expected 2 columns");
    bool a_is_mie;
    if (f[1] == "mie") {
      a_is_mie = true;
    } else if (f[1] == "mae") {
      a_is_mie = false;
    } else {
      fail_at(path, lineno, "group_a must be mie or mae");
    }
    if (!m.emplace(std::string(f[0]), a_is_mie).second) {
      fail_at(path, lineno, "duplicate case id");
    }
  }
  return m;
}

void write_manifest(const CaseManifest& m, const std::string& path) {
  std::ofstream out = open_out(path);
  out << kManifestHeader << "\n";
  for (const auto& [id, a_is_mie] : m) {
    out << id << "," << (a_is_mie ? "mie" : "mae") << "\n";
  }
}

std::string case_id_of(const ExplanationCase& c) {
  return c.query_key + "|" + c.item;
}

// ---------------------------------------------------------------------------
// Pair dataset

std::vector<PreferencePair> build_pair_dataset(
    std::span<const ExplanationCase> cases,
    std::span<const Annotation> annotations, const CaseManifest& manifest,
    const Corpus& c, const CorpusStats& stats, unsigned threads) {
  // Voted label per (case, aspect).
  std::map<std::pair<std::string, int>, std::vector<PrefLabel>> raw;
  for (const Annotation& a : annotations) {
    raw[{a.case_id, static_cast<int>(a.aspect)}].push_back(a.label);
  }

  // MIE and MAE vectors per case, extracted in parallel.
  std::vector<std::vector<double>> mie_vec(cases.size()), mae_vec(cases.size());
  const auto extract = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const ExplanationCase& cs = cases[i];
      const auto user = c.users.find(cs.user);
      const auto item = c.items.find(cs.item);
      if (user < 0 || item < 0) {
        throw std::invalid_argument("case references unknown user or item: " +
                                    case_id_of(cs));
      }
      GroupContext ctx{static_cast<std::uint32_t>(user),
                       static_cast<std::uint32_t>(item), cs.mrr,
                       cs.log_purchase_prob};
      mie_vec[i] = build_group_vector(cs.mie, ctx, c, stats);
      mae_vec[i] = build_group_vector(cs.mae, ctx, c, stats);
    }
  };
  if (threads <= 1 || cases.size() < 2) {
    extract(0, cases.size());
  } else {
    const unsigned n = std::min<unsigned>(threads,
                                          static_cast<unsigned>(cases.size()));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    const std::size_t chunk = (cases.size() + n - 1) / n;
    for (unsigned t = 0; t < n; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(cases.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, t, begin, end] {
        try {
          extract(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  std::vector<PreferencePair> out;
  out.reserve(cases.size() * kAspectCount * 2);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string id = case_id_of(cases[i]);
    const auto mit = manifest.find(id);
    if (mit == manifest.end()) {
      throw std::runtime_error("missing manifest entry for case " + id);
    }
    const auto& va = mit->second ? mie_vec[i] : mae_vec[i];
    const auto& vb = mit->second ? mae_vec[i] : mie_vec[i];
    for (int a = 0; a < kAspectCount; ++a) {
      const auto rit = raw.find({id, a});
      if (rit == raw.end()) {
        throw std::runtime_error(
            "missing label for case " + id + " aspect " +
            aspect_name(static_cast<Aspect>(a)));
      }
      const PrefLabel label = majority_vote(rit->second);

      PreferencePair fwd;
      fwd.case_id = id;
      fwd.aspect = static_cast<Aspect>(a);
      fwd.features = va;
      fwd.features.insert(fwd.features.end(), vb.begin(), vb.end());
      fwd.label = label;
      PreferencePair bwd;
      bwd.case_id = id;
      bwd.aspect = fwd.aspect;
      bwd.features = vb;
      bwd.features.insert(bwd.features.end(), va.begin(), va.end());
      bwd.label = mirror_label(label);
      out.push_back(std::move(fwd));
      out.push_back(std::move(bwd));
    }
  }
  return out;
}

void write_pairs_csv(std::span<const PreferencePair> pairs,
                     const std::string& path) {
  std::ofstream out = open_out(path);
  std::string header = "case_id,aspect,label";
  for (const char* side : {"a_", "b_"}) {
    for (const std::string& n : group_feature_names()) {
      header += ",";
      header += side;
      header += n;
    }
  }
  out << header << "\n";
  std::string row;
  for (const PreferencePair& p : pairs) {
    row.clear();
    row += p.case_id;
    row += ",";
    row += aspect_name(p.aspect);
    row += ",";
    row += pref_label_name(p.label);
    for (double v : p.features) {
      row += ",";
      append_g17(row, v);
    }
    out << row << "\n";
  }
}

std::vector<PreferencePair> read_pairs_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  const std::size_t width = 2 * kGroupFeatureLength;
  std::vector<PreferencePair> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      const auto f = split_csv(line);
      if (f.size() != 3 + width) fail_at(path, lineno, "bad header width");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3 + width) {
      fail_at(path, lineno, "expected " + std::to_string(3 + width) +
                                " columns");
    }
    PreferencePair p;
    p.case_id = std::string(f[0]);
    const auto aspect = aspect_from(f[1]);
    if (!aspect) fail_at(path, lineno, "unknown aspect");
    p.aspect = *aspect;
    const auto label = pref_label_from(f[2]);
    if (!label) fail_at(path, lineno, "unknown label");
    p.label = *label;
    p.features.reserve(width);
    for (std::size_t i = 3; i < f.size(); ++i) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(std::string(f[i]), &used);
      } catch (const std::exception&) {
        fail_at(path, lineno, "bad number");
      }
      if (used != f[i].size()) fail_at(path, lineno, "bad number");
      p.features.push_back(v);
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross validation

std::vector<CvRow> cross_validate(std::span<const PreferencePair> pairs,
                                  int folds, const GbdtGrid& grid,
                                  std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross_validate: folds < 2");
  if (grid.depths.empty() || grid.leaves.empty() || grid.min_leaf.empty() ||
      grid.learning_rates.empty()) {
    throw std::invalid_argument("cross_validate: empty hyperparameter grid");
  }

  std::vector<GbdtParams> candidates;
  for (int d : grid.depths) {
    for (int l : grid.leaves) {
      for (int m : grid.min_leaf) {
        for (double lr : grid.learning_rates) {
          GbdtParams p;
          p.max_depth = d;
          p.max_leaves = l;
          p.min_leaf_rows = m;
          p.learning_rate = lr;
          p.trees = grid.trees;
          p.validate();
          candidates.push_back(p);
        }
      }
    }
  }

  std::vector<CvRow> report;
  for (int a = 0; a < kAspectCount; ++a) {
    const auto aspect = static_cast<Aspect>(a);
    std::vector<const PreferencePair*> subset;
    for (const PreferencePair& p : pairs) {
      if (p.aspect == aspect) subset.push_back(&p);
    }
    if (subset.empty()) continue;

    // Case-level folds keep each mirrored pair together.
    std::vector<std::string> case_ids;
    std::unordered_map<std::string, int> fold_of;
    for (const PreferencePair* p : subset) {
      if (fold_of.emplace(p->case_id, 0).second) {
        case_ids.push_back(p->case_id);
      }
    }
    if (static_cast<int>(case_ids.size()) < folds) {
      throw std::invalid_argument("cross_validate: more folds than cases");
    }
    Rng rng = Rng(seed).fork(aspect_name(aspect));
    rng.shuffle(case_ids);
    for (std::size_t i = 0; i < case_ids.size(); ++i) {
      fold_of[case_ids[i]] = static_cast<int>(i % folds);
    }

    CvRow best;
    bool have_best = false;
    for (const GbdtParams& params : candidates) {
      CvRow row;
      row.aspect = aspect;
      row.chosen = params;
      for (int f = 0; f < folds; ++f) {
        std::vector<std::vector<double>> train_x;
        std::vector<int> train_y;
        std::vector<const PreferencePair*> test;
        for (const PreferencePair* p : subset) {
          if (fold_of[p->case_id] == f) {
            test.push_back(p);
          } else {
            train_x.push_back(p->features);
            train_y.push_back(p->label == PrefLabel::first ? 1 : 0);
          }
        }
        const GbdtModel model = gbdt_train(train_x, train_y, params);
        for (const PreferencePair* p : test) {
          const bool first_preferred = model.decision(p->features) > 0.0;
          ++row.total;
          switch (p->label) {
            case PrefLabel::first:
              first_preferred ? ++row.correct : ++row.type2;
              break;
            case PrefLabel::second:
              first_preferred ? ++row.type2 : ++row.correct;
              break;
            default:
              first_preferred ? ++row.type1 : ++row.correct;
              break;
          }
        }
      }
      if (!have_best || row.correct > best.correct) {
        best = row;
        have_best = true;
      }
    }
    report.push_back(best);
  }
  return report;
}

void write_cv_report(std::span<const CvRow> rows, const std::string& path) {
  std::ofstream out = open_out(path);
  out << kCvHeader << "\n";
  for (const CvRow& r : rows) {
    out << aspect_name(r.aspect) << "," << r.total << "," << r.correct << ","
        << r.type1 << "," << r.type2 << "\n";
  }
}

// ---------------------------------------------------------------------------
// Agreement statistics

double fleiss_kappa(std::span<const std::array<int, 2>> counts) {
  if (counts.empty()) throw std::invalid_argument("fleiss_kappa: no cases");
  const int raters = counts[0][0] + counts[0][1];
  if (raters < 2) {
    throw std::invalid_argument("fleiss_kappa: need at least 2 raters");
  }
  double sum0 = 0.0, sum1 = 0.0, agree = 0.0;
  for (const auto& row : counts) {
    if (row[0] < 0 || row[1] < 0 || row[0] + row[1] != raters) {
      throw std::invalid_argument("fleiss_kappa: ragged rating counts");
    }
    sum0 += row[0];
    sum1 += row[1];
    agree += static_cast<double>(row[0]) * (row[0] - 1) +
             static_cast<double>(row[1]) * (row[1] - 1);
  }
  const double n = static_cast<double>(counts.size());
  const double p0 = sum0 / (n * raters);
  const double p1 = sum1 / (n * raters);
  const double pe = p0 * p0 + p1 * p1;
  if (pe >= 1.0) {
    throw std::domain_error(
        "fleiss_kappa: all ratings in one category, kappa undefined");
  }
  const double pbar = agree / (n * raters * (raters - 1));
  return (pbar - pe) / (1.0 - pe);
}

std::vector<std::array<int, 2>> mie_better_counts(
    std::span<const Annotation> annotations, const CaseManifest& manifest,
    Aspect aspect) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::array<int, 2>> counts;
  for (const Annotation& a : annotations) {
    if (a.aspect != aspect) continue;
    const auto mit = manifest.find(a.case_id);
    if (mit == manifest.end()) {
      throw std::runtime_error("missing manifest entry for case " + a.case_id);
    }
    const bool mie_better = (a.label == PrefLabel::first && mit->second) ||
                            (a.label == PrefLabel::second && !mit->second);
    auto [it, added] = index.emplace(a.case_id, counts.size());
    if (added) counts.push_back({0, 0});
    ++counts[it->second][mie_better ? 0 : 1];
  }
  return counts;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("pearson: length mismatch");
  }
  if (x.size() < 2) throw std::invalid_argument("pearson: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::domain_error("pearson: zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace lkg
