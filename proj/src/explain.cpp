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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "json.hpp"
#include "lkg/kernels.hpp"
#include "lkg/model.hpp"
#include "lkg/retrieval.hpp"

namespace lkg {

namespace {

constexpr std::uint32_t kExplainOmegaCap = 64;

std::span<const double> entity_row(const EmbeddingStore& store, EntityType t,
                                   std::uint32_t id) {
  switch (t) {
    case EntityType::item:
      return store.item_vec(id);
    case EntityType::brand:
      return store.brand_vec(id);
    case EntityType::category:
      return store.category_vec(id);
    case EntityType::user:
      return store.user_vec(id);
    default:
      return store.word_vec(id);
  }
}

double log_sum_exp(std::span<const double> xs) {
  double hi = xs[0];
  for (double x : xs) hi = std::max(hi, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

// Match scores of every candidate meeting entity for one shape.
std::vector<double> score_entities(const PathShape& shape, std::uint32_t user,
                                   std::span<const std::uint32_t> words,
                                   std::uint32_t item, const Corpus& corpus,
                                   const EmbeddingStore& store, double gamma) {
  const std::size_t n = corpus.registry(shape.meet).size();
  if (n == 0) {
    throw std::invalid_argument(
        std::string("soft_match: no entities of type ") +
        entity_type_name(shape.meet));
  }
  std::vector<double> eu =
      intent_vector(user, words, corpus, store, kExplainOmegaCap);
  for (std::size_t j = 1; j < shape.user_side.size(); ++j) {
    kernels::axpy(1.0, store.relation_vec(shape.user_side[j]), eu);
  }
  std::vector<double> ei(store.item_vec(item).begin(),
                         store.item_vec(item).end());
  for (Relation r : shape.item_side) {
    kernels::axpy(1.0, store.relation_vec(r), ei);
  }

  std::vector<double> su(n), si(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto row = entity_row(store, shape.meet, static_cast<std::uint32_t>(k));
    su[k] = kernels::dot(eu, row);
    si[k] = kernels::dot(ei, row);
  }
  const double lse_u = log_sum_exp(su);
  const double lse_i = log_sum_exp(si);
  const double pen_u = gamma * static_cast<double>(shape.user_extra());
  const double pen_i = gamma * static_cast<double>(shape.item_extra());

  std::vector<double> m(n);
  for (std::size_t k = 0; k < n; ++k) {
    m[k] = (su[k] - pen_u - lse_u) + (si[k] - pen_i - lse_i);
  }
  return m;
}

bool sequence_less(const std::vector<Relation>& a,
                   const std::vector<Relation>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// score desc, shorter first, lower best entity, then the sequences.
bool path_before(const InferencePath& a, const InferencePath& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto la = a.shape.user_extra() + a.shape.item_extra();
  const auto lb = b.shape.user_extra() + b.shape.item_extra();
  if (la != lb) return la < lb;
  if (a.entities[0].id != b.entities[0].id) {
    return a.entities[0].id < b.entities[0].id;
  }
  if (a.shape.user_side != b.shape.user_side) {
    return sequence_less(a.shape.user_side, b.shape.user_side);
  }
  return sequence_less(a.shape.item_side, b.shape.item_side);
}

std::string join_names(const std::vector<ExplEntity>& entities) {
  std::string out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (i) out += ", ";
    out += entities[i].name;
  }
  return out;
}

void replace_all(std::string& text, std::string_view key,
                 std::string_view value) {
  std::size_t at = 0;
  while ((at = text.find(key, at)) != std::string::npos) {
    text.replace(at, key.size(), value);
    at += value.size();
  }
}

const char* kSourceNames[] = {"path", "attention_domain",
                              "attention_popularity"};

}  // namespace

std::vector<PathShape> enumerate_paths(std::uint32_t max_extra_per_side) {
  if (max_extra_per_side < 1 || max_extra_per_side > 2) {
    throw std::invalid_argument(
        "enumerate_paths: max_extra_per_side must be 1 or 2");
  }
  // All relation sequences starting from `from`, with 0..max extra hops,
  // in breadth-first order (length, then relation value).
  const auto walks = [&](EntityType from) {
    std::vector<std::vector<Relation>> out = {{}};
    std::size_t level_begin = 0;
    for (std::uint32_t step = 0; step < max_extra_per_side; ++step) {
      const std::size_t level_end = out.size();
      for (std::size_t i = level_begin; i < level_end; ++i) {
        EntityType at = out[i].empty() ? from
                                       : relation_tail_type(out[i].back());
        for (int r = 0; r < kRelationCount; ++r) {
          const Relation rel = static_cast<Relation>(r);
          if (rel == Relation::search_purchase) continue;
          if (relation_head_type(rel) != at) continue;
          auto seq = out[i];
          seq.push_back(rel);
          out.push_back(std::move(seq));
        }
      }
      level_begin = level_end;
    }
    return out;
  };

  const auto ends_at = [](EntityType from, const std::vector<Relation>& seq) {
    return seq.empty() ? from : relation_tail_type(seq.back());
  };

  const auto user_walks = walks(EntityType::item);  // after search_purchase
  const auto item_walks = walks(EntityType::item);

  std::vector<PathShape> shapes;
  for (const auto& uw : user_walks) {
    for (const auto& iw : item_walks) {
      if (ends_at(EntityType::item, uw) != ends_at(EntityType::item, iw)) {
        continue;
      }
      PathShape s;
      s.user_side.reserve(uw.size() + 1);
      s.user_side.push_back(Relation::search_purchase);
      s.user_side.insert(s.user_side.end(), uw.begin(), uw.end());
      s.item_side = iw;
      s.meet = ends_at(EntityType::item, uw);
      shapes.push_back(std::move(s));
    }
  }
  return shapes;
}

double soft_match(const PathShape& shape, std::uint32_t entity,
                  std::uint32_t user, std::span<const std::uint32_t> words,
                  std::uint32_t item, const Corpus& corpus,
                  const EmbeddingStore& store, double gamma) {
  const auto m = score_entities(shape, user, words, item, corpus, store,
                                gamma);
  if (entity >= m.size()) {
    throw std::out_of_range("soft_match: entity outside the meeting type");
  }
  return m[entity];
}

std::vector<InferencePath> top_paths(std::uint32_t user,
                                     std::span<const std::uint32_t> words,
                                     std::uint32_t item, const Corpus& corpus,
                                     const EmbeddingStore& store, double gamma,
                                     std::uint32_t topk,
                                     std::uint32_t max_extra_per_side) {
  if (topk < 1) throw std::invalid_argument("top_paths: topk must be >= 1");
  std::vector<InferencePath> paths;
  for (auto& shape : enumerate_paths(max_extra_per_side)) {
    const std::size_t n = corpus.registry(shape.meet).size();
    if (n == 0) continue;
    const auto m = score_entities(shape, user, words, item, corpus, store,
                                  gamma);
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t k = 0; k < n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                if (m[a] != m[b]) return m[a] > m[b];
                return a < b;
              });
    InferencePath p;
    p.shape = std::move(shape);
    for (std::size_t k = 0; k < std::min<std::size_t>(3, n); ++k) {
      p.entities.push_back({order[k], m[order[k]]});
    }
    p.score = p.entities[0].m;
    paths.push_back(std::move(p));
  }
  std::sort(paths.begin(), paths.end(), path_before);
  if (paths.size() > topk) paths.resize(topk);
  return paths;
}

Templates Templates::defaults() {
  Templates t;
  t.t1 =
      "This product was retrieved because it is frequently {relation_phrase} "
      "with products retrieved by the query \"{query}\".";
  t.t2 =
      "This product was retrieved [{percent}% ]because the user often buys "
      "products with {domain} such as {entities}.";
  t.t3 =
      "This product was retrieved {percent}% because of its popularity under "
      "the query.";
  t.rel_phrase[static_cast<int>(Relation::search_purchase)] = "purchased";
  t.rel_phrase[static_cast<int>(Relation::also_bought)] = "also bought";
  t.rel_phrase[static_cast<int>(Relation::also_viewed)] = "also viewed";
  t.rel_phrase[static_cast<int>(Relation::bought_together)] =
      "bought together";
  t.rel_phrase[static_cast<int>(Relation::brand)] = "sharing a brand";
  t.rel_phrase[static_cast<int>(Relation::category)] = "sharing a category";
  t.direct_phrase = "directly matched";
  t.domain_word[static_cast<int>(EntityType::user)] = "users";
  t.domain_word[static_cast<int>(EntityType::item)] = "items";
  t.domain_word[static_cast<int>(EntityType::word)] = "words";
  t.domain_word[static_cast<int>(EntityType::brand)] = "brands";
  t.domain_word[static_cast<int>(EntityType::category)] = "categories";
  return t;
}

Templates Templates::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  Templates t = defaults();
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected id<TAB>text");
    }
    const std::string id = line.substr(0, tab);
    const std::string text = line.substr(tab + 1);
    if (id == "T1") {
      t.t1 = text;
    } else if (id == "T2") {
      t.t2 = text;
    } else if (id == "T3") {
      t.t3 = text;
    } else if (id == "rel.direct") {
      t.direct_phrase = text;
    } else if (id.rfind("rel.", 0) == 0) {
      auto rel = relation_from(id.substr(4));
      if (!rel) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unknown relation '" + id + "'");
      }
      t.rel_phrase[static_cast<int>(*rel)] = text;
    } else if (id.rfind("domain.", 0) == 0) {
      auto ty = entity_type_from(id.substr(7));
      if (!ty) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unknown entity type '" + id + "'");
      }
      t.domain_word[static_cast<int>(*ty)] = text;
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown template id '" + id + "'");
    }
  }
  return t;
}

void write_default_templates(const std::string& path) {
  const Templates t = Templates::defaults();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "T1\t" << t.t1 << '\n';
  out << "T2\t" << t.t2 << '\n';
  out << "T3\t" << t.t3 << '\n';
  out << "rel.direct\t" << t.direct_phrase << '\n';
  for (int r = 0; r < kRelationCount; ++r) {
    out << "rel." << relation_name(static_cast<Relation>(r)) << '\t'
        << t.rel_phrase[r] << '\n';
  }
  for (EntityType ty :
       {EntityType::item, EntityType::brand, EntityType::category}) {
    out << "domain." << entity_type_name(ty) << '\t'
        << t.domain_word[static_cast<int>(ty)] << '\n';
  }
  if (!out.flush()) throw std::runtime_error(path + ": write failed");
}

const char* expl_source_name(ExplSource s) {
  return kSourceNames[static_cast<int>(s)];
}

std::string render(const Templates& tpl, const Explanation& e,
                   const std::string& query_text) {
  std::string text;
  switch (e.source) {
    case ExplSource::path:
      text = (e.meet == EntityType::item) ? tpl.t1 : tpl.t2;
      break;
    case ExplSource::attention_domain:
      text = tpl.t2;
      break;
    case ExplSource::attention_popularity:
      text = tpl.t3;
      break;
  }

  // Optional [ ... ] block: kept (brackets stripped) only with a percent.
  const auto l = text.find('[');
  if (const auto r = text.find(']'); l != std::string::npos &&
                                     r != std::string::npos && l < r) {
    if (e.percent >= 0) {
      text.erase(r, 1);
      text.erase(l, 1);
    } else {
      text.erase(l, r - l + 1);
    }
  }

  std::string phrase;
  for (std::size_t j = 1; j < e.user_side.size(); ++j) {
    if (!phrase.empty()) phrase += " and ";
    phrase += tpl.rel_phrase[static_cast<int>(e.user_side[j])];
  }
  for (Relation r : e.item_side) {
    if (!phrase.empty()) phrase += " and ";
    phrase += tpl.rel_phrase[static_cast<int>(r)];
  }
  if (phrase.empty()) phrase = tpl.direct_phrase;

  replace_all(text, "{relation_phrase}", phrase);
  replace_all(text, "{query}", query_text);
  replace_all(text, "{domain}", tpl.domain_word[static_cast<int>(e.meet)]);
  replace_all(text, "{entities}",
              e.shows_entities() ? join_names(e.evidence) : "");
  replace_all(text, "{percent}",
              e.percent >= 0 ? std::to_string(e.percent) : "");
  return text;
}

ExplanationGroup explain_mae(std::uint32_t user,
                             std::span<const std::uint32_t> words,
                             std::uint32_t item, const Corpus& corpus,
                             const EmbeddingStore& store,
                             const Templates& tpl,
                             const std::string& query_text, double gamma,
                             std::uint32_t max_extra_per_side) {
  const auto all = top_paths(user, words, item, corpus, store, gamma,
                             std::numeric_limits<std::uint32_t>::max(),
                             max_extra_per_side);
  const PathShape direct{{Relation::search_purchase}, {}, EntityType::item};
  const InferencePath* direct_path = nullptr;
  for (const auto& p : all) {
    if (p.shape == direct) {
      direct_path = &p;
      break;
    }
  }
  // The item table is never empty, so the direct shape is always scored.
  const double floor = direct_path->score;

  const auto to_explanation = [&](const InferencePath& p) {
    Explanation e;
    e.source = ExplSource::path;
    e.user_side = p.shape.user_side;
    e.item_side = p.shape.item_side;
    e.meet = p.shape.meet;
    for (const auto& pe : p.entities) {
      e.evidence.push_back({corpus.registry(p.shape.meet).name(pe.id), pe.m});
    }
    e.score = p.score;
    e.text = render(tpl, e, query_text);
    return e;
  };

  ExplanationGroup group;
  group.kind = ExplanationGroup::Kind::mae;
  for (const auto& p : all) {
    if (group.explanations.size() == 3) break;
    if (p.score > floor && !(p.shape == direct)) {
      group.explanations.push_back(to_explanation(p));
    }
  }
  if (group.explanations.empty()) {
    group.explanations.push_back(to_explanation(*direct_path));
  }
  return group;
}

ExplanationGroup explain_mie(std::uint32_t user,
                             std::span<const std::uint32_t> words,
                             std::uint32_t item, const Corpus& corpus,
                             const EmbeddingStore& store,
                             const Templates& tpl,
                             const std::string& query_text,
                             std::uint32_t omega_cap) {
  (void)item;  // the trace depends on the user and query only
  const auto q = encode_query(words, store);
  const auto res = user_vector(user, q, corpus, store, omega_cap);
  const AttentionTrace& trace = res.trace;

  static constexpr EntityType kDomainType[kDomains] = {
      EntityType::item, EntityType::brand, EntityType::category};

  struct Cand {
    double w;
    int slot;  // 0..2 domains, 3 popularity
  };
  std::vector<Cand> cands;
  for (int d = 0; d < kDomains; ++d) {
    if (!trace.entities[d].empty()) cands.push_back({trace.domain_w[d], d});
  }
  cands.push_back({trace.top_zero, kDomains});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.w != b.w) return a.w > b.w;
    return a.slot < b.slot;
  });
  if (cands.size() > 3) cands.resize(3);

  ExplanationGroup group;
  group.kind = ExplanationGroup::Kind::mie;
  for (const auto& c : cands) {
    Explanation e;
    e.percent = static_cast<int>(std::llround(100.0 * c.w));
    e.score = c.w;
    if (c.slot == kDomains) {
      e.source = ExplSource::attention_popularity;
    } else {
      e.source = ExplSource::attention_domain;
      e.meet = kDomainType[c.slot];
      auto entities = trace.entities[c.slot];
      std::sort(entities.begin(), entities.end(),
                [](const auto& a, const auto& b) {
                  if (a.w != b.w) return a.w > b.w;
                  return a.id < b.id;
                });
      for (std::size_t k = 0; k < std::min<std::size_t>(3, entities.size());
           ++k) {
        e.evidence.push_back(
            {corpus.registry(e.meet).name(entities[k].id), entities[k].w});
      }
    }
    group.explanations.push_back(std::move(e));
  }

  // Rounding may push the displayed shares past 100 in total; shave the
  // largest until they fit.
  for (;;) {
    int sum = 0;
    for (const auto& e : group.explanations) sum += e.percent;
    if (sum <= 100) break;
    std::size_t at = 0;
    for (std::size_t i = 1; i < group.explanations.size(); ++i) {
      if (group.explanations[i].percent >= group.explanations[at].percent) {
        at = i;
      }
    }
    --group.explanations[at].percent;
  }
  for (auto& e : group.explanations) e.text = render(tpl, e, query_text);
  return group;
}

double log_purchase_prob(std::uint32_t user,
                         std::span<const std::uint32_t> words,
                         std::uint32_t item, const Corpus& corpus,
                         const EmbeddingStore& store, std::uint32_t k,
                         std::uint32_t omega_cap) {
  const auto list =
      retrieve_topk(user, words, corpus, store, k, omega_cap, "");
  const auto y = intent_vector(user, words, corpus, store, omega_cap);
  const double s_item = kernels::dot(y, store.item_vec(item));
  const std::string& name = corpus.items.name(item);

  std::vector<double> scores;
  scores.reserve(list.entries.size() + 1);
  bool listed = false;
  for (const auto& e : list.entries) {
    scores.push_back(e.score);
    listed = listed || (e.item == name);
  }
  if (!listed) scores.push_back(s_item);
  return s_item - log_sum_exp(scores);
}

namespace {

void append_escaped(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_g17(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_relations(std::string& out, const std::vector<Relation>& rels) {
  out += '[';
  for (std::size_t i = 0; i < rels.size(); ++i) {
    if (i) out += ',';
    append_escaped(out, relation_name(rels[i]));
  }
  out += ']';
}

void append_explanation(std::string& out, const Explanation& e) {
  out += "{\"source\":";
  append_escaped(out, expl_source_name(e.source));
  out += ",\"user_side\":";
  append_relations(out, e.user_side);
  out += ",\"item_side\":";
  append_relations(out, e.item_side);
  out += ",\"meet\":";
  append_escaped(out, entity_type_name(e.meet));
  out += ",\"score\":";
  append_g17(out, e.score);
  if (e.percent >= 0) {
    out += ",\"percent\":";
    out += std::to_string(e.percent);
  }
  out += ",\"evidence\":[";
  for (std::size_t i = 0; i < e.evidence.size(); ++i) {
    if (i) out += ',';
    out += "{\"name\":";
    append_escaped(out, e.evidence[i].name);
    out += ",\"score\":";
    append_g17(out, e.evidence[i].score);
    out += '}';
  }
  out += "],\"entities\":[";
  if (e.shows_entities()) {
    for (std::size_t i = 0; i < e.evidence.size(); ++i) {
      if (i) out += ',';
      append_escaped(out, e.evidence[i].name);
    }
  }
  out += "],\"text\":";
  append_escaped(out, e.text);
  out += '}';
}

void append_group(std::string& out, const ExplanationGroup& g) {
  out += "{\"kind\":";
  append_escaped(out, g.kind == ExplanationGroup::Kind::mae ? "MAE" : "MIE");
  out += ",\"explanations\":[";
  for (std::size_t i = 0; i < g.explanations.size(); ++i) {
    if (i) out += ',';
    append_explanation(out, g.explanations[i]);
  }
  out += "]}";
}

ExplSource source_from(const std::string& s) {
  for (int i = 0; i < 3; ++i) {
    if (s == kSourceNames[i]) return static_cast<ExplSource>(i);
  }
  throw std::runtime_error("unknown explanation source '" + s + "'");
}

std::vector<Relation> relations_from(const nlohmann::json& arr) {
  std::vector<Relation> out;
  for (const auto& v : arr) {
    auto rel = relation_from(v.get<std::string>());
    if (!rel) {
      throw std::runtime_error("unknown relation '" + v.get<std::string>() +
                               "'");
    }
    out.push_back(*rel);
  }
  return out;
}

Explanation explanation_from(const nlohmann::json& j) {
  Explanation e;
  e.source = source_from(j.at("source").get<std::string>());
  e.user_side = relations_from(j.at("user_side"));
  e.item_side = relations_from(j.at("item_side"));
  auto ty = entity_type_from(j.at("meet").get<std::string>());
  if (!ty) {
    throw std::runtime_error("unknown entity type '" +
                             j.at("meet").get<std::string>() + "'");
  }
  e.meet = *ty;
  e.score = j.at("score").get<double>();
  e.percent = j.value("percent", -1);
  for (const auto& ev : j.at("evidence")) {
    e.evidence.push_back({ev.at("name").get<std::string>(),
                          ev.at("score").get<double>()});
  }
  e.text = j.at("text").get<std::string>();
  return e;
}

ExplanationGroup group_from(const nlohmann::json& j,
                            ExplanationGroup::Kind kind) {
  ExplanationGroup g;
  g.kind = kind;
  const std::string want =
      kind == ExplanationGroup::Kind::mae ? "MAE" : "MIE";
  if (j.at("kind").get<std::string>() != want) {
    throw std::runtime_error("expected group kind " + want);
  }
  for (const auto& je : j.at("explanations")) {
    g.explanations.push_back(explanation_from(je));
  }
  return g;
}

}  // namespace

void write_explanations(std::span<const ExplanationCase> cases,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  std::string line;
  for (const auto& c : cases) {
    line.clear();
    line += "{\"user\":";
    append_escaped(line, c.user);
    line += ",\"item\":";
    append_escaped(line, c.item);
    line += ",\"query_key\":";
    append_escaped(line, c.query_key);
    line += ",\"query\":";
    append_escaped(line, c.query_text);
    line += ",\"mae\":";
    append_group(line, c.mae);
    line += ",\"mie\":";
    append_group(line, c.mie);
    line += ",\"mrr\":";
    append_g17(line, c.mrr);
    line += ",\"log_purchase_prob\":";
    append_g17(line, c.log_purchase_prob);
    line += "}\n";
    out << line;
  }
  if (!out.flush()) throw std::runtime_error(path + ": write failed");
}

std::vector<ExplanationCase> read_explanations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::vector<ExplanationCase> cases;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      ExplanationCase c;
      c.user = j.at("user").get<std::string>();
      c.item = j.at("item").get<std::string>();
      c.query_key = j.at("query_key").get<std::string>();
      c.query_text = j.at("query").get<std::string>();
      c.mae = group_from(j.at("mae"), ExplanationGroup::Kind::mae);
      c.mie = group_from(j.at("mie"), ExplanationGroup::Kind::mie);
      c.mrr = j.at("mrr").get<double>();
      c.log_purchase_prob = j.at("log_purchase_prob").get<double>();
      cases.push_back(std::move(c));
    } catch (const nlohmann::json::exception& ex) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               ex.what());
    }
  }
  return cases;
}

}  // namespace lkg
