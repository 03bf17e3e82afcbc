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

#include "lkg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "lkg/rng.hpp"

namespace lkg {

double average_precision(std::span<const std::string> ranked,
                         const std::unordered_set<std::string>& relevant) {
  if (relevant.empty()) {
    throw std::invalid_argument("average_precision: empty relevant set");
  }
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (relevant.count(ranked[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

double reciprocal_rank(std::span<const std::string> ranked,
                       const std::unordered_set<std::string>& relevant) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (relevant.count(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double ndcg_at_k(std::span<const std::string> ranked,
                 const std::unordered_set<std::string>& relevant,
                 std::uint32_t k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be positive");
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  const std::size_t depth = std::min<std::size_t>(k, ranked.size());
  for (std::size_t i = 0; i < depth; ++i) {
    if (relevant.count(ranked[i])) {
      dcg += 1.0 / std::log2(static_cast<double>(i + 2));
    }
  }
  double ideal = 0.0;
  const std::size_t ones = std::min<std::size_t>(k, relevant.size());
  for (std::size_t j = 0; j < ones; ++j) {
    ideal += 1.0 / std::log2(static_cast<double>(j + 2));
  }
  return dcg / ideal;
}

MetricReport evaluate_run(const std::vector<RankedList>& run,
                          const Qrels& qrels, std::uint32_t cutoff1,
                          std::uint32_t cutoff2) {
  std::unordered_map<std::string, const RankedList*> by_key;
  for (const auto& list : run) {
    if (!by_key.emplace(list.query_key, &list).second) {
      throw std::invalid_argument("evaluate_run: duplicate query key '" +
                                  list.query_key + "'");
    }
    if (!qrels.count(list.query_key)) {
      throw std::invalid_argument("evaluate_run: no judgments for '" +
                                  list.query_key + "'");
    }
  }

  MetricReport report;
  report.n_queries = qrels.size();
  for (const auto& [key, relevant] : qrels) {
    std::vector<std::string> ids;
    if (auto it = by_key.find(key); it != by_key.end()) {
      ids.reserve(it->second->entries.size());
      for (const auto& e : it->second->entries) ids.push_back(e.item);
    }
    QueryMetrics m;
    m.query_key = key;
    m.ap = average_precision(ids, relevant);
    m.rr = reciprocal_rank(ids, relevant);
    m.ndcg10 = ndcg_at_k(ids, relevant, cutoff1);
    m.ndcg50 = ndcg_at_k(ids, relevant, cutoff2);
    report.map += m.ap;
    report.mrr += m.rr;
    report.ndcg10 += m.ndcg10;
    report.ndcg50 += m.ndcg50;
    report.per_query.push_back(std::move(m));
  }
  if (report.n_queries > 0) {
    const double n = static_cast<double>(report.n_queries);
    report.map /= n;
    report.mrr /= n;
    report.ndcg10 /= n;
    report.ndcg50 /= n;
  }
  return report;
}

Qrels make_qrels(const Corpus& corpus) {
  Qrels qrels;
  for (const auto& task : test_tasks(corpus)) {
    qrels[task.query_key] = task.relevant;
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  for (const auto& [key, relevant] : qrels) {
    // Registry names sort deterministically; the set does not.
    std::vector<std::string> items(relevant.begin(), relevant.end());
    std::sort(items.begin(), items.end());
    for (const auto& item : items) {
      out << key << " 0 " << item << " 1\n";
    }
  }
  if (!out.flush()) throw std::runtime_error(path + ": write failed");
}

Qrels read_qrels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  Qrels qrels;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key, zero, item;
    long long rel = 0;
    if (!(ss >> key >> zero >> item >> rel)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 4 columns");
    }
    if (rel < 0) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": negative relevance");
    }
    if (rel > 0) qrels[key].insert(item);
  }
  return qrels;
}

double fisher_randomization_test(std::span<const double> a,
                                 std::span<const double> b,
                                 std::uint64_t iterations,
                                 std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(
        "fisher_randomization_test: unpaired observations");
  }
  if (a.size() < 2) {
    throw std::invalid_argument(
        "fisher_randomization_test: need at least 2 pairs");
  }
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  double observed_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = a[i] - b[i];
    observed_sum += diff[i];
  }
  const double observed = std::abs(observed_sum);

  Rng rng(seed);
  std::uint64_t at_least = 0;
  for (std::uint64_t it = 0; it < iterations; ++it) {
    double sum = 0.0;
    std::uint64_t bits = 0;
    int have = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (have == 0) {
        bits = rng.next_u64();
        have = 64;
      }
      sum += (bits & 1) ? -diff[i] : diff[i];
      bits >>= 1;
      --have;
    }
    if (std::abs(sum) >= observed) ++at_least;
  }
  return static_cast<double>(at_least) / static_cast<double>(iterations);
}

}  // namespace lkg
