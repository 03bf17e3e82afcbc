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

#ifndef LKG_EVAL_HPP_
#define LKG_EVAL_HPP_

// Ranking metrics (AP, RR, binary NDCG@k), run evaluation against
// relevance judgments, and the paired Fisher randomization test.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/retrieval.hpp"

namespace lkg {

// query_key -> relevant external item ids.
using Qrels = std::map<std::string, std::unordered_set<std::string>>;

// (sum over relevant ranks r of precision@r) / |relevant|. Relevant items
// missing from the list contribute nothing. Throws on an empty relevant set.
double average_precision(std::span<const std::string> ranked,
                         const std::unordered_set<std::string>& relevant);

// 1 / rank of the first relevant item, 0 if none is listed.
double reciprocal_rank(std::span<const std::string> ranked,
                       const std::unordered_set<std::string>& relevant);

// Binary gains discounted by log2(rank + 1), normalized by the ideal list
// of min(k, |relevant|) leading ones. Throws when k < 1.
double ndcg_at_k(std::span<const std::string> ranked,
                 const std::unordered_set<std::string>& relevant,
                 std::uint32_t k);

struct QueryMetrics {
  std::string query_key;
  double ap = 0.0;
  double rr = 0.0;
  double ndcg10 = 0.0;  // NDCG at the first requested cutoff (default 10)
  double ndcg50 = 0.0;  // NDCG at the second requested cutoff (default 50)
};

struct MetricReport {
  std::vector<QueryMetrics> per_query;  // qrels key order
  double map = 0.0;
  double mrr = 0.0;
  double ndcg10 = 0.0;
  double ndcg50 = 0.0;
  std::size_t n_queries = 0;  // number of judged queries
};

// Scores a run against judgments. Judged queries absent from the run count
// as zeros. Throws on a duplicate query key or a key without judgments.
MetricReport evaluate_run(const std::vector<RankedList>& run,
                          const Qrels& qrels, std::uint32_t cutoff1 = 10,
                          std::uint32_t cutoff2 = 50);

// Judgments of the corpus test split, keyed like test_tasks().
Qrels make_qrels(const Corpus& corpus);

// Four space-separated columns per line: query_key 0 item relevance.
void write_qrels(const Qrels& qrels, const std::string& path);
Qrels read_qrels(const std::string& path);

// Two-sided paired randomization test: each iteration flips every pair with
// probability one half; the p-value is the fraction of iterations whose
// |mean difference| reaches the observed one. Needs >= 2 pairs.
double fisher_randomization_test(std::span<const double> a,
                                 std::span<const double> b,
                                 std::uint64_t iterations, std::uint64_t seed);

}  // namespace lkg

#endif  // LKG_EVAL_HPP_
