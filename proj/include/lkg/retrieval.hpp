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

#ifndef LKG_RETRIEVAL_HPP_
#define LKG_RETRIEVAL_HPP_

// Top-K retrieval over the full item table, the per-(user, query) evaluation
// tasks derived from a corpus, and the interoperable run-file format.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/embed_store.hpp"

namespace lkg {

struct RankedEntry {
  std::string item;  // external item id
  double score;
  bool operator==(const RankedEntry&) const = default;
};

// One retrieved list. Scores are nonincreasing; ties are broken by the
// items' registration order; no item appears twice.
struct RankedList {
  std::string query_key;
  std::vector<RankedEntry> entries;
  bool operator==(const RankedList&) const = default;
};

// Scores every item with the intent vector of (user, words) and keeps the
// top K (all items when K exceeds the table).
RankedList retrieve_topk(std::uint32_t user,
                         std::span<const std::uint32_t> words,
                         const Corpus& corpus, const EmbeddingStore& store,
                         std::uint32_t k, std::uint32_t omega_cap,
                         std::string query_key);

// One evaluation unit: a (user, query) pair of the test split together with
// every item purchased under it. query_key is "<user>#q<n>" where n indexes
// the distinct query strings of the corpus in first-seen order.
struct EvalTask {
  std::uint32_t user = 0;
  std::vector<std::uint32_t> words;
  std::string query_key;
  std::unordered_set<std::string> relevant;  // external item ids
};

std::vector<EvalTask> test_tasks(const Corpus& corpus);

// Retrieval for every task, in task order. Tasks are independent, so extra
// threads only split the loop; the output does not depend on the count.
std::vector<RankedList> retrieve_all(std::span<const EvalTask> tasks,
                                     const Corpus& corpus,
                                     const EmbeddingStore& store,
                                     std::uint32_t k, std::uint32_t omega_cap,
                                     std::uint32_t threads = 1);

// Six space-separated columns per line: query_key Q0 item rank score tag.
void write_run(const std::vector<RankedList>& run, const std::string& path,
               const std::string& tag = "lkg");
std::vector<RankedList> read_run(const std::string& path);

}  // namespace lkg

#endif  // LKG_RETRIEVAL_HPP_
