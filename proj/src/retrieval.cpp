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

#include "lkg/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "lkg/kernels.hpp"
#include "lkg/model.hpp"

namespace lkg {

RankedList retrieve_topk(std::uint32_t user,
                         std::span<const std::uint32_t> words,
                         const Corpus& corpus, const EmbeddingStore& store,
                         std::uint32_t k, std::uint32_t omega_cap,
                         std::string query_key) {
  const auto y = intent_vector(user, words, corpus, store, omega_cap);
  const std::uint32_t n = static_cast<std::uint32_t>(corpus.items.size());
  std::vector<std::pair<double, std::uint32_t>> scored(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    scored[i] = {kernels::dot(y, store.item_vec(i)), i};
  }
  const std::uint32_t kept = std::min(k, n);
  const auto better = [](const std::pair<double, std::uint32_t>& a,
                         const std::pair<double, std::uint32_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + kept, scored.end(),
                    better);

  RankedList out;
  out.query_key = std::move(query_key);
  out.entries.reserve(kept);
  for (std::uint32_t j = 0; j < kept; ++j) {
    out.entries.push_back({corpus.items.name(scored[j].second),
                           scored[j].first});
  }
  return out;
}

std::vector<EvalTask> test_tasks(const Corpus& corpus) {
  // Distinct query strings in first-seen order define the query numbering.
  std::unordered_map<std::string, std::size_t> query_id;
  for (const auto& p : corpus.purchases) {
    query_id.emplace(p.query_text, query_id.size());
  }

  std::vector<EvalTask> tasks;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& p : corpus.purchases) {
    if (p.split != Split::test) continue;
    std::string key = corpus.users.name(p.user) + "#q" +
                      std::to_string(query_id.at(p.query_text));
    auto [it, fresh] = slot.emplace(key, tasks.size());
    if (fresh) {
      EvalTask t;
      t.user = p.user;
      t.words = p.query_words;
      t.query_key = std::move(key);
      tasks.push_back(std::move(t));
    }
    tasks[it->second].relevant.insert(corpus.items.name(p.item));
  }
  return tasks;
}

std::vector<RankedList> retrieve_all(std::span<const EvalTask> tasks,
                                     const Corpus& corpus,
                                     const EmbeddingStore& store,
                                     std::uint32_t k, std::uint32_t omega_cap,
                                     std::uint32_t threads) {
  std::vector<RankedList> out(tasks.size());
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = retrieve_topk(tasks[i].user, tasks[i].words, corpus, store, k,
                             omega_cap, tasks[i].query_key);
    }
  };
  if (threads <= 1 || tasks.size() < 2) {
    work(0, tasks.size());
    return out;
  }
  const std::size_t n_workers = std::min<std::size_t>(threads, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t begin = tasks.size() * w / n_workers;
    const std::size_t end = tasks.size() * (w + 1) / n_workers;
    pool.emplace_back(work, begin, end);
  }
  for (auto& t : pool) t.join();
  return out;
}

void write_run(const std::vector<RankedList>& run, const std::string& path,
               const std::string& tag) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  char buf[64];
  for (const auto& list : run) {
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", list.entries[r].score);
      out << list.query_key << " Q0 " << list.entries[r].item << ' '
          << (r + 1) << ' ' << buf << ' ' << tag << '\n';
    }
  }
  if (!out.flush()) throw std::runtime_error(path + ": write failed");
}

std::vector<RankedList> read_run(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::vector<RankedList> run;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<std::uint64_t>> ranks;  // parallel to run
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key, q0, item, tag;
    std::uint64_t rank = 0;
    double score = 0.0;
    if (!(ss >> key >> q0 >> item >> rank >> score >> tag)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 6 columns");
    }
    if (rank == 0) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": rank must be positive");
    }
    auto [it, fresh] = slot.emplace(key, run.size());
    if (fresh) {
      run.push_back({key, {}});
      ranks.emplace_back();
    }
    run[it->second].entries.push_back({item, score});
    ranks[it->second].push_back(rank);
  }
  for (std::size_t i = 0; i < run.size(); ++i) {
    std::vector<std::size_t> order(run[i].entries.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ranks[i][a] < ranks[i][b];
    });
    std::vector<RankedEntry> sorted;
    sorted.reserve(order.size());
    std::unordered_set<std::string> seen;
    for (std::size_t j : order) {
      auto& e = run[i].entries[j];
      if (!seen.insert(e.item).second) {
        throw std::runtime_error(path + ": duplicate item '" + e.item +
                                 "' under query " + run[i].query_key);
      }
      sorted.push_back(std::move(e));
    }
    run[i].entries = std::move(sorted);
  }
  return run;
}

}  // namespace lkg
