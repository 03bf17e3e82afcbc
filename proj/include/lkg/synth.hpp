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

#ifndef LKG_SYNTH_HPP_
#define LKG_SYNTH_HPP_

// Desk-scale synthetic corpora with planted structure: every item sits in one
// (brand, category) cell, every user buys only their own brand, and every
// query names one category. A ranker that knows the plant achieves MRR 1.0,
// which makes trained-model quality measurable without external data.

#include <cstdint>
#include <string>
#include <unordered_map>

namespace lkg {

struct SynthSpec {
  std::uint32_t users = 60;
  std::uint32_t items = 100;
  std::uint32_t brands = 4;
  std::uint32_t categories = 5;
  std::uint32_t queries = 40;
  std::uint32_t queries_per_user = 10;
};

struct SynthTruth {
  std::unordered_map<std::string, std::string> user_brand;
  std::unordered_map<std::string, std::string> query_category;
};

// Writes triples.tsv, purchases.tsv (no split column), and the ground-truth
// JSON-lines file; returns the truth map. Deterministic under seed.
SynthTruth generate_synthetic(const SynthSpec& spec, std::uint64_t seed,
                              const std::string& triples_path,
                              const std::string& purchases_path,
                              const std::string& truth_path);

SynthTruth load_truth(const std::string& path);

}  // namespace lkg

#endif  // LKG_SYNTH_HPP_
