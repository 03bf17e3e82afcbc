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

#include "lkg/synth.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "lkg/corpus.hpp"
#include "lkg/rng.hpp"

namespace lkg {

namespace {

std::string uname(std::uint32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%04u", i);
  return buf;
}
std::string iname(std::uint32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "i%04u", i);
  return buf;
}
std::string bname(std::uint32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "b%02u", i);
  return buf;
}
std::string cname(std::uint32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%02u", i);
  return buf;
}

}  // namespace

SynthTruth generate_synthetic(const SynthSpec& spec, std::uint64_t seed,
                              const std::string& triples_path,
                              const std::string& purchases_path,
                              const std::string& truth_path) {
  if (spec.users < 2 || spec.items < 2 || spec.brands < 2 ||
      spec.categories < 2 || spec.queries < 2) {
    throw std::invalid_argument("synthetic spec needs at least 2 of each type");
  }
  if (spec.queries_per_user == 0 || spec.queries_per_user > spec.queries) {
    throw std::invalid_argument("queries_per_user must lie in [1, queries]");
  }

  auto item_brand = [&](std::uint32_t i) { return i % spec.brands; };
  auto item_cat = [&](std::uint32_t i) {
    return (i / spec.brands) % spec.categories;
  };
  auto user_brand = [&](std::uint32_t u) { return u % spec.brands; };
  auto query_cat = [&](std::uint32_t g) { return g % spec.categories; };
  auto query_text = [&](std::uint32_t g) {
    return cname(query_cat(g)) + " g" + std::to_string(g);
  };

  // cell(brand, category) -> ascending item list
  std::vector<std::vector<std::uint32_t>> cell(spec.brands * spec.categories);
  for (std::uint32_t i = 0; i < spec.items; ++i) {
    cell[item_brand(i) * spec.categories + item_cat(i)].push_back(i);
  }

  {
    std::ofstream out(triples_path, std::ios::binary);
    if (!out) throw std::runtime_error(triples_path + ": cannot open");
    for (std::uint32_t i = 0; i < spec.items; ++i) {
      out << "item\t" << iname(i) << "\tbrand\tbrand\t" << bname(item_brand(i))
          << '\n';
      out << "item\t" << iname(i) << "\tcategory\tcategory\t"
          << cname(item_cat(i)) << '\n';
    }
    for (const auto& members : cell) {
      for (std::size_t j = 0; j + 1 < members.size(); ++j) {
        out << "item\t" << iname(members[j]) << "\talso_bought\titem\t"
            << iname(members[j + 1]) << '\n';
      }
      if (members.size() >= 2) {
        out << "item\t" << iname(members.front()) << "\tbought_together\titem\t"
            << iname(members.back()) << '\n';
      }
    }
    // Cross-brand links between consecutive items of the same category.
    for (std::uint32_t c = 0; c < spec.categories; ++c) {
      std::uint32_t prev = spec.items;
      for (std::uint32_t i = 0; i < spec.items; ++i) {
        if (item_cat(i) != c) continue;
        if (prev < spec.items && item_brand(prev) != item_brand(i)) {
          out << "item\t" << iname(prev) << "\talso_viewed\titem\t" << iname(i)
              << '\n';
        }
        prev = i;
      }
    }
  }

  Rng rng = Rng(seed).fork("synth-purchases");
  {
    std::ofstream out(purchases_path, std::ios::binary);
    if (!out) throw std::runtime_error(purchases_path + ": cannot open");
    std::vector<std::uint32_t> pool(spec.queries);
    for (std::uint32_t g = 0; g < spec.queries; ++g) pool[g] = g;
    for (std::uint32_t u = 0; u < spec.users; ++u) {
      // Partial Fisher-Yates: the first queries_per_user entries become a
      // uniform sample without replacement.
      for (std::uint32_t j = 0; j < spec.queries_per_user; ++j) {
        std::uint32_t k =
            j + static_cast<std::uint32_t>(rng.uniform_int(spec.queries - j));
        std::swap(pool[j], pool[k]);
      }
      for (std::uint32_t j = 0; j < spec.queries_per_user; ++j) {
        std::uint32_t g = pool[j];
        const auto& members =
            cell[user_brand(u) * spec.categories + query_cat(g)];
        for (std::uint32_t i : members) {
          out << uname(u) << '\t' << query_text(g) << '\t' << iname(i) << '\n';
        }
      }
    }
  }

  SynthTruth truth;
  {
    std::ofstream out(truth_path, std::ios::binary);
    if (!out) throw std::runtime_error(truth_path + ": cannot open");
    for (std::uint32_t u = 0; u < spec.users; ++u) {
      out << "{\"user\":\"" << uname(u) << "\",\"brand\":\""
          << bname(user_brand(u)) << "\"}\n";
      truth.user_brand[uname(u)] = bname(user_brand(u));
    }
    for (std::uint32_t g = 0; g < spec.queries; ++g) {
      out << "{\"query\":\"" << query_text(g) << "\",\"category\":\""
          << cname(query_cat(g)) << "\"}\n";
      truth.query_category[query_text(g)] = cname(query_cat(g));
    }
  }
  return truth;
}

SynthTruth load_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  SynthTruth truth;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.contains("user")) {
      truth.user_brand[j.at("user").get<std::string>()] =
          j.at("brand").get<std::string>();
    } else {
      truth.query_category[j.at("query").get<std::string>()] =
          j.at("category").get<std::string>();
    }
  }
  return truth;
}

}  // namespace lkg
