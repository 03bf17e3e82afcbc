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

#include "lkg/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "lkg/rng.hpp"

namespace {

// Exact-in-binary feature values so additive shifts stay exact.
double grid_value(lkg::Rng& rng) {
  return static_cast<double>(rng.uniform_int(129)) / 128.0;
}

int count_leaves(const lkg::GbdtTree& t) {
  int n = 0;
  for (const auto& nd : t.nodes) {
    if (nd.feature < 0) ++n;
  }
  return n;
}

int tree_depth(const lkg::GbdtTree& t, int at = 0) {
  const auto& nd = t.nodes[static_cast<std::size_t>(at)];
  if (nd.feature < 0) return 0;
  return 1 + std::max(tree_depth(t, nd.left), tree_depth(t, nd.right));
}

}  // namespace

TEST_CASE("input validation rejects degenerate training data") {
  lkg::GbdtParams p;
  CHECK_THROWS_AS(lkg::gbdt_train({}, {}, p), std::invalid_argument);
  CHECK_THROWS_AS(lkg::gbdt_train({{1.0}, {2.0}}, {1, 1}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(lkg::gbdt_train({{1.0}, {2.0}}, {0, 0}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(lkg::gbdt_train({{1.0}, {2.0, 3.0}}, {0, 1}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(lkg::gbdt_train({{1.0}, {2.0}}, {0, 2}, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(lkg::gbdt_train({{1.0}, {2.0}}, {0}, p),
                  std::invalid_argument);

  lkg::GbdtParams bad = p;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(lkg::gbdt_train({{1.0}, {2.0}}, {0, 1}, bad),
                  std::invalid_argument);
  bad = p;
  bad.max_leaves = 1;
  CHECK_THROWS_AS(lkg::gbdt_train({{1.0}, {2.0}}, {0, 1}, bad),
                  std::invalid_argument);
}

TEST_CASE("a treeless model predicts the base rate") {
  lkg::GbdtParams p;
  p.trees = 0;
  std::vector<std::vector<double>> x = {{0.0}, {1.0}, {2.0}, {3.0}};
  std::vector<int> y = {1, 1, 1, 0};
  auto model = lkg::gbdt_train(x, y, p);
  CHECK(model.trees.empty());
  CHECK(lkg::gbdt_predict(model, {42.0}) ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("a single stump reproduces the brute-force best split") {
  lkg::Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 24 + rng.uniform_int(17);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back({grid_value(rng)});
      y.push_back(static_cast<int>(rng.uniform_int(2)));
      pos += static_cast<std::size_t>(y.back());
    }
    if (pos == 0 || pos == n) continue;

    lkg::GbdtParams p;
    p.max_depth = 1;
    p.max_leaves = 2;
    p.min_leaf_rows = 2;
    p.trees = 1;
    p.learning_rate = 1.0;
    auto model = lkg::gbdt_train(x, y, p);
    REQUIRE(model.trees.size() == 1);
    const auto& tree = model.trees[0];

    // Independent exhaustive scan over all midpoints of the sorted values.
    const double base = static_cast<double>(pos) / static_cast<double>(n);
    std::vector<double> sorted;
    for (const auto& row : x) sorted.push_back(row[0]);
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (int yi : y) total += yi - base;
    double best_gain = 0.0, best_thr = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (sorted[i] == sorted[i + 1]) continue;
      const double thr = sorted[i] / 2.0 + sorted[i + 1] / 2.0;
      double left = 0.0;
      std::size_t nl = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (x[j][0] <= thr) {
          left += y[j] - base;
          ++nl;
        }
      }
      const std::size_t nr = n - nl;
      if (nl < 2 || nr < 2) continue;
      const double right = total - left;
      const double gain = left * left / static_cast<double>(nl) +
                          right * right / static_cast<double>(nr) -
                          total * total / static_cast<double>(n);
      if (gain > best_gain) {
        best_gain = gain;
        best_thr = thr;
      }
    }

    if (best_gain <= 0.0) {
      CHECK(tree.nodes.size() == 1);
      continue;
    }
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == best_thr);

    // Leaf values are the Newton step on the logistic residuals.
    const double h = base * (1.0 - base);
    for (int side = 0; side < 2; ++side) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const bool is_left = x[j][0] <= best_thr;
        if (is_left != (side == 0)) continue;
        num += y[j] - base;
        den += h;
      }
      const int leaf = side == 0 ? tree.nodes[0].left : tree.nodes[0].right;
      CHECK(tree.nodes[static_cast<std::size_t>(leaf)].value ==
            doctest::Approx(num / (den + 1e-16)).epsilon(1e-12));
    }
  }
}

TEST_CASE("separable data is fit perfectly within the tree budget") {
  lkg::Rng rng(17);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 120; ++i) {
    const double a = grid_value(rng);
    const double b = grid_value(rng);
    if (a > 0.28 && a < 0.34) continue;  // margin around the boundary
    x.push_back({a, b});
    y.push_back(a > 0.31 ? 1 : 0);
  }
  lkg::GbdtParams p;
  p.max_depth = 3;
  p.max_leaves = 8;
  p.min_leaf_rows = 1;
  p.trees = 50;
  p.learning_rate = 0.3;
  auto model = lkg::gbdt_train(x, y, p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK((lkg::gbdt_predict(model, x[i]) > 0.5) == (y[i] == 1));
  }
}

TEST_CASE("constraints bound every tree and training is deterministic") {
  lkg::Rng rng(5);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    x.push_back({grid_value(rng), grid_value(rng), grid_value(rng)});
    y.push_back(static_cast<int>(rng.uniform_int(2)));
  }
  lkg::GbdtParams p;
  p.max_depth = 4;
  p.max_leaves = 6;
  p.min_leaf_rows = 15;
  p.trees = 30;
  auto model = lkg::gbdt_train(x, y, p);
  CHECK(!model.trees.empty());
  for (const auto& tree : model.trees) {
    CHECK(count_leaves(tree) <= p.max_leaves);
    CHECK(tree_depth(tree) <= p.max_depth);
  }

  auto again = lkg::gbdt_train(x, y, p);
  REQUIRE(again.trees.size() == model.trees.size());
  for (int i = 0; i < 50; ++i) {
    std::vector<double> probe = {grid_value(rng), grid_value(rng),
                                 grid_value(rng)};
    const double a = lkg::gbdt_predict(model, probe);
    CHECK(a == lkg::gbdt_predict(again, probe));
    CHECK(a > 0.0);
    CHECK(a < 1.0);
  }
}

TEST_CASE("shifting a feature column shifts thresholds and nothing else") {
  lkg::Rng rng(23);
  std::vector<std::vector<double>> x, x_shift;
  std::vector<int> y;
  for (int i = 0; i < 150; ++i) {
    const double a = grid_value(rng);
    const double b = grid_value(rng);
    x.push_back({a, b});
    x_shift.push_back({a + 1024.0, b});
    y.push_back(a + b > 1.0 ? 1 : 0);
  }
  if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
  if (std::count(y.begin(), y.end(), 0) == 0) y[0] = 0;
  lkg::GbdtParams p;
  p.max_depth = 4;
  p.max_leaves = 8;
  p.min_leaf_rows = 5;
  p.trees = 25;
  auto base = lkg::gbdt_train(x, y, p);
  auto shifted = lkg::gbdt_train(x_shift, y, p);
  REQUIRE(base.trees.size() == shifted.trees.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(lkg::gbdt_predict(base, x[i]) ==
          lkg::gbdt_predict(shifted, x_shift[i]));
  }
}
