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

#ifndef LKG_GBDT_HPP_
#define LKG_GBDT_HPP_

// Gradient-boosted regression trees on logistic loss, sized for small tabular
// preference datasets: exact greedy splits over every feature and every
// midpoint between distinct values, no histogramming, no subsampling.
// Training is fully deterministic; equal-gain splits resolve to the lowest
// feature index and then the lowest threshold.

#include <cstddef>
#include <vector>

namespace lkg {

struct GbdtParams {
  int max_depth = 8;
  int max_leaves = 20;
  int min_leaf_rows = 10;
  double learning_rate = 0.1;
  int trees = 50;

  void validate() const;  // throws std::invalid_argument
};

// feature < 0 marks a leaf carrying `value`; interior nodes route
// x[feature] <= threshold to `left`, otherwise to `right`.
struct GbdtNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct GbdtTree {
  std::vector<GbdtNode> nodes;  // nodes[0] is the root
  double eval(const std::vector<double>& x) const;
};

struct GbdtModel {
  double prior_logit = 0.0;
  double learning_rate = 0.1;
  std::vector<GbdtTree> trees;

  // Raw additive score: prior + lr * sum of tree outputs.
  double decision(const std::vector<double>& x) const;
};

// Trains on rows of equal width with labels in {0, 1}. Throws
// std::invalid_argument on empty or single-class data, ragged rows, or a
// label outside {0, 1}. The returned model predicts the probability of
// label 1 via gbdt_predict.
GbdtModel gbdt_train(const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels, const GbdtParams& params);

// Sigmoid of the model decision; always in (0, 1).
double gbdt_predict(const GbdtModel& model, const std::vector<double>& x);

}  // namespace lkg

#endif  // LKG_GBDT_HPP_
