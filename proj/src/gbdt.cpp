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
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lkg {
namespace {

constexpr double kHessianEps = 1e-16;
constexpr double kLeafCap = 100.0;

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// A node under construction owns a contiguous [begin, end) range of the
// shared row-index array.
struct BuildNode {
  std::size_t begin = 0;
  std::size_t end = 0;
  int depth = 0;
  int index = -1;  // position in the output node vector
  Candidate best;
};

// Best variance-reduction split of the residual targets within [begin, end).
// Gain is the sum-of-squares identity S_L^2/n_L + S_R^2/n_R - S^2/n, which is
// zero when the residuals are constant.
Candidate best_split(const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& residual,
                     std::vector<std::uint32_t>& order, std::size_t begin,
                     std::size_t end, int min_leaf,
                     std::vector<std::uint32_t>& scratch) {
  Candidate best;
  const std::size_t n = end - begin;
  if (n < 2 * static_cast<std::size_t>(min_leaf)) return best;
  double total = 0.0;
  for (std::size_t p = begin; p < end; ++p) total += residual[order[p]];

  const std::size_t width = rows[0].size();
  for (std::size_t f = 0; f < width; ++f) {
    scratch.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                   order.begin() + static_cast<std::ptrdiff_t>(end));
    std::stable_sort(scratch.begin(), scratch.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return rows[a][f] < rows[b][f];
                     });
    double left_sum = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      left_sum += residual[scratch[p]];
      const double lo = rows[scratch[p]][f];
      const double hi = rows[scratch[p + 1]][f];
      if (lo == hi) continue;
      const std::size_t nl = p + 1;
      const std::size_t nr = n - nl;
      if (nl < static_cast<std::size_t>(min_leaf) ||
          nr < static_cast<std::size_t>(min_leaf)) {
        continue;
      }
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / static_cast<double>(nl) +
                          right_sum * right_sum / static_cast<double>(nr) -
                          total * total / static_cast<double>(n);
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = lo / 2.0 + hi / 2.0;
      }
    }
  }
  return best;
}

double newton_leaf(const std::vector<double>& residual,
                   const std::vector<double>& hessian,
                   const std::vector<std::uint32_t>& order, std::size_t begin,
                   std::size_t end) {
  double num = 0.0, den = 0.0;
  for (std::size_t p = begin; p < end; ++p) {
    num += residual[order[p]];
    den += hessian[order[p]];
  }
  return std::clamp(num / (den + kHessianEps), -kLeafCap, kLeafCap);
}

}  // namespace

void GbdtParams::validate() const {
  if (max_depth < 1) throw std::invalid_argument("gbdt: max_depth < 1");
  if (max_leaves < 2) throw std::invalid_argument("gbdt: max_leaves < 2");
  if (min_leaf_rows < 1) throw std::invalid_argument("gbdt: min_leaf_rows < 1");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("gbdt: learning_rate must be positive");
  }
  if (trees < 0) throw std::invalid_argument("gbdt: trees < 0");
}

double GbdtTree::eval(const std::vector<double>& x) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const GbdtNode& nd = nodes[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                 : nd.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

double GbdtModel::decision(const std::vector<double>& x) const {
  double f = prior_logit;
  for (const GbdtTree& t : trees) f += learning_rate * t.eval(x);
  return f;
}

GbdtModel gbdt_train(const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels,
                     const GbdtParams& params) {
  params.validate();
  if (rows.empty()) throw std::invalid_argument("gbdt: empty training data");
  if (rows.size() != labels.size()) {
    throw std::invalid_argument("gbdt: rows/labels size mismatch");
  }
  const std::size_t width = rows[0].size();
  if (width == 0) throw std::invalid_argument("gbdt: zero-width rows");
  for (const auto& r : rows) {
    if (r.size() != width) throw std::invalid_argument("gbdt: ragged rows");
  }
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument("gbdt: labels must be 0 or 1");
    }
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) {
    throw std::invalid_argument("gbdt: training data has a single class");
  }

  const std::size_t n = rows.size();
  GbdtModel model;
  model.learning_rate = params.learning_rate;
  const double base =
      static_cast<double>(positives) / static_cast<double>(n);
  model.prior_logit = std::log(base / (1.0 - base));

  std::vector<double> score(n, model.prior_logit);
  std::vector<double> residual(n), hessian(n);
  std::vector<std::uint32_t> order(n), scratch;
  std::vector<std::uint32_t> leaf_of(n);

  for (int round = 0; round < params.trees; ++round) {
    double max_abs_residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      residual[i] = static_cast<double>(labels[i]) - p;
      hessian[i] = p * (1.0 - p);
      max_abs_residual = std::max(max_abs_residual, std::abs(residual[i]));
    }
    if (max_abs_residual < 1e-12) break;

    std::iota(order.begin(), order.end(), 0u);
    GbdtTree tree;
    tree.nodes.emplace_back();

    std::vector<BuildNode> open;
    BuildNode root;
    root.begin = 0;
    root.end = n;
    root.depth = 0;  // edges from the root; a stump has max_depth 1
    root.index = 0;
    root.best = best_split(rows, residual, order, 0, n, params.min_leaf_rows,
                           scratch);
    open.push_back(root);
    int leaves = 1;

    // Leaf-wise growth: always split the open leaf with the largest gain.
    while (leaves < params.max_leaves) {
      std::size_t pick = open.size();
      double best_gain = 0.0;
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (open[i].best.feature < 0) continue;
        if (open[i].depth >= params.max_depth) continue;
        if (open[i].best.gain > best_gain) {
          best_gain = open[i].best.gain;
          pick = i;
        }
      }
      if (pick == open.size()) break;

      BuildNode node = open[pick];
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
      const int f = node.best.feature;
      const double thr = node.best.threshold;
      auto mid_it = std::stable_partition(
          order.begin() + static_cast<std::ptrdiff_t>(node.begin),
          order.begin() + static_cast<std::ptrdiff_t>(node.end),
          [&](std::uint32_t r) {
            return rows[r][static_cast<std::size_t>(f)] <= thr;
          });
      const std::size_t mid = static_cast<std::size_t>(
          std::distance(order.begin(), mid_it));

      GbdtNode& parent = tree.nodes[static_cast<std::size_t>(node.index)];
      parent.feature = f;
      parent.threshold = thr;
      parent.left = static_cast<int>(tree.nodes.size());
      parent.right = parent.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();

      BuildNode left, right;
      left.begin = node.begin;
      left.end = mid;
      left.depth = node.depth + 1;
      left.index = tree.nodes[static_cast<std::size_t>(node.index)].left;
      left.best = best_split(rows, residual, order, left.begin, left.end,
                             params.min_leaf_rows, scratch);
      right.begin = mid;
      right.end = node.end;
      right.depth = node.depth + 1;
      right.index = tree.nodes[static_cast<std::size_t>(node.index)].right;
      right.best = best_split(rows, residual, order, right.begin, right.end,
                              params.min_leaf_rows, scratch);
      open.push_back(left);
      open.push_back(right);
      ++leaves;
    }

    for (const BuildNode& leaf : open) {
      const double value =
          newton_leaf(residual, hessian, order, leaf.begin, leaf.end);
      tree.nodes[static_cast<std::size_t>(leaf.index)].value = value;
      for (std::size_t p = leaf.begin; p < leaf.end; ++p) {
        leaf_of[order[p]] = static_cast<std::uint32_t>(leaf.index);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += params.learning_rate * tree.nodes[leaf_of[i]].value;
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double gbdt_predict(const GbdtModel& model, const std::vector<double>& x) {
  return sigmoid(model.decision(x));
}

}  // namespace lkg
