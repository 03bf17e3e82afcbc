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

#ifndef LKG_HGN_HPP_
#define LKG_HGN_HPP_

// Hierarchical gated network. A user vector is pooled from the entities a
// user is associated with, one zero-attention layer per knowledge domain
// (purchased items, their brands, their categories) and one across domains.
// Every softmax includes a zero gate, so the network can attend to nothing:
// a user with no history collapses to query-only ranking.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lkg/corpus.hpp"
#include "lkg/embed_store.hpp"

namespace lkg {

inline constexpr int kDomains = 3;  // item, brand, category

// Attention parameter views for one level.
struct AttnParams {
  std::span<const double> wf;  // alpha x beta x alpha, row-major
  std::span<const double> b;   // alpha x beta
  std::span<const double> wh;  // beta
};

AttnParams attn_params(const EmbeddingStore& store, int level);

// The query-conditioned candidate direction: cand = tanh(Wf q + b) Wh, an
// alpha-vector such that the attention logit of any x is x . cand. The zero
// gate's logit is therefore exactly zero. m_out (alpha x beta) receives
// tanh(Wf q + b) for reuse in the backward pass; either output may be empty.
void attn_candidate(std::span<const double> q, const AttnParams& p,
                    std::uint32_t alpha, std::uint32_t beta,
                    std::span<double> m_out, std::span<double> cand_out);

// One attention score, computed from scratch.
double attention_logit(std::span<const double> q, std::span<const double> x,
                       const AttnParams& p, std::uint32_t alpha,
                       std::uint32_t beta);

struct ZamResult {
  std::vector<double> pooled;   // convex combination of the inputs
  std::vector<double> weights;  // one per input, then the zero gate last
};

// Softmax pooling over the given logits plus a trailing zero-gate logit.
// logits.size() must equal xs.size() + 1; the last entry is the gate's.
ZamResult zam_pool(const std::vector<std::span<const double>>& xs,
                   std::span<const double> logits, std::uint32_t alpha);

struct AttentionTrace {
  struct EntityWeight {
    std::uint32_t id;
    double w;
  };
  std::vector<EntityWeight> entities[kDomains];
  double entity_zero[kDomains] = {0, 0, 0};
  double domain_w[kDomains] = {0, 0, 0};
  double top_zero = 0;
};

// Intermediate state kept for the backward pass.
struct UserVectorContext {
  std::vector<std::uint32_t> omega[kDomains];  // capped, most recent last
  std::vector<double> m[kDomains + 1];         // tanh(Wf q + b), per level
  std::vector<double> cand[kDomains + 1];
  std::vector<double> weights[kDomains];       // entity weights + zero
  std::vector<double> u_domain[kDomains];
  std::vector<double> top_weights;             // 3 domain weights + zero
};

struct UserVectorResult {
  std::vector<double> u;
  AttentionTrace trace;
};

// The most recent omega_cap associations per domain (0 = no cap).
std::span<const std::uint32_t> capped_omega(
    const std::vector<std::uint32_t>& full, std::uint32_t omega_cap);

UserVectorResult user_vector(std::uint32_t user, std::span<const double> q,
                             const Corpus& corpus, const EmbeddingStore& store,
                             std::uint32_t omega_cap,
                             UserVectorContext* ctx = nullptr);

// Accumulates d(loss)/d(parameters) for du = d(loss)/d(user vector) into the
// flat gradient buffer, and d(loss)/d(query) into dq.
void user_vector_backward(std::uint32_t user, std::span<const double> q,
                          const Corpus& corpus, const EmbeddingStore& store,
                          const UserVectorContext& ctx,
                          std::span<const double> du, std::span<double> grad,
                          std::span<double> dq);

// One JSON line per trace: user, query text, top-level domain weights with
// the zero gate, per-domain entity weights, and per-domain zero gates.
std::string trace_to_json(const AttentionTrace& trace, const Corpus& corpus,
                          const std::string& user_name,
                          const std::string& query_text);

}  // namespace lkg

#endif  // LKG_HGN_HPP_
