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

#include "lkg/hgn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lkg/kernels.hpp"

namespace lkg {

namespace {

// Domain d draws entity vectors from one table.
std::span<const double> domain_entity_vec(const EmbeddingStore& store,
                                          int domain, std::uint32_t id) {
  switch (domain) {
    case kAttnItem: return store.item_vec(id);
    case kAttnBrand: return store.brand_vec(id);
    default: return store.category_vec(id);
  }
}

std::size_t domain_entity_offset(const EmbeddingStore& store, int domain,
                                 std::uint32_t id) {
  switch (domain) {
    case kAttnItem: return store.offset_item(id);
    case kAttnBrand: return store.offset_brand(id);
    default: return store.offset_category(id);
  }
}

const std::vector<std::uint32_t>& domain_omega(const Corpus& corpus, int domain,
                                               std::uint32_t user) {
  switch (domain) {
    case kAttnItem: return corpus.user_items[user];
    case kAttnBrand: return corpus.user_brands[user];
    default: return corpus.user_categories[user];
  }
}

// Given d(loss)/d(cand), push gradients onto the level parameters and the
// query. cand = M Wh with M = tanh(Z), Z = Wf q + b.
void candidate_backward(std::span<const double> q, const AttnParams& p,
                        std::span<const double> m, std::uint32_t alpha,
                        std::uint32_t beta, std::span<const double> dcand,
                        std::span<double> g_wf, std::span<double> g_b,
                        std::span<double> g_wh, std::span<double> dq) {
  for (std::uint32_t i = 0; i < alpha; ++i) {
    const double dc = dcand[i];
    if (dc == 0.0) continue;
    for (std::uint32_t j = 0; j < beta; ++j) {
      const double mij = m[i * beta + j];
      g_wh[j] += dc * mij;
      const double dz = dc * p.wh[j] * (1.0 - mij * mij);
      g_b[i * beta + j] += dz;
      const std::size_t row = (std::size_t{i} * beta + j) * alpha;
      kernels::axpy(dz, q, g_wf.subspan(row, alpha));
      kernels::axpy(dz, p.wf.subspan(row, alpha), dq);
    }
  }
}

}  // namespace

AttnParams attn_params(const EmbeddingStore& store, int level) {
  return {store.attn_wf(level), store.attn_b(level), store.attn_wh(level)};
}

void attn_candidate(std::span<const double> q, const AttnParams& p,
                    std::uint32_t alpha, std::uint32_t beta,
                    std::span<double> m_out, std::span<double> cand_out) {
  for (std::uint32_t i = 0; i < alpha; ++i) {
    double c = 0.0;
    for (std::uint32_t j = 0; j < beta; ++j) {
      const std::size_t row = (std::size_t{i} * beta + j) * alpha;
      const double z = kernels::dot(p.wf.subspan(row, alpha), q) + p.b[i * beta + j];
      const double mij = std::tanh(z);
      if (!m_out.empty()) m_out[i * beta + j] = mij;
      c += mij * p.wh[j];
    }
    if (!cand_out.empty()) cand_out[i] = c;
  }
}

double attention_logit(std::span<const double> q, std::span<const double> x,
                       const AttnParams& p, std::uint32_t alpha,
                       std::uint32_t beta) {
  std::vector<double> cand(alpha);
  attn_candidate(q, p, alpha, beta, {}, cand);
  return kernels::dot(x, cand);
}

ZamResult zam_pool(const std::vector<std::span<const double>>& xs,
                   std::span<const double> logits, std::uint32_t alpha) {
  ZamResult r;
  r.pooled.assign(alpha, 0.0);
  const std::size_t n = logits.size();
  double max_l = logits[0];
  for (double l : logits) max_l = std::max(max_l, l);
  r.weights.resize(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.weights[i] = std::exp(logits[i] - max_l);
    z += r.weights[i];
  }
  for (double& w : r.weights) w /= z;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    kernels::axpy(r.weights[i], xs[i], r.pooled);
  }
  return r;
}

std::span<const std::uint32_t> capped_omega(
    const std::vector<std::uint32_t>& full, std::uint32_t omega_cap) {
  if (omega_cap == 0 || full.size() <= omega_cap) return full;
  return {full.data() + full.size() - omega_cap, omega_cap};
}

UserVectorResult user_vector(std::uint32_t user, std::span<const double> q,
                             const Corpus& corpus, const EmbeddingStore& store,
                             std::uint32_t omega_cap, UserVectorContext* ctx) {
  const auto alpha = static_cast<std::uint32_t>(store.alpha());
  const auto beta = static_cast<std::uint32_t>(store.beta());
  UserVectorContext local;
  UserVectorContext& c = ctx ? *ctx : local;

  UserVectorResult out;
  std::vector<std::span<const double>> domain_vecs;
  for (int d = 0; d < kDomains; ++d) {
    auto omega = capped_omega(domain_omega(corpus, d, user), omega_cap);
    c.omega[d].assign(omega.begin(), omega.end());
    c.m[d].resize(std::size_t{alpha} * beta);
    c.cand[d].resize(alpha);
    attn_candidate(q, attn_params(store, d), alpha, beta, c.m[d], c.cand[d]);

    std::vector<std::span<const double>> xs;
    std::vector<double> logits;
    xs.reserve(omega.size());
    logits.reserve(omega.size() + 1);
    for (std::uint32_t id : omega) {
      xs.push_back(domain_entity_vec(store, d, id));
      logits.push_back(kernels::dot(xs.back(), c.cand[d]));
    }
    logits.push_back(0.0);  // the gate: f(q, 0) with x = 0
    ZamResult zr = zam_pool(xs, logits, alpha);
    c.weights[d] = zr.weights;
    c.u_domain[d] = std::move(zr.pooled);

    for (std::size_t i = 0; i < omega.size(); ++i) {
      out.trace.entities[d].push_back({omega[i], c.weights[d][i]});
    }
    out.trace.entity_zero[d] = c.weights[d].back();
  }

  c.m[kAttnUser].resize(std::size_t{alpha} * beta);
  c.cand[kAttnUser].resize(alpha);
  attn_candidate(q, attn_params(store, kAttnUser), alpha, beta, c.m[kAttnUser],
                 c.cand[kAttnUser]);
  std::vector<std::span<const double>> xs;
  std::vector<double> logits;
  for (int d = 0; d < kDomains; ++d) {
    xs.push_back(c.u_domain[d]);
    logits.push_back(kernels::dot(c.u_domain[d], c.cand[kAttnUser]));
  }
  logits.push_back(0.0);
  ZamResult zr = zam_pool(xs, logits, alpha);
  c.top_weights = zr.weights;
  out.u = std::move(zr.pooled);
  for (int d = 0; d < kDomains; ++d) out.trace.domain_w[d] = c.top_weights[d];
  out.trace.top_zero = c.top_weights.back();
  return out;
}

void user_vector_backward(std::uint32_t user, std::span<const double> q,
                          const Corpus& corpus, const EmbeddingStore& store,
                          const UserVectorContext& ctx,
                          std::span<const double> du, std::span<double> grad,
                          std::span<double> dq) {
  (void)user;
  const auto alpha = static_cast<std::uint32_t>(store.alpha());
  const auto beta = static_cast<std::uint32_t>(store.beta());

  // Top level. u = sum_d w_d u_d; logits l_d = u_d . cand_top, gate fixed 0.
  // dl_d = w_d (g_d - S), g_d = du . u_d, S = sum w g (gate term has u = 0).
  double gsum = 0.0;
  double gd[kDomains];
  for (int d = 0; d < kDomains; ++d) {
    gd[d] = kernels::dot(du, ctx.u_domain[d]);
    gsum += ctx.top_weights[d] * gd[d];
  }
  std::vector<double> dcand_top(alpha, 0.0);
  std::vector<double> du_domain[kDomains];
  for (int d = 0; d < kDomains; ++d) {
    const double w = ctx.top_weights[d];
    const double dl = w * (gd[d] - gsum);
    // u_d feeds both the pool and its own logit.
    du_domain[d].assign(alpha, 0.0);
    kernels::axpy(w, du, du_domain[d]);
    kernels::axpy(dl, ctx.cand[kAttnUser], du_domain[d]);
    kernels::axpy(dl, ctx.u_domain[d], dcand_top);
  }
  candidate_backward(q, attn_params(store, kAttnUser), ctx.m[kAttnUser], alpha,
                     beta, dcand_top,
                     grad.subspan(store.offset_attn_wf(kAttnUser),
                                  std::size_t{alpha} * beta * alpha),
                     grad.subspan(store.offset_attn_b(kAttnUser),
                                  std::size_t{alpha} * beta),
                     grad.subspan(store.offset_attn_wh(kAttnUser), beta), dq);

  // Domain levels.
  for (int d = 0; d < kDomains; ++d) {
    const auto& omega = ctx.omega[d];
    const auto& w = ctx.weights[d];
    std::span<const double> dud = du_domain[d];
    double s = 0.0;
    std::vector<double> ge(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
      ge[i] = kernels::dot(dud, domain_entity_vec(store, d, omega[i]));
      s += w[i] * ge[i];
    }
    std::vector<double> dcand(alpha, 0.0);
    for (std::size_t i = 0; i < omega.size(); ++i) {
      const double dl = w[i] * (ge[i] - s);
      auto x = domain_entity_vec(store, d, omega[i]);
      auto gx = grad.subspan(domain_entity_offset(store, d, omega[i]), alpha);
      kernels::axpy(w[i], dud, gx);
      kernels::axpy(dl, ctx.cand[d], gx);
      kernels::axpy(dl, x, dcand);
    }
    candidate_backward(q, attn_params(store, d), ctx.m[d], alpha, beta, dcand,
                       grad.subspan(store.offset_attn_wf(d),
                                    std::size_t{alpha} * beta * alpha),
                       grad.subspan(store.offset_attn_b(d),
                                    std::size_t{alpha} * beta),
                       grad.subspan(store.offset_attn_wh(d), beta), dq);
  }
}

std::string trace_to_json(const AttentionTrace& trace, const Corpus& corpus,
                          const std::string& user_name,
                          const std::string& query_text) {
  static const char* kDomainKey[kDomains] = {"item", "brand", "category"};
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const Registry* reg[kDomains] = {&corpus.items, &corpus.brands,
                                   &corpus.categories};
  std::string s = "{\"user\":\"" + user_name + "\",\"query\":\"" + query_text +
                  "\",\"domain_weights\":{";
  for (int d = 0; d < kDomains; ++d) {
    s += std::string("\"") + kDomainKey[d] + "\":" + num(trace.domain_w[d]) + ",";
  }
  s += "\"zero\":" + num(trace.top_zero) + "},\"entity_zero\":{";
  for (int d = 0; d < kDomains; ++d) {
    if (d) s += ",";
    s += std::string("\"") + kDomainKey[d] + "\":" + num(trace.entity_zero[d]);
  }
  s += "},\"entities\":{";
  for (int d = 0; d < kDomains; ++d) {
    if (d) s += ",";
    s += std::string("\"") + kDomainKey[d] + "\":[";
    for (std::size_t i = 0; i < trace.entities[d].size(); ++i) {
      if (i) s += ",";
      s += "{\"id\":\"" + reg[d]->name(trace.entities[d][i].id) +
           "\",\"w\":" + num(trace.entities[d][i].w) + "}";
    }
    s += "]";
  }
  s += "}}";
  return s;
}

}  // namespace lkg
