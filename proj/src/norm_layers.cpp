// Copyright 2026 The normlab Authors
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

#include "normlab/norm_layers.hpp"

#include <cmath>
#include <string>

#include "normlab/errors.hpp"
#include "normlab/kernels.hpp"
#include "normlab/logging.hpp"

namespace normlab {

namespace {

void require_channels(const Tensor4& x, const UbnParams& p, const char* op) {
  if (p.channels() != x.c())
    throw DimensionError(std::string(op) + ": params have " +
                         std::to_string(p.channels()) + " channels, input " +
                         x.dims().str());
}

void require_finite(const Tensor4& x, const char* op) {
  if (x.has_nonfinite())
    throw Error(std::string(op) + ": non-finite input");
}

double fingerprint(const Tensor4& x) {
  if (x.size() == 0) return 0.0;
  return x.data()[0] + 1e-3 * x.data()[x.size() - 1] +
         static_cast<double>(x.size());
}

void require_fresh_cache(const Tensor4& x, const Dims4& dims, double fp,
                         const char* op) {
  if (x.dims() != dims || fingerprint(x) != fp)
    throw ContractError(std::string(op) +
                        ": cache does not match this input (stale forward?)");
}

// d(1/sqrt(v+eps))/dv = -0.5 * inv_std^3
inline double dinvstd_dvar(double inv_std) {
  return -0.5 * inv_std * inv_std * inv_std;
}

}  // namespace

const char* norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::kBn:
      return "bn";
    case NormKind::kUbn:
      return "ubn";
    case NormKind::kIn:
      return "in";
    case NormKind::kLn:
      return "ln";
    case NormKind::kGn:
      return "gn";
  }
  return "?";
}

bool parse_norm_kind(const std::string& name, NormKind* out) {
  if (name == "bn") *out = NormKind::kBn;
  else if (name == "ubn") *out = NormKind::kUbn;
  else if (name == "in") *out = NormKind::kIn;
  else if (name == "ln") *out = NormKind::kLn;
  else if (name == "gn") *out = NormKind::kGn;
  else return false;
  return true;
}

RunningStats RunningStats::init(int channels, bool var_zero) {
  RunningStats s;
  s.mu.assign(channels, 0.0);
  s.var.assign(channels, var_zero ? 0.0 : 1.0);
  return s;
}

UbnParams UbnParams::init(int channels) {
  UbnParams p;
  p.gamma.assign(channels, 1.0);
  p.beta.assign(channels, 0.0);
  p.w_c.assign(channels, 0.0);
  p.w_s.assign(channels, 0.0);
  p.b_s.assign(channels, 0.0);
  p.affine_kernels.assign(channels, std::array<double, 9>{});
  for (auto& k : p.affine_kernels) k[4] = 1.0;
  p.affine_bias.assign(channels, 0.0);
  return p;
}

NormGrads NormGrads::zeros_like(const UbnParams& p, const Dims4& input_dims) {
  NormGrads g;
  const std::size_t c = p.gamma.size();
  g.d_input = Tensor4::zeros(input_dims);
  g.d_gamma.assign(c, 0.0);
  g.d_beta.assign(c, 0.0);
  g.d_w_c.assign(c, 0.0);
  g.d_w_s.assign(c, 0.0);
  g.d_b_s.assign(c, 0.0);
  g.d_affine_kernels.assign(c, std::array<double, 9>{});
  g.d_affine_bias.assign(c, 0.0);
  return g;
}

double condensation_score(const Tensor4& x, bool divisor_batch_only,
                          CosineWarnings* warnings) {
  if (x.b() < 2)
    throw DimensionError("condensation_score: needs B >= 2, got " +
                         x.dims().str());
  SquareMatrix m = pairwise_cosine_matrix(x, warnings);
  const int n = m.n();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += m.at(i, j);
  const double divisor = divisor_batch_only
                             ? static_cast<double>(n)
                             : static_cast<double>(n) * (n - 1);
  return s / divisor;
}

StatsDecision ubn_peek_stats(const Tensor4& x, const RunningStats& state,
                             const NormConfig& cfg) {
  StatsDecision d;
  bool force_open = false;
  if (x.b() < 2) {
    // Degenerate single-sample batch: score contribution 0, gate open.
    d.s_batch = 0.0;
    force_open = true;
  } else {
    d.s_batch = condensation_score(x, cfg.score_divisor_batch_only);
  }
  if (!std::isfinite(d.s_batch))
    throw Error("ubn_update_stats: non-finite condensation score");
  // Score update happens before the branch, even if the gate stays closed.
  d.s_after = cfg.score_momentum * state.s +
              (1.0 - cfg.score_momentum) * d.s_batch;
  d.gate_open = force_open || d.s_after > cfg.tau;
  if (d.gate_open) {
    d.batch_mean = channel_mean(x);
    d.batch_var = channel_var(x, d.batch_mean);
    const double m = cfg.momentum;
    if (cfg.use_batch_stats_when_open) {
      d.mu_used = d.batch_mean;
      d.var_used = d.batch_var;
      d.stats_coeff = 1.0;
    } else {
      d.mu_used.resize(d.batch_mean.size());
      d.var_used.resize(d.batch_var.size());
      for (std::size_t c = 0; c < d.mu_used.size(); ++c) {
        d.mu_used[c] = m * d.batch_mean[c] + (1.0 - m) * state.mu[c];
        d.var_used[c] = m * d.batch_var[c] + (1.0 - m) * state.var[c];
      }
      d.stats_coeff = m;
    }
  } else {
    d.mu_used = state.mu;
    d.var_used = state.var;
    d.stats_coeff = 0.0;
  }
  return d;
}

StatsDecision ubn_update_stats(const Tensor4& x, RunningStats& state,
                               const NormConfig& cfg) {
  if (static_cast<std::size_t>(state.mu.size()) !=
      static_cast<std::size_t>(x.c()))
    throw DimensionError("ubn_update_stats: state channels mismatch");
  StatsDecision d = ubn_peek_stats(x, state, cfg);
  state.s = d.s_after;
  if (d.gate_open) {
    if (cfg.use_batch_stats_when_open) {
      // Stored statistics always follow the EMA even when normalization
      // uses the raw batch values.
      const double m = cfg.momentum;
      for (std::size_t c = 0; c < state.mu.size(); ++c) {
        state.mu[c] = m * d.batch_mean[c] + (1.0 - m) * state.mu[c];
        state.var[c] = m * d.batch_var[c] + (1.0 - m) * state.var[c];
      }
    } else {
      state.mu = d.mu_used;
      state.var = d.var_used;
    }
  }
  state.step_count += 1;
  return d;
}

// ---- plain batch normalization ----

Tensor4 bn_train_forward(const Tensor4& x, RunningStats& state,
                         const UbnParams& p, const NormConfig& cfg,
                         BnCache* cache) {
  require_channels(x, p, "bn_train_forward");
  require_finite(x, "bn_train_forward");
  if (static_cast<std::size_t>(x.b()) * x.h() * x.w() < 2)
    throw DimensionError("bn_train_forward: needs B*H*W >= 2, got " +
                         x.dims().str());
  ChannelVec mu = channel_mean(x);
  ChannelVec var = channel_var(x, mu);

  const std::size_t plane = x.plane_size();
  Tensor4 xhat = Tensor4::zeros(x.dims());
  Tensor4 y = Tensor4::zeros(x.dims());
  ChannelVec inv_std(x.c());
  for (int c = 0; c < x.c(); ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + cfg.eps);
  for (int b = 0; b < x.b(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      kernels::normalize_affine(x.plane(b, c), plane, mu[c], inv_std[c], 1.0,
                                0.0, xhat.plane(b, c));
      kernels::scale_shift(xhat.plane(b, c), plane, p.gamma[c], p.beta[c],
                           y.plane(b, c));
    }
  }

  const double m = cfg.momentum;
  for (int c = 0; c < x.c(); ++c) {
    state.mu[c] = m * mu[c] + (1.0 - m) * state.mu[c];
    state.var[c] = m * var[c] + (1.0 - m) * state.var[c];
  }
  state.step_count += 1;

  if (cache) {
    cache->dims = x.dims();
    cache->mu = std::move(mu);
    cache->var = std::move(var);
    cache->inv_std = std::move(inv_std);
    cache->xhat = std::move(xhat);
  }
  return y;
}

Tensor4 bn_eval_forward(const Tensor4& x, const RunningStats& state,
                        const UbnParams& p, const NormConfig& cfg) {
  require_channels(x, p, "bn_eval_forward");
  if (state.step_count < 1 && !cfg.allow_cold_start_eval)
    throw StateError(
        "bn_eval_forward: no accumulated statistics (cold start); set "
        "allow_cold_start_eval to proceed");
  const std::size_t plane = x.plane_size();
  Tensor4 y = Tensor4::zeros(x.dims());
  for (int b = 0; b < x.b(); ++b)
    for (int c = 0; c < x.c(); ++c)
      kernels::normalize_affine(x.plane(b, c), plane, state.mu[c],
                                1.0 / std::sqrt(state.var[c] + cfg.eps),
                                p.gamma[c], p.beta[c], y.plane(b, c));
  return y;
}

NormGrads bn_backward(const Tensor4& x, const Tensor4& upstream,
                      const BnCache& cache, const UbnParams& p,
                      const NormConfig& cfg) {
  if (x.dims() != cache.dims || upstream.dims() != cache.dims)
    throw ContractError("bn_backward: cache/input shape mismatch");
  NormGrads g = NormGrads::zeros_like(p, x.dims());
  const std::size_t plane = x.plane_size();
  const double n = static_cast<double>(x.b()) * plane;

  for (int c = 0; c < x.c(); ++c) {
    double sum_up = 0.0, sum_up_xhat = 0.0;
    for (int b = 0; b < x.b(); ++b) {
      sum_up += kernels::sum(upstream.plane(b, c), plane);
      sum_up_xhat +=
          kernels::dot(upstream.plane(b, c), cache.xhat.plane(b, c), plane);
    }
    g.d_gamma[c] = sum_up_xhat;
    g.d_beta[c] = sum_up;

    const double inv_std = cache.inv_std[c];
    const double gamma = p.gamma[c];
    if (cfg.grad_through_batch_stats) {
      // dxhat = up * gamma; dx = inv_std*(dxhat - mean(dxhat)
      //                                  - xhat*mean(dxhat*xhat))
      const double mean_dxhat = gamma * sum_up / n;
      const double mean_dxhat_xhat = gamma * sum_up_xhat / n;
      for (int b = 0; b < x.b(); ++b) {
        const double* up = upstream.plane(b, c);
        const double* xh = cache.xhat.plane(b, c);
        double* dx = g.d_input.plane(b, c);
        for (std::size_t i = 0; i < plane; ++i)
          dx[i] = inv_std *
                  (gamma * up[i] - mean_dxhat - xh[i] * mean_dxhat_xhat);
      }
    } else {
      // Statistics detached: dx = up * gamma * inv_std.
      for (int b = 0; b < x.b(); ++b)
        kernels::scale_shift(upstream.plane(b, c), plane, gamma * inv_std,
                             0.0, g.d_input.plane(b, c));
    }
  }
  return g;
}

// ---- condensation-gated normalization ----

Tensor4 ubn_apply(const Tensor4& x, const ChannelVec& mu_norm,
                  const ChannelVec& var_norm, const UbnParams& p,
                  const NormConfig& cfg, UbnCache* cache) {
  require_channels(x, p, "ubn_apply");
  if (mu_norm.size() != static_cast<std::size_t>(x.c()) ||
      var_norm.size() != static_cast<std::size_t>(x.c()))
    throw DimensionError("ubn_apply: statistics length mismatch");

  const std::size_t plane = x.plane_size();
  const int nb = x.b(), nc = x.c();

  std::vector<double> pooled_x;
  Tensor4 x_prime;  // only materialized when centering is rectified
  const Tensor4* centered_src = &x;
  if (cfg.centering_rect) {
    pooled_x.resize(static_cast<std::size_t>(nb) * nc);
    x_prime = Tensor4::zeros(x.dims());
    for (int b = 0; b < nb; ++b)
      for (int c = 0; c < nc; ++c) {
        const double pool = kernels::sum(x.plane(b, c), plane) / plane;
        pooled_x[static_cast<std::size_t>(b) * nc + c] = pool;
        kernels::scale_shift(x.plane(b, c), plane, 1.0, p.w_c[c] * pool,
                             x_prime.plane(b, c));
      }
    centered_src = &x_prime;
  }

  ChannelVec inv_std(nc);
  for (int c = 0; c < nc; ++c)
    inv_std[c] = 1.0 / std::sqrt(var_norm[c] + cfg.eps);

  Tensor4 xhat_prime = Tensor4::zeros(x.dims());
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < nc; ++c)
      kernels::normalize_affine(centered_src->plane(b, c), plane, mu_norm[c],
                                inv_std[c], 1.0, 0.0,
                                xhat_prime.plane(b, c));

  std::vector<double> pooled_xhat, gate;
  Tensor4 xhat_dprime;
  const Tensor4* affine_src = &xhat_prime;
  if (cfg.scaling_rect) {
    pooled_xhat.resize(static_cast<std::size_t>(nb) * nc);
    gate.resize(static_cast<std::size_t>(nb) * nc);
    xhat_dprime = Tensor4::zeros(x.dims());
    for (int b = 0; b < nb; ++b)
      for (int c = 0; c < nc; ++c) {
        const std::size_t idx = static_cast<std::size_t>(b) * nc + c;
        const double pool =
            kernels::sum(xhat_prime.plane(b, c), plane) / plane;
        pooled_xhat[idx] = pool;
        gate[idx] = sigmoid(p.w_s[c] * pool + p.b_s[c]);
        kernels::scale_shift(xhat_prime.plane(b, c), plane, gate[idx], 0.0,
                             xhat_dprime.plane(b, c));
      }
    affine_src = &xhat_dprime;
  }

  Tensor4 y;
  if (cfg.affine_rect) {
    y = depthwise_conv3(*affine_src, p.affine_kernels, p.affine_bias);
  } else {
    y = Tensor4::zeros(x.dims());
    for (int b = 0; b < nb; ++b)
      for (int c = 0; c < nc; ++c)
        kernels::scale_shift(affine_src->plane(b, c), plane, p.gamma[c],
                             p.beta[c], y.plane(b, c));
  }

  if (cache) {
    cache->dims = x.dims();
    cache->mu_used = mu_norm;
    cache->var_used = var_norm;
    cache->inv_std = std::move(inv_std);
    cache->pooled_x = std::move(pooled_x);
    cache->pooled_xhat = std::move(pooled_xhat);
    cache->gate = std::move(gate);
    cache->xhat_prime = std::move(xhat_prime);
    cache->xhat_dprime = std::move(xhat_dprime);
    cache->input_fingerprint = fingerprint(x);
  }
  return y;
}

Tensor4 ubn_forward_train(const Tensor4& x, RunningStats& state,
                          const UbnParams& p, const NormConfig& cfg,
                          UbnCache* cache, StatsDecision* decision) {
  require_channels(x, p, "ubn_forward_train");
  require_finite(x, "ubn_forward_train");
  StatsDecision d = ubn_update_stats(x, state, cfg);
  Tensor4 y = ubn_apply(x, d.mu_used, d.var_used, p, cfg, cache);
  if (cache) {
    cache->gate_open = d.gate_open;
    cache->stats_coeff = d.stats_coeff;
    cache->batch_mean = d.batch_mean;
  }
  if (decision) *decision = std::move(d);
  return y;
}

Tensor4 ubn_forward_eval(const Tensor4& x, const RunningStats& state,
                         const UbnParams& p, const NormConfig& cfg) {
  require_channels(x, p, "ubn_forward_eval");
  if (state.step_count < 1 && !cfg.allow_cold_start_eval)
    throw StateError(
        "ubn_forward_eval: no accumulated statistics (cold start); set "
        "allow_cold_start_eval to proceed");
  return ubn_apply(x, state.mu, state.var, p, cfg, nullptr);
}

Tensor4 ubn_forward(const Tensor4& x, RunningStats& state, const UbnParams& p,
                    const NormConfig& cfg, NormMode mode) {
  return mode == NormMode::kTrain ? ubn_forward_train(x, state, p, cfg)
                                  : ubn_forward_eval(x, state, p, cfg);
}

NormGrads ubn_backward(const Tensor4& x, const Tensor4& upstream,
                       const UbnCache& cache, const UbnParams& p,
                       const NormConfig& cfg) {
  require_channels(x, p, "ubn_backward");
  if (upstream.dims() != x.dims())
    throw DimensionError("ubn_backward: upstream shape mismatch");
  require_fresh_cache(x, cache.dims, cache.input_fingerprint, "ubn_backward");

  NormGrads g = NormGrads::zeros_like(p, x.dims());
  const std::size_t plane = x.plane_size();
  const int nb = x.b(), nc = x.c();
  const double n = static_cast<double>(nb) * plane;

  // Y -> xhat'' (affine recovery)
  Tensor4 d_affine_src = Tensor4::zeros(x.dims());
  const Tensor4& affine_src =
      cfg.scaling_rect ? cache.xhat_dprime : cache.xhat_prime;
  if (cfg.affine_rect) {
    for (int c = 0; c < nc; ++c) {
      std::array<double, 9> flipped;
      for (int i = 0; i < 9; ++i) flipped[i] = p.affine_kernels[c][8 - i];
      for (int b = 0; b < nb; ++b) {
        kernels::conv3x3_acc(upstream.plane(b, c), x.h(), x.w(),
                             flipped.data(), d_affine_src.plane(b, c));
        kernels::conv3x3_kernel_grad_acc(affine_src.plane(b, c),
                                         upstream.plane(b, c), x.h(), x.w(),
                                         g.d_affine_kernels[c].data());
        g.d_affine_bias[c] += kernels::sum(upstream.plane(b, c), plane);
      }
    }
  } else {
    for (int c = 0; c < nc; ++c) {
      for (int b = 0; b < nb; ++b) {
        g.d_gamma[c] +=
            kernels::dot(upstream.plane(b, c), affine_src.plane(b, c), plane);
        g.d_beta[c] += kernels::sum(upstream.plane(b, c), plane);
        kernels::scale_shift(upstream.plane(b, c), plane, p.gamma[c], 0.0,
                             d_affine_src.plane(b, c));
      }
    }
  }

  // xhat'' -> xhat' (sigmoid gate)
  Tensor4 d_xhat_prime = Tensor4::zeros(x.dims());
  if (cfg.scaling_rect) {
    for (int b = 0; b < nb; ++b) {
      for (int c = 0; c < nc; ++c) {
        const std::size_t idx = static_cast<std::size_t>(b) * nc + c;
        const double gv = cache.gate[idx];
        // direct path through the product
        kernels::scale_shift(d_affine_src.plane(b, c), plane, gv, 0.0,
                             d_xhat_prime.plane(b, c));
        // gate path: z = w_s * pool(xhat') + b_s
        const double d_gate = kernels::dot(d_affine_src.plane(b, c),
                                           cache.xhat_prime.plane(b, c),
                                           plane);
        const double dz = d_gate * gv * (1.0 - gv);
        g.d_w_s[c] += dz * cache.pooled_xhat[idx];
        g.d_b_s[c] += dz;
        // spread the pooled gradient evenly over the plane
        const double d_pool = dz * p.w_s[c];
        double* dxh = d_xhat_prime.plane(b, c);
        const double spread = d_pool / plane;
        for (std::size_t i = 0; i < plane; ++i) dxh[i] += spread;
      }
    }
  } else {
    d_xhat_prime = std::move(d_affine_src);
  }

  // xhat' = (x' - mu) * inv_std
  ChannelVec d_mu(nc, 0.0), d_var(nc, 0.0);
  Tensor4& d_x_prime = g.d_input;  // accumulate in place
  for (int c = 0; c < nc; ++c) {
    const double inv_std = cache.inv_std[c];
    double sum_d = 0.0, sum_d_xhat = 0.0;
    for (int b = 0; b < nb; ++b) {
      sum_d += kernels::sum(d_xhat_prime.plane(b, c), plane);
      sum_d_xhat += kernels::dot(d_xhat_prime.plane(b, c),
                                 cache.xhat_prime.plane(b, c), plane);
      kernels::scale_shift(d_xhat_prime.plane(b, c), plane, inv_std, 0.0,
                           d_x_prime.plane(b, c));
    }
    d_mu[c] = -inv_std * sum_d;
    // xbar' = xhat'/inv_std, so sum(d*xbar') = sum_d_xhat/inv_std
    d_var[c] = dinvstd_dvar(inv_std) * sum_d_xhat / inv_std;
  }

  // x' = x + w_c * pool(x): pooled path and w_c gradient
  if (cfg.centering_rect) {
    for (int b = 0; b < nb; ++b) {
      for (int c = 0; c < nc; ++c) {
        const std::size_t idx = static_cast<std::size_t>(b) * nc + c;
        const double sum_dxp = kernels::sum(d_x_prime.plane(b, c), plane);
        g.d_w_c[c] += cache.pooled_x[idx] * sum_dxp;
        const double spread = p.w_c[c] * sum_dxp / plane;
        double* dx = d_x_prime.plane(b, c);
        for (std::size_t i = 0; i < plane; ++i) dx[i] += spread;
      }
    }
  }

  // statistics path: mu_used/var_used carry a stats_coeff-weighted batch
  // mean/variance computed from x
  if (cfg.grad_through_batch_stats && cache.stats_coeff != 0.0) {
    const double coeff = cache.stats_coeff;
    for (int c = 0; c < nc; ++c) {
      const double d_mean = coeff * d_mu[c] / n;
      const double d_var_coeff = coeff * d_var[c] * 2.0 / n;
      const double mean_c = cache.batch_mean[c];
      for (int b = 0; b < nb; ++b) {
        const double* xp = x.plane(b, c);
        double* dx = g.d_input.plane(b, c);
        for (std::size_t i = 0; i < plane; ++i)
          dx[i] += d_mean + d_var_coeff * (xp[i] - mean_c);
      }
    }
  }

  return g;
}

// ---- instance / layer / group baselines ----

namespace {

struct RegionLayout {
  int regions_per_sample;   // IN: C, LN: 1, GN: groups
  int channels_per_region;  // IN: 1, LN: C, GN: C/groups
};

RegionLayout region_layout(const Tensor4& x, const NormConfig& cfg) {
  switch (cfg.kind) {
    case NormKind::kIn:
      return {x.c(), 1};
    case NormKind::kLn:
      return {1, x.c()};
    case NormKind::kGn: {
      if (cfg.gn_groups < 1 || x.c() % cfg.gn_groups != 0)
        throw ConfigError("group norm: groups " +
                          std::to_string(cfg.gn_groups) +
                          " does not divide channels " +
                          std::to_string(x.c()));
      return {cfg.gn_groups, x.c() / cfg.gn_groups};
    }
    default:
      throw ConfigError("alt_norm: kind must be in/ln/gn");
  }
}

}  // namespace

Tensor4 alt_norm_forward(const Tensor4& x, const UbnParams& p,
                         const NormConfig& cfg, AltCache* cache) {
  require_channels(x, p, "alt_norm_forward");
  const RegionLayout layout = region_layout(x, cfg);
  const std::size_t plane = x.plane_size();
  const std::size_t region_len = layout.channels_per_region * plane;
  const std::size_t n_regions =
      static_cast<std::size_t>(x.b()) * layout.regions_per_sample;

  std::vector<double> mu(n_regions), var(n_regions), inv_std(n_regions);
  Tensor4 xhat = Tensor4::zeros(x.dims());
  Tensor4 y = Tensor4::zeros(x.dims());

  for (int b = 0; b < x.b(); ++b) {
    for (int r = 0; r < layout.regions_per_sample; ++r) {
      const std::size_t idx =
          static_cast<std::size_t>(b) * layout.regions_per_sample + r;
      const int c0 = r * layout.channels_per_region;
      const double* seg = x.plane(b, c0);
      mu[idx] = kernels::sum(seg, region_len) / region_len;
      var[idx] = kernels::sumsq_centered(seg, region_len, mu[idx]) /
                 region_len;
      inv_std[idx] = 1.0 / std::sqrt(var[idx] + cfg.eps);
      for (int cc = 0; cc < layout.channels_per_region; ++cc) {
        const int c = c0 + cc;
        kernels::normalize_affine(x.plane(b, c), plane, mu[idx], inv_std[idx],
                                  1.0, 0.0, xhat.plane(b, c));
        kernels::scale_shift(xhat.plane(b, c), plane, p.gamma[c], p.beta[c],
                             y.plane(b, c));
      }
    }
  }

  if (cache) {
    cache->dims = x.dims();
    cache->mu = std::move(mu);
    cache->var = std::move(var);
    cache->inv_std = std::move(inv_std);
    cache->xhat = std::move(xhat);
  }
  return y;
}

NormGrads alt_norm_backward(const Tensor4& x, const Tensor4& upstream,
                            const AltCache& cache, const UbnParams& p,
                            const NormConfig& cfg) {
  if (x.dims() != cache.dims || upstream.dims() != cache.dims)
    throw ContractError("alt_norm_backward: cache/input shape mismatch");
  const RegionLayout layout = region_layout(x, cfg);
  const std::size_t plane = x.plane_size();
  const double region_n =
      static_cast<double>(layout.channels_per_region) * plane;

  NormGrads g = NormGrads::zeros_like(p, x.dims());
  for (int b = 0; b < x.b(); ++b) {
    for (int r = 0; r < layout.regions_per_sample; ++r) {
      const std::size_t idx =
          static_cast<std::size_t>(b) * layout.regions_per_sample + r;
      const int c0 = r * layout.channels_per_region;
      const double inv_std = cache.inv_std[idx];

      double sum_h = 0.0, sum_h_xhat = 0.0;  // h = up * gamma
      for (int cc = 0; cc < layout.channels_per_region; ++cc) {
        const int c = c0 + cc;
        const double su = kernels::sum(upstream.plane(b, c), plane);
        const double sux =
            kernels::dot(upstream.plane(b, c), cache.xhat.plane(b, c), plane);
        g.d_beta[c] += su;
        g.d_gamma[c] += sux;
        sum_h += p.gamma[c] * su;
        sum_h_xhat += p.gamma[c] * sux;
      }

      for (int cc = 0; cc < layout.channels_per_region; ++cc) {
        const int c = c0 + cc;
        const double gamma = p.gamma[c];
        const double* up = upstream.plane(b, c);
        const double* xh = cache.xhat.plane(b, c);
        double* dx = g.d_input.plane(b, c);
        if (cfg.grad_through_batch_stats) {
          const double mean_h = sum_h / region_n;
          const double mean_h_xhat = sum_h_xhat / region_n;
          for (std::size_t i = 0; i < plane; ++i)
            dx[i] = inv_std * (gamma * up[i] - mean_h - xh[i] * mean_h_xhat);
        } else {
          for (std::size_t i = 0; i < plane; ++i)
            dx[i] = inv_std * gamma * up[i];
        }
      }
    }
  }
  return g;
}

Tensor4 sigmoid_map(const Tensor4& x) {
  Tensor4 y = Tensor4::zeros(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i)
    y.data()[i] = sigmoid(x.data()[i]);
  return y;
}

}  // namespace normlab
