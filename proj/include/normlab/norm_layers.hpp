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

// Normalization layers: batch normalization with running statistics, its
// condensation-gated variant with centering / scaling / affine
// rectifications, and the instance / layer / group baselines. Each layer has
// a hand-written backward verified against finite differences.
//
// The gated variant works in two stages. Stage 1 smooths the batch
// condensation score S (mean pairwise cosine similarity) with momentum m'
// and, when S exceeds the threshold tau, refreshes the running mean and
// variance with momentum m; the refreshed values are what stage 2
// normalizes with. Stage 2 optionally rectifies centering with a pooled
// residual (w_c), scaling with a pooled sigmoid gate (w_s, b_s), and the
// affine recovery with a per-channel 3x3 convolution.

#ifndef NORMLAB_NORM_LAYERS_HPP_
#define NORMLAB_NORM_LAYERS_HPP_

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "normlab/tensor.hpp"

namespace normlab {

enum class NormKind { kBn, kUbn, kIn, kLn, kGn };

const char* norm_kind_name(NormKind kind);
bool parse_norm_kind(const std::string& name, NormKind* out);

enum class NormMode { kTrain, kEval };

/// Per-layer running state. Eval-mode forwards never mutate it.
struct RunningStats {
  ChannelVec mu;    // running mean
  ChannelVec var;   // running variance, entries >= 0
  double s = 0.0;   // smoothed condensation score, in [-1,1] once stepped
  long step_count = 0;

  /// mu = 0, var = 1 (or 0 when var_zero; that choice makes a cold-start
  /// eval divide by sqrt(eps) and is off by default).
  static RunningStats init(int channels, bool var_zero = false);

  bool operator==(const RunningStats&) const = default;
};

/// Learnable parameters. Only the fields the active configuration uses take
/// part in forward/backward; the rest ride along untouched.
struct UbnParams {
  ChannelVec gamma;  // plain affine scale
  ChannelVec beta;   // plain affine shift
  ChannelVec w_c;    // centering rectification weight
  ChannelVec w_s;    // scaling rectification weight
  ChannelVec b_s;    // scaling rectification bias
  std::vector<std::array<double, 9>> affine_kernels;  // per-channel 3x3
  ChannelVec affine_bias;

  /// Identity-at-init: gamma=1, beta=0, w_c=w_s=b_s=0, kernels=center
  /// delta, affine bias=0.
  static UbnParams init(int channels);

  int channels() const { return static_cast<int>(gamma.size()); }
};

struct NormConfig {
  NormKind kind = NormKind::kBn;
  double tau = 0.15;            // feature condensation threshold
  double momentum = 0.1;        // m, statistics momentum in (0,1]
  double score_momentum = 0.9;  // m', score momentum in [0,1)
  double eps = 1e-5;
  bool centering_rect = true;
  bool scaling_rect = true;
  bool affine_rect = true;
  bool grad_through_batch_stats = true;
  int gn_groups = 1;

  // Documented variants, all off by default.
  bool score_divisor_batch_only = false;   // divide the pair sum by B, not B(B-1)
  bool use_batch_stats_when_open = false;  // normalize with raw batch stats
  bool allow_cold_start_eval = false;
  bool init_running_var_zero = false;
};

struct NormGrads {
  Tensor4 d_input;
  ChannelVec d_gamma, d_beta;
  ChannelVec d_w_c, d_w_s, d_b_s;
  std::vector<std::array<double, 9>> d_affine_kernels;
  ChannelVec d_affine_bias;

  static NormGrads zeros_like(const UbnParams& p, const Dims4& input_dims);
};

/// Mean off-diagonal pairwise cosine similarity of the batch. With the
/// batch-only divisor the pair sum is divided by B instead of B(B-1).
/// Requires B >= 2.
double condensation_score(const Tensor4& x, bool divisor_batch_only = false,
                          CosineWarnings* warnings = nullptr);

/// Outcome of stage 1 for one training step.
struct StatsDecision {
  bool gate_open = false;
  double s_batch = 0.0;  // this batch's score (0 when B < 2)
  double s_after = 0.0;  // smoothed score after the update
  ChannelVec mu_used;    // statistics stage 2 normalizes with
  ChannelVec var_used;
  ChannelVec batch_mean;  // E[X], Var[X]; empty when the gate stayed closed
  ChannelVec batch_var;
  // Coefficient of the batch statistics inside mu_used/var_used: m when the
  // gate opened, 1 under use_batch_stats_when_open, 0 when closed. The
  // backward pass scales the statistics gradient path by it.
  double stats_coeff = 0.0;
};

/// Stage 1: smooth the score, then (if S > tau) refresh mu/var in `state`
/// with momentum m and return the refreshed values; otherwise return the
/// stored ones untouched. Single-sample batches force the gate open with a
/// zero score contribution. Increments step_count.
StatsDecision ubn_update_stats(const Tensor4& x, RunningStats& state,
                               const NormConfig& cfg);

/// Non-mutating variant of stage 1 (gradient checks evaluate the layer as a
/// pure function of input and parameters against a frozen state snapshot).
StatsDecision ubn_peek_stats(const Tensor4& x, const RunningStats& state,
                             const NormConfig& cfg);

// ---- plain batch normalization ----

struct BnCache {
  Dims4 dims;
  ChannelVec mu, var, inv_std;
  Tensor4 xhat;
};

/// Normalize with batch statistics, apply gamma/beta, update running stats
/// via EMA with momentum m. Requires B*H*W >= 2.
Tensor4 bn_train_forward(const Tensor4& x, RunningStats& state,
                         const UbnParams& p, const NormConfig& cfg,
                         BnCache* cache = nullptr);

/// Normalize with the stored running statistics; `state` is untouched.
/// Requires step_count >= 1 unless cfg.allow_cold_start_eval.
Tensor4 bn_eval_forward(const Tensor4& x, const RunningStats& state,
                        const UbnParams& p, const NormConfig& cfg);

NormGrads bn_backward(const Tensor4& x, const Tensor4& upstream,
                      const BnCache& cache, const UbnParams& p,
                      const NormConfig& cfg);

// ---- condensation-gated normalization ----

struct UbnCache {
  Dims4 dims;
  bool gate_open = false;
  double stats_coeff = 0.0;
  ChannelVec mu_used, var_used, inv_std;
  ChannelVec batch_mean;           // empty unless stats_coeff > 0
  std::vector<double> pooled_x;    // B*C spatial means of x (centering rect)
  std::vector<double> pooled_xhat; // B*C spatial means of xhat' (scaling rect)
  std::vector<double> gate;        // B*C sigmoid gate values (scaling rect)
  Tensor4 xhat_prime;              // after centering + scaling
  Tensor4 xhat_dprime;             // after the sigmoid gate (empty if unused)
  double input_fingerprint = 0.0;
};

/// Stage 2 with explicit statistics; shared by train, eval and gradcheck.
Tensor4 ubn_apply(const Tensor4& x, const ChannelVec& mu_norm,
                  const ChannelVec& var_norm, const UbnParams& p,
                  const NormConfig& cfg, UbnCache* cache = nullptr);

Tensor4 ubn_forward_train(const Tensor4& x, RunningStats& state,
                          const UbnParams& p, const NormConfig& cfg,
                          UbnCache* cache = nullptr,
                          StatsDecision* decision = nullptr);

Tensor4 ubn_forward_eval(const Tensor4& x, const RunningStats& state,
                         const UbnParams& p, const NormConfig& cfg);

/// Mode dispatcher for the two above.
Tensor4 ubn_forward(const Tensor4& x, RunningStats& state, const UbnParams& p,
                    const NormConfig& cfg, NormMode mode);

/// Gradients w.r.t. the input and every active parameter. `cache` must come
/// from the forward pass over the same `x`; a mismatch raises ContractError.
NormGrads ubn_backward(const Tensor4& x, const Tensor4& upstream,
                       const UbnCache& cache, const UbnParams& p,
                       const NormConfig& cfg);

// ---- instance / layer / group baselines ----

struct AltCache {
  Dims4 dims;
  std::vector<double> mu, var, inv_std;  // one entry per region
  Tensor4 xhat;
};

/// IN normalizes per (b,c); LN per b; GN per (b,group). gamma/beta are
/// per-channel. No running state.
Tensor4 alt_norm_forward(const Tensor4& x, const UbnParams& p,
                         const NormConfig& cfg, AltCache* cache = nullptr);

NormGrads alt_norm_backward(const Tensor4& x, const Tensor4& upstream,
                            const AltCache& cache, const UbnParams& p,
                            const NormConfig& cfg);

/// Elementwise logistic function.
Tensor4 sigmoid_map(const Tensor4& x);

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace normlab

#endif  // NORMLAB_NORM_LAYERS_HPP_
