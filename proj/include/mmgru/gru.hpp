// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Gated recurrent unit with analytic backward pass, and the two-layer
// stacking strategies.
//
// Row-vector convention, x (1 x d_in), h (1 x h):
//
//   r  = sigmoid(x W_r + h_prev U_r + b_r)            reset gate
//   z  = sigmoid(x W_z + h_prev U_z + b_z)            update gate
//   h~ = tanh(x W_h + (r * h_prev) U_h + b_h)          candidate
//   h  = (1 - z) * h_prev + z * h~
//
// Stacking (per time step t):
//   single        h1(t) = GRU(x(t), h1(t-1))
//   conventional  h1(t) = GRU1(x(t), h1(t-1));  h2(t) = GRU2(h1(t), h2(t-1))
//   feedback      h1(t) = GRU1(x(t), h2(t-1));  h2(t) = GRU2(h1(t), 0)
//
// In the feedback stack the upper layer carries no recurrence of its own: its
// U matrices are fixed at zero, never trained and not counted as parameters.
// The previous upper state is routed into the lower layer instead.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mmgru/linalg.hpp"

namespace mmgru {

enum class StackKind : std::uint8_t { kSingle = 0, kConventional = 1, kFeedback = 2 };

std::string_view to_string(StackKind kind);
/// Accepts "single", "conventional", "feedback"; throws ConfigError otherwise.
StackKind parse_stack_kind(std::string_view name);
std::size_t layer_count(StackKind kind);

struct GruParams {
  Matrix w_reset, w_update, w_cand;  // d_in x h
  Matrix u_reset, u_update, u_cand;  // h x h; all zero when !recurrent
  Vector b_reset, b_update, b_cand;  // h
  bool recurrent = true;

  static GruParams zeros(std::size_t input_size, std::size_t hidden_size, bool recurrent = true);

  std::size_t input_size() const { return w_reset.rows(); }
  std::size_t hidden_size() const { return w_reset.cols(); }

  /// Throws ShapeError if the nine tensors do not agree on (d_in, h).
  void validate() const;
};

/// Everything the backward pass needs from one forward step.
struct GruCache {
  Vector x, h_prev;
  Vector reset, update, cand;
  Vector h;
};

GruCache gru_forward(const GruParams& p, const Vector& x, const Vector& h_prev);

struct GruInputGrads {
  Vector dx;
  Vector dh_prev;
};

/// Adds dL/dparams into `grads` (same shapes as `p`) given dL/dh = `dh`.
/// U gradients are skipped for non-recurrent layers.
GruInputGrads gru_backward_accumulate(const GruParams& p, const GruCache& cache, const Vector& dh,
                                      GruParams& grads);

struct GruBackward {
  GruParams grads;
  Vector dx;
  Vector dh_prev;
};

GruBackward gru_backward(const GruParams& p, const GruCache& cache, const Vector& dh);

struct GruStack {
  StackKind kind = StackKind::kSingle;
  std::vector<GruParams> layers;

  /// Zero-initialized stack; layer 0 maps input_size -> hidden, the rest
  /// hidden -> hidden.
  static GruStack zeros(StackKind kind, std::size_t input_size, std::size_t hidden_size);

  std::size_t input_size() const { return layers.front().input_size(); }
  std::size_t hidden_size() const { return layers.front().hidden_size(); }

  /// Throws ConfigError on a layer count or recurrence flag that does not fit
  /// `kind`, ShapeError on inconsistent dimensions.
  void validate() const;
};

/// Per-layer hidden vectors at one time step (index 0 is the lowest layer).
using StackState = std::vector<Vector>;

StackState zero_state(const GruStack& stack);

struct StackStep {
  std::vector<GruCache> caches;

  StackState state() const;
  /// Top-layer hidden state, the vector fed to the output projection.
  const Vector& output() const { return caches.back().h; }
};

StackStep stack_forward(const GruStack& stack, const Vector& x, const StackState& prev);

struct StackInputGrads {
  Vector dx;
  StackState d_prev;  // gradient w.r.t. the previous step's state
};

/// `d_state[j]` is the total upstream gradient on layer j's output at this
/// step. Parameter gradients are added into `grads`.
StackInputGrads stack_backward_accumulate(const GruStack& stack, const StackStep& step,
                                          const StackState& d_state, GruStack& grads);

enum class RecurrentUnit { kGru, kLstm };

/// Closed-form trainable-parameter count. A single layer has
/// gates * (d_in*h + h*h + h) with 3 gates for GRU and 4 for LSTM; stacks sum
/// their layers, and the feedback upper layer drops its h*h recurrent terms.
std::uint64_t param_count(RecurrentUnit unit, std::uint64_t input_size, std::uint64_t hidden_size,
                          StackKind kind = StackKind::kSingle);

/// Number of trainable scalars actually held by `stack`.
std::uint64_t trainable_count(const GruStack& stack);

}  // namespace mmgru
