// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Two-layer tanh RNN used as a reference for the stacking strategies.
//
//   conventional  h1(t) = tanh(x W_01 + h1(t-1) U_11)
//                 h2(t) = tanh(h1(t) W_12 + h2(t-1) U_22)
//   feedback      h1(t) = tanh(x W_01 + h2(t-1) U_21)
//                 h2(t) = tanh(h1(t) W_12)
//
// No biases. Only used to reason about (and test) how the two strategies
// route state and how many weights each one needs.

#pragma once

#include <cstdint>

#include "mmgru/gru.hpp"
#include "mmgru/linalg.hpp"

namespace mmgru {

struct PlainRnnStack {
  StackKind kind = StackKind::kConventional;  // kConventional or kFeedback
  Matrix w_input;     // d_in x h
  Matrix w_up;        // h x h, lower -> upper
  Matrix u_lower;     // h x h; h1 -> h1 (conventional) or h2 -> h1 (feedback)
  Matrix u_upper;     // h x h; h2 -> h2, empty for feedback

  static PlainRnnStack random(StackKind kind, std::size_t input_size, std::size_t hidden_size,
                              Rng& rng, double scale);

  std::uint64_t weight_count() const;
};

struct PlainRnnState {
  Vector lower, upper;
};

PlainRnnState plain_rnn_step(const PlainRnnStack& net, const Vector& x, const PlainRnnState& prev);

}  // namespace mmgru
