// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/plain_rnn.hpp"

#include "mmgru/errors.hpp"

namespace mmgru {

PlainRnnStack PlainRnnStack::random(StackKind kind, std::size_t input_size,
                                    std::size_t hidden_size, Rng& rng, double scale) {
  if (kind == StackKind::kSingle) throw ConfigError("plain RNN reference needs two layers");
  PlainRnnStack net;
  net.kind = kind;
  net.w_input = init_uniform(rng, input_size, hidden_size, scale);
  net.w_up = init_uniform(rng, hidden_size, hidden_size, scale);
  net.u_lower = init_uniform(rng, hidden_size, hidden_size, scale);
  if (kind == StackKind::kConventional) {
    net.u_upper = init_uniform(rng, hidden_size, hidden_size, scale);
  }
  return net;
}

std::uint64_t PlainRnnStack::weight_count() const {
  return w_input.size() + w_up.size() + u_lower.size() + u_upper.size();
}

PlainRnnState plain_rnn_step(const PlainRnnStack& net, const Vector& x, const PlainRnnState& prev) {
  PlainRnnState next;
  if (net.kind == StackKind::kConventional) {
    next.lower = tanh(add(vecmat(x, net.w_input), vecmat(prev.lower, net.u_lower)));
    next.upper = tanh(add(vecmat(next.lower, net.w_up), vecmat(prev.upper, net.u_upper)));
  } else {
    next.lower = tanh(add(vecmat(x, net.w_input), vecmat(prev.upper, net.u_lower)));
    next.upper = tanh(vecmat(next.lower, net.w_up));
  }
  return next;
}

}  // namespace mmgru
