// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/gru.hpp"

#include "mmgru/errors.hpp"

namespace mmgru {

std::string_view to_string(StackKind kind) {
  switch (kind) {
    case StackKind::kSingle:
      return "single";
    case StackKind::kConventional:
      return "conventional";
    case StackKind::kFeedback:
      return "feedback";
  }
  return "unknown";
}

StackKind parse_stack_kind(std::string_view name) {
  if (name == "single") return StackKind::kSingle;
  if (name == "conventional") return StackKind::kConventional;
  if (name == "feedback") return StackKind::kFeedback;
  throw ConfigError("unknown stack kind '" + std::string(name) + "'");
}

std::size_t layer_count(StackKind kind) { return kind == StackKind::kSingle ? 1 : 2; }

GruParams GruParams::zeros(std::size_t input_size, std::size_t hidden_size, bool recurrent) {
  GruParams p;
  p.w_reset = p.w_update = p.w_cand = Matrix(input_size, hidden_size);
  p.u_reset = p.u_update = p.u_cand = Matrix(hidden_size, hidden_size);
  p.b_reset = p.b_update = p.b_cand = Vector(hidden_size);
  p.recurrent = recurrent;
  return p;
}

void GruParams::validate() const {
  const std::size_t d = input_size(), h = hidden_size();
  auto check = [&](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
      throw ShapeError(std::string("GRU ") + name + " has shape " + m.shape_string() +
                       ", expected (" + std::to_string(r) + "x" + std::to_string(c) + ")");
    }
  };
  check(w_update, d, h, "w_update");
  check(w_cand, d, h, "w_cand");
  check(u_reset, h, h, "u_reset");
  check(u_update, h, h, "u_update");
  check(u_cand, h, h, "u_cand");
  for (const Vector* b : {&b_reset, &b_update, &b_cand}) {
    if (b->size() != h) throw ShapeError("GRU bias length does not match hidden size");
  }
}

GruCache gru_forward(const GruParams& p, const Vector& x, const Vector& h_prev) {
  if (x.size() != p.input_size() || h_prev.size() != p.hidden_size()) {
    throw ShapeError("gru_forward: got x(" + std::to_string(x.size()) + "), h_prev(" +
                     std::to_string(h_prev.size()) + ") for a GRU with d_in=" +
                     std::to_string(p.input_size()) + ", h=" + std::to_string(p.hidden_size()));
  }
  GruCache c;
  c.x = x;
  c.h_prev = h_prev;

  Vector a_r = add(vecmat(x, p.w_reset), p.b_reset);
  Vector a_z = add(vecmat(x, p.w_update), p.b_update);
  if (p.recurrent) {
    a_r = add(a_r, vecmat(h_prev, p.u_reset));
    a_z = add(a_z, vecmat(h_prev, p.u_update));
  }
  c.reset = sigmoid(a_r);
  c.update = sigmoid(a_z);

  Vector a_h = add(vecmat(x, p.w_cand), p.b_cand);
  if (p.recurrent) a_h = add(a_h, vecmat(hadamard(c.reset, h_prev), p.u_cand));
  c.cand = tanh(a_h);

  const std::size_t h = p.hidden_size();
  c.h = Vector(h);
  for (std::size_t i = 0; i < h; ++i) {
    c.h[i] = (1.0 - c.update[i]) * h_prev[i] + c.update[i] * c.cand[i];
  }
  return c;
}

GruInputGrads gru_backward_accumulate(const GruParams& p, const GruCache& c, const Vector& dh,
                                      GruParams& g) {
  const std::size_t h = p.hidden_size();
  if (dh.size() != h) {
    throw ShapeError("gru_backward: dh has length " + std::to_string(dh.size()) +
                     ", hidden size is " + std::to_string(h));
  }
  if (c.h.size() != h || c.x.size() != p.input_size()) {
    throw ShapeError("gru_backward: cache does not match parameters");
  }

  GruInputGrads out{Vector(p.input_size()), Vector(h)};
  Vector da_h(h), da_z(h);
  for (std::size_t i = 0; i < h; ++i) {
    const double z = c.update[i];
    const double dcand = dh[i] * z;
    da_h[i] = dcand * (1.0 - c.cand[i] * c.cand[i]);
    da_z[i] = dh[i] * (c.cand[i] - c.h_prev[i]) * z * (1.0 - z);
    out.dh_prev[i] = dh[i] * (1.0 - z);
  }

  add_outer(g.w_cand, c.x, da_h);
  axpy(1.0, da_h, g.b_cand);
  add_outer(g.w_update, c.x, da_z);
  axpy(1.0, da_z, g.b_update);
  axpy(1.0, vecmat_transposed(da_h, p.w_cand), out.dx);
  axpy(1.0, vecmat_transposed(da_z, p.w_update), out.dx);

  if (!p.recurrent) {
    // Reset gate only acts through U_h, so with no recurrence it has no
    // effect on the output and receives zero gradient.
    return out;
  }

  const Vector gated = hadamard(c.reset, c.h_prev);
  add_outer(g.u_cand, gated, da_h);
  add_outer(g.u_update, c.h_prev, da_z);

  const Vector d_gated = vecmat_transposed(da_h, p.u_cand);
  Vector da_r(h);
  for (std::size_t i = 0; i < h; ++i) {
    const double r = c.reset[i];
    da_r[i] = d_gated[i] * c.h_prev[i] * r * (1.0 - r);
    out.dh_prev[i] += d_gated[i] * r;
  }
  add_outer(g.w_reset, c.x, da_r);
  add_outer(g.u_reset, c.h_prev, da_r);
  axpy(1.0, da_r, g.b_reset);

  axpy(1.0, vecmat_transposed(da_r, p.w_reset), out.dx);
  axpy(1.0, vecmat_transposed(da_z, p.u_update), out.dh_prev);
  axpy(1.0, vecmat_transposed(da_r, p.u_reset), out.dh_prev);
  return out;
}

GruBackward gru_backward(const GruParams& p, const GruCache& cache, const Vector& dh) {
  GruBackward out;
  out.grads = GruParams::zeros(p.input_size(), p.hidden_size(), p.recurrent);
  auto in = gru_backward_accumulate(p, cache, dh, out.grads);
  out.dx = std::move(in.dx);
  out.dh_prev = std::move(in.dh_prev);
  return out;
}

GruStack GruStack::zeros(StackKind kind, std::size_t input_size, std::size_t hidden_size) {
  GruStack s;
  s.kind = kind;
  s.layers.push_back(GruParams::zeros(input_size, hidden_size, true));
  if (kind != StackKind::kSingle) {
    s.layers.push_back(
        GruParams::zeros(hidden_size, hidden_size, kind == StackKind::kConventional));
  }
  return s;
}

void GruStack::validate() const {
  if (layers.size() != layer_count(kind)) {
    throw ConfigError("stack '" + std::string(to_string(kind)) + "' needs " +
                      std::to_string(layer_count(kind)) + " layer(s), got " +
                      std::to_string(layers.size()));
  }
  for (const auto& l : layers) l.validate();
  const std::size_t h = layers.front().hidden_size();
  for (std::size_t j = 1; j < layers.size(); ++j) {
    if (layers[j].input_size() != h || layers[j].hidden_size() != h) {
      throw ShapeError("stack layer " + std::to_string(j) + " must be h x h");
    }
  }
  if (!layers.front().recurrent) throw ConfigError("stack: lowest layer must be recurrent");
  if (kind == StackKind::kConventional && !layers[1].recurrent) {
    throw ConfigError("conventional stack: upper layer must be recurrent");
  }
  if (kind == StackKind::kFeedback && layers[1].recurrent) {
    throw ConfigError("feedback stack: upper layer must not be recurrent");
  }
}

StackState zero_state(const GruStack& stack) {
  return StackState(stack.layers.size(), Vector(stack.hidden_size()));
}

StackState StackStep::state() const {
  StackState s;
  s.reserve(caches.size());
  for (const auto& c : caches) s.push_back(c.h);
  return s;
}

StackStep stack_forward(const GruStack& stack, const Vector& x, const StackState& prev) {
  if (stack.layers.size() != layer_count(stack.kind)) {
    throw ConfigError("stack '" + std::string(to_string(stack.kind)) + "' needs " +
                      std::to_string(layer_count(stack.kind)) + " layer(s), has " +
                      std::to_string(stack.layers.size()));
  }
  if (prev.size() != stack.layers.size()) {
    throw ConfigError("stack_forward: state has " + std::to_string(prev.size()) +
                      " layer(s), stack has " + std::to_string(stack.layers.size()));
  }
  StackStep step;
  switch (stack.kind) {
    case StackKind::kSingle:
      step.caches.push_back(gru_forward(stack.layers[0], x, prev[0]));
      break;
    case StackKind::kConventional:
      step.caches.push_back(gru_forward(stack.layers[0], x, prev[0]));
      step.caches.push_back(gru_forward(stack.layers[1], step.caches[0].h, prev[1]));
      break;
    case StackKind::kFeedback:
      step.caches.push_back(gru_forward(stack.layers[0], x, prev[1]));
      step.caches.push_back(
          gru_forward(stack.layers[1], step.caches[0].h, Vector(stack.hidden_size())));
      break;
  }
  return step;
}

StackInputGrads stack_backward_accumulate(const GruStack& stack, const StackStep& step,
                                          const StackState& d_state, GruStack& grads) {
  const std::size_t h = stack.hidden_size();
  StackInputGrads out;
  out.d_prev = StackState(stack.layers.size(), Vector(h));

  if (stack.kind == StackKind::kSingle) {
    auto g = gru_backward_accumulate(stack.layers[0], step.caches[0], d_state[0], grads.layers[0]);
    out.dx = std::move(g.dx);
    out.d_prev[0] = std::move(g.dh_prev);
    return out;
  }

  auto upper =
      gru_backward_accumulate(stack.layers[1], step.caches[1], d_state[1], grads.layers[1]);
  const Vector d_lower = add(d_state[0], upper.dx);
  auto lower = gru_backward_accumulate(stack.layers[0], step.caches[0], d_lower, grads.layers[0]);
  out.dx = std::move(lower.dx);
  if (stack.kind == StackKind::kConventional) {
    out.d_prev[0] = std::move(lower.dh_prev);
    out.d_prev[1] = std::move(upper.dh_prev);
  } else {
    // Lower layer's recurrent input was the previous upper state; the upper
    // layer's own h_prev was the constant zero vector.
    out.d_prev[1] = std::move(lower.dh_prev);
  }
  return out;
}

std::uint64_t param_count(RecurrentUnit unit, std::uint64_t input_size, std::uint64_t hidden_size,
                          StackKind kind) {
  if (input_size == 0 || hidden_size == 0) {
    throw ParameterError("param_count: sizes must be positive");
  }
  const std::uint64_t gates = unit == RecurrentUnit::kGru ? 3 : 4;
  const std::uint64_t h = hidden_size;
  const std::uint64_t lower = gates * (input_size * h + h * h + h);
  switch (kind) {
    case StackKind::kSingle:
      return lower;
    case StackKind::kConventional:
      return lower + gates * (h * h + h * h + h);
    case StackKind::kFeedback:
      return lower + gates * (h * h + h);
  }
  return lower;
}

std::uint64_t trainable_count(const GruStack& stack) {
  std::uint64_t n = 0;
  for (const auto& l : stack.layers) {
    n += l.w_reset.size() + l.w_update.size() + l.w_cand.size();
    n += l.b_reset.size() + l.b_update.size() + l.b_cand.size();
    if (l.recurrent) n += l.u_reset.size() + l.u_update.size() + l.u_cand.size();
  }
  return n;
}

}  // namespace mmgru
