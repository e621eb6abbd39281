// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "mmgru/errors.hpp"
#include "mmgru/gru.hpp"
#include "mmgru/plain_rnn.hpp"
#include "support.hpp"

namespace mmgru {
namespace {

using testing::kFdStep;
using testing::kGradTolerance;
using testing::random_matrix;
using testing::random_vector;
using testing::relative_error;

GruParams random_gru(Rng& rng, std::size_t d_in, std::size_t h, double scale = 1.0,
                     bool recurrent = true) {
  GruParams p = GruParams::zeros(d_in, h, recurrent);
  p.w_reset = random_matrix(rng, d_in, h, scale);
  p.w_update = random_matrix(rng, d_in, h, scale);
  p.w_cand = random_matrix(rng, d_in, h, scale);
  if (recurrent) {
    p.u_reset = random_matrix(rng, h, h, scale);
    p.u_update = random_matrix(rng, h, h, scale);
    p.u_cand = random_matrix(rng, h, h, scale);
  }
  p.b_reset = random_vector(rng, h, scale);
  p.b_update = random_vector(rng, h, scale);
  p.b_cand = random_vector(rng, h, scale);
  return p;
}

// Straight-line scalar transcription of the cell, written independently of
// the library's vector helpers.
Vector naive_gru(const GruParams& p, const Vector& x, const Vector& hp) {
  const std::size_t d = x.size(), h = hp.size();
  Vector out(h);
  std::vector<double> r(h), z(h);
  for (std::size_t j = 0; j < h; ++j) {
    double ar = p.b_reset[j], az = p.b_update[j];
    for (std::size_t i = 0; i < d; ++i) {
      ar += x[i] * p.w_reset(i, j);
      az += x[i] * p.w_update(i, j);
    }
    for (std::size_t i = 0; i < h; ++i) {
      ar += hp[i] * p.u_reset(i, j);
      az += hp[i] * p.u_update(i, j);
    }
    r[j] = 1.0 / (1.0 + std::exp(-ar));
    z[j] = 1.0 / (1.0 + std::exp(-az));
  }
  for (std::size_t j = 0; j < h; ++j) {
    double ac = p.b_cand[j];
    for (std::size_t i = 0; i < d; ++i) ac += x[i] * p.w_cand(i, j);
    for (std::size_t i = 0; i < h; ++i) ac += r[i] * hp[i] * p.u_cand(i, j);
    out[j] = (1.0 - z[j]) * hp[j] + z[j] * std::tanh(ac);
  }
  return out;
}

std::vector<std::span<double>> param_spans(GruParams& p) {
  return {p.w_reset.values(), p.w_update.values(), p.w_cand.values(),
          p.u_reset.values(), p.u_update.values(), p.u_cand.values(),
          p.b_reset.values(), p.b_update.values(), p.b_cand.values()};
}

TEST(GruForward, MatchesScalarTranscription) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(6), h = 1 + rng.uniform_index(6);
    const GruParams p = random_gru(rng, d, h);
    const Vector x = random_vector(rng, d), hp = random_vector(rng, h);
    const Vector got = gru_forward(p, x, hp).h;
    const Vector want = naive_gru(p, x, hp);
    for (std::size_t j = 0; j < h; ++j) EXPECT_NEAR(got[j], want[j], 1e-14);
  }
}

TEST(GruForward, ZeroParamsHalveThePreviousState) {
  const GruParams p = GruParams::zeros(3, 4);
  const Vector v{0.2, -0.4, 1.0, -1.0};
  const GruCache c = gru_forward(p, Vector{1, 2, 3}, v);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(c.h[j], 0.5 * v[j]);
  const GruCache zero = gru_forward(p, Vector{1, 2, 3}, Vector(4));
  EXPECT_EQ(zero.h, Vector(4));
}

TEST(GruForward, ShapeErrors) {
  const GruParams p = GruParams::zeros(3, 4);
  EXPECT_THROW(gru_forward(p, Vector(2), Vector(4)), ShapeError);
  EXPECT_THROW(gru_forward(p, Vector(3), Vector(5)), ShapeError);
  EXPECT_THROW(gru_backward(p, gru_forward(p, Vector(3), Vector(4)), Vector(2)), ShapeError);
}

TEST(GruInvariants, GateRangesAndConvexCombinationOverManyCells) {
  Rng rng(2024);
  std::size_t cells = 0;
  while (cells < 10'000) {
    const std::size_t d = 1 + rng.uniform_index(8), h = 1 + rng.uniform_index(8);
    const double scale = rng.uniform(0.1, 5.0);
    const GruParams p = random_gru(rng, d, h, scale);
    const Vector x = random_vector(rng, d, 3.0);
    const Vector hp = random_vector(rng, h, 1.0);
    const GruCache c = gru_forward(p, x, hp);
    for (std::size_t j = 0; j < h; ++j, ++cells) {
      ASSERT_GT(c.reset[j], 0.0);
      ASSERT_LT(c.reset[j], 1.0);
      ASSERT_GT(c.update[j], 0.0);
      ASSERT_LT(c.update[j], 1.0);
      ASSERT_GT(c.cand[j], -1.0);
      ASSERT_LT(c.cand[j], 1.0);
      const double lo = std::min(hp[j], c.cand[j]), hi = std::max(hp[j], c.cand[j]);
      ASSERT_GE(c.h[j], lo - 1e-15);
      ASSERT_LE(c.h[j], hi + 1e-15);
      ASSERT_LE(std::abs(c.h[j]), 1.0);
    }
  }
}

TEST(GruInvariants, ClosedUpdateGateCarriesStateThrough) {
  Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(6), h = 1 + rng.uniform_index(6);
    GruParams p = random_gru(rng, d, h);
    p.w_update = Matrix(d, h);
    p.u_update = Matrix(h, h);
    p.b_update = Vector(h, -50.0);
    const Vector hp = random_vector(rng, h);
    const GruCache c = gru_forward(p, random_vector(rng, d, 2.0), hp);
    for (std::size_t j = 0; j < h; ++j) EXPECT_NEAR(c.h[j], hp[j], 1e-15);
  }
}

TEST(GruBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(3);
  const GruParams p = random_gru(rng, 4, 4);
  const GruCache c = gru_forward(p, random_vector(rng, 4), random_vector(rng, 4));
  GruBackward b = gru_backward(p, c, Vector(4));
  for (auto s : param_spans(b.grads)) {
    for (double g : s) EXPECT_EQ(g, 0.0);
  }
  EXPECT_EQ(b.dx, Vector(4));
  EXPECT_EQ(b.dh_prev, Vector(4));
}

TEST(GruBackward, ZeroParamsHalveUpstreamIntoPreviousState) {
  const GruParams p = GruParams::zeros(3, 4);
  const GruCache c = gru_forward(p, Vector{1, -1, 2}, Vector{0.3, -0.2, 0.9, 0.0});
  const Vector dh{1.0, -2.0, 0.5, 4.0};
  const GruBackward b = gru_backward(p, c, dh);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(b.dh_prev[j], 0.5 * dh[j]);
}

// L = dot(w, h_t) differenced against the analytic gradient over every
// parameter and both inputs.
double cell_check(GruParams p, Vector x, Vector hp, const Vector& w) {
  const GruCache c = gru_forward(p, x, hp);
  GruBackward b = gru_backward(p, c, w);
  auto loss = [&](const GruParams& q, const Vector& xx, const Vector& hh) {
    return dot(w, gru_forward(q, xx, hh).h);
  };
  double worst = 0.0;
  auto ps = param_spans(p);
  auto gs = param_spans(b.grads);
  for (std::size_t t = 0; t < ps.size(); ++t) {
    if (!p.recurrent && t >= 3 && t < 6) continue;
    for (std::size_t i = 0; i < ps[t].size(); ++i) {
      const double saved = ps[t][i];
      ps[t][i] = saved + kFdStep;
      const double up = loss(p, x, hp);
      ps[t][i] = saved - kFdStep;
      const double down = loss(p, x, hp);
      ps[t][i] = saved;
      worst = std::max(worst, relative_error(gs[t][i], (up - down) / (2 * kFdStep)));
    }
  }
  for (auto [vec, grad] : {std::pair{&x, &b.dx}, std::pair{&hp, &b.dh_prev}}) {
    for (std::size_t i = 0; i < vec->size(); ++i) {
      const double saved = (*vec)[i];
      (*vec)[i] = saved + kFdStep;
      const double up = loss(p, x, hp);
      (*vec)[i] = saved - kFdStep;
      const double down = loss(p, x, hp);
      (*vec)[i] = saved;
      worst = std::max(worst, relative_error((*grad)[i], (up - down) / (2 * kFdStep)));
    }
  }
  return worst;
}

TEST(GruBackward, MatchesFiniteDifferencesOverManySeeds) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    Rng rng(seed);
    const GruParams p = random_gru(rng, 4, 4);
    const double err = cell_check(p, random_vector(rng, 4), random_vector(rng, 4),
                                  random_vector(rng, 4));
    EXPECT_LT(err, kGradTolerance) << "seed " << seed;
  }
}

TEST(GruBackward, NonRecurrentCellMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(1000 + seed);
    const GruParams p = random_gru(rng, 3, 5, 1.0, false);
    const double err = cell_check(p, random_vector(rng, 3), Vector(5), random_vector(rng, 5));
    EXPECT_LT(err, kGradTolerance) << "seed " << seed;
  }
}

GruStack random_stack(Rng& rng, StackKind kind, std::size_t d, std::size_t h) {
  GruStack s = GruStack::zeros(kind, d, h);
  for (auto& layer : s.layers) {
    layer = random_gru(rng, layer.input_size(), h, 0.8, layer.recurrent);
  }
  return s;
}

// Unrolls `xs` through the stack and scores L = sum_t dot(w_t, output_t).
double stack_loss(const GruStack& s, const std::vector<Vector>& xs, const std::vector<Vector>& ws,
                  const StackState& init) {
  StackState state = init;
  double l = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const StackStep step = stack_forward(s, xs[t], state);
    l += dot(ws[t], step.output());
    state = step.state();
  }
  return l;
}

double stack_check(StackKind kind, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = 3, h = 4, steps = 4;
  GruStack s = random_stack(rng, kind, d, h);
  std::vector<Vector> xs, ws;
  for (std::size_t t = 0; t < steps; ++t) {
    xs.push_back(random_vector(rng, d));
    ws.push_back(random_vector(rng, h));
  }
  StackState init = zero_state(s);
  for (auto& v : init) v = random_vector(rng, h, 0.5);

  std::vector<StackStep> trace;
  StackState state = init;
  for (const auto& x : xs) {
    trace.push_back(stack_forward(s, x, state));
    state = trace.back().state();
  }
  GruStack grads = GruStack::zeros(kind, d, h);
  StackState carry = zero_state(s);
  for (std::size_t t = steps; t-- > 0;) {
    StackState d_state = carry;
    axpy(1.0, ws[t], d_state.back());
    carry = stack_backward_accumulate(s, trace[t], d_state, grads).d_prev;
  }

  double worst = 0.0;
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    auto ps = param_spans(s.layers[l]);
    auto gs = param_spans(grads.layers[l]);
    for (std::size_t t = 0; t < ps.size(); ++t) {
      if (!s.layers[l].recurrent && t >= 3 && t < 6) continue;
      for (std::size_t i = 0; i < ps[t].size(); ++i) {
        const double saved = ps[t][i];
        ps[t][i] = saved + kFdStep;
        const double up = stack_loss(s, xs, ws, init);
        ps[t][i] = saved - kFdStep;
        const double down = stack_loss(s, xs, ws, init);
        ps[t][i] = saved;
        worst = std::max(worst, relative_error(gs[t][i], (up - down) / (2 * kFdStep)));
      }
    }
  }
  for (std::size_t l = 0; l < init.size(); ++l) {
    for (std::size_t i = 0; i < h; ++i) {
      const double saved = init[l][i];
      init[l][i] = saved + kFdStep;
      const double up = stack_loss(s, xs, ws, init);
      init[l][i] = saved - kFdStep;
      const double down = stack_loss(s, xs, ws, init);
      init[l][i] = saved;
      worst = std::max(worst, relative_error(carry[l][i], (up - down) / (2 * kFdStep)));
    }
  }
  return worst;
}

TEST(StackBackward, ConventionalMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    EXPECT_LT(stack_check(StackKind::kConventional, seed), kGradTolerance) << seed;
  }
}

TEST(StackBackward, FeedbackMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    EXPECT_LT(stack_check(StackKind::kFeedback, 100 + seed), kGradTolerance) << seed;
  }
}

TEST(StackBackward, SingleMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_LT(stack_check(StackKind::kSingle, 200 + seed), kGradTolerance) << seed;
  }
}

TEST(StackForward, SingleReducesToCell) {
  Rng rng(4);
  const GruStack s = random_stack(rng, StackKind::kSingle, 3, 5);
  const Vector x = random_vector(rng, 3), hp = random_vector(rng, 5);
  const StackStep step = stack_forward(s, x, {hp});
  EXPECT_EQ(step.output(), gru_forward(s.layers[0], x, hp).h);
}

TEST(StackForward, FeedbackWithZeroParamsStaysZero) {
  const GruStack s = GruStack::zeros(StackKind::kFeedback, 3, 4);
  StackState state = zero_state(s);
  for (int t = 0; t < 5; ++t) {
    state = stack_forward(s, Vector{1, -2, 3}, state).state();
    for (const auto& v : state) EXPECT_EQ(v, Vector(4));
  }
}

TEST(StackForward, ConventionalWiring) {
  Rng rng(6);
  const GruStack s = random_stack(rng, StackKind::kConventional, 3, 4);
  const Vector x = random_vector(rng, 3);
  const StackState prev{random_vector(rng, 4), random_vector(rng, 4)};
  const StackStep step = stack_forward(s, x, prev);
  const Vector h1 = gru_forward(s.layers[0], x, prev[0]).h;
  EXPECT_EQ(step.caches[0].h, h1);
  EXPECT_EQ(step.caches[1].h, gru_forward(s.layers[1], h1, prev[1]).h);
}

TEST(StackForward, FeedbackWiring) {
  Rng rng(7);
  const GruStack s = random_stack(rng, StackKind::kFeedback, 3, 4);
  EXPECT_TRUE(s.layers[0].recurrent);
  EXPECT_FALSE(s.layers[1].recurrent);
  const Vector x = random_vector(rng, 3);
  const StackState prev{random_vector(rng, 4), random_vector(rng, 4)};
  const StackStep step = stack_forward(s, x, prev);
  // Layer 1 recurs on the previous top state; its own previous state is unused.
  const Vector h1 = gru_forward(s.layers[0], x, prev[1]).h;
  EXPECT_EQ(step.caches[0].h, h1);
  EXPECT_EQ(step.caches[1].h, gru_forward(s.layers[1], h1, Vector(4)).h);
  StackState other = prev;
  other[0] = random_vector(rng, 4);
  EXPECT_EQ(stack_forward(s, x, other).output(), step.output());
}

TEST(StackForward, LayerCountMismatchIsConfigError) {
  GruStack s = GruStack::zeros(StackKind::kConventional, 3, 4);
  s.layers.pop_back();
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(stack_forward(s, Vector(3), {Vector(4)}), ConfigError);
  EXPECT_THROW(parse_stack_kind("triple"), ConfigError);
}

TEST(PlainRnnReference, FeedbackUpperLayerHasNoRecurrence) {
  Rng rng(12);
  const PlainRnnStack net = PlainRnnStack::random(StackKind::kFeedback, 3, 5, rng, 0.7);
  const Vector x = random_vector(rng, 3);
  PlainRnnState a{random_vector(rng, 5), random_vector(rng, 5)};
  PlainRnnState b = a;
  b.lower = random_vector(rng, 5);
  // Only the previous upper state feeds back; the previous lower state is ignored.
  const PlainRnnState na = plain_rnn_step(net, x, a), nb = plain_rnn_step(net, x, b);
  EXPECT_EQ(na.lower, nb.lower);
  EXPECT_EQ(na.upper, nb.upper);
  EXPECT_EQ(na.upper, mmgru::tanh(vecmat(na.lower, net.w_up)));
}

TEST(PlainRnnReference, ConventionalUsesBothRecurrences) {
  Rng rng(13);
  const PlainRnnStack net = PlainRnnStack::random(StackKind::kConventional, 3, 5, rng, 0.7);
  const Vector x = random_vector(rng, 3);
  const PlainRnnState a{random_vector(rng, 5), random_vector(rng, 5)};
  PlainRnnState b = a;
  b.upper = random_vector(rng, 5);
  const PlainRnnState na = plain_rnn_step(net, x, a), nb = plain_rnn_step(net, x, b);
  EXPECT_EQ(na.lower, nb.lower);
  EXPECT_NE(na.upper, nb.upper);
  EXPECT_THROW(PlainRnnStack::random(StackKind::kSingle, 3, 5, rng, 0.7), ConfigError);
}

TEST(PlainRnnReference, FeedbackDropsOneRecurrentMatrix) {
  Rng rng(14);
  for (std::size_t h : {2, 8, 64}) {
    const auto conv = PlainRnnStack::random(StackKind::kConventional, h, h, rng, 0.1);
    const auto fb = PlainRnnStack::random(StackKind::kFeedback, h, h, rng, 0.1);
    EXPECT_EQ(conv.weight_count() - fb.weight_count(), h * h);
    EXPECT_LT(fb.weight_count(), conv.weight_count());
  }
}

TEST(ParamCount, PublishedTableValues) {
  EXPECT_EQ(param_count(RecurrentUnit::kGru, 256, 256), 393'984u);
  EXPECT_EQ(param_count(RecurrentUnit::kLstm, 256, 256), 525'312u);
  EXPECT_EQ(param_count(RecurrentUnit::kGru, 512, 512), 1'574'400u);
  EXPECT_EQ(param_count(RecurrentUnit::kLstm, 512, 512), 2'099'200u);
  EXPECT_EQ(param_count(RecurrentUnit::kGru, 1024, 1024), 6'294'528u);
  EXPECT_EQ(param_count(RecurrentUnit::kGru, 1000, 1000), 6'003'000u);
}

TEST(ParamCount, LstmToGruRatioIsFourThirds) {
  Rng rng(15);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t d = 1 + rng.uniform_index(3000), h = 1 + rng.uniform_index(3000);
    EXPECT_EQ(3 * param_count(RecurrentUnit::kLstm, d, h), 4 * param_count(RecurrentUnit::kGru, d, h));
  }
}

TEST(ParamCount, FeedbackStrictlySmallerThanConventional) {
  for (std::uint64_t h : {1, 16, 256, 512, 1024}) {
    EXPECT_LT(param_count(RecurrentUnit::kGru, h, h, StackKind::kFeedback),
              param_count(RecurrentUnit::kGru, h, h, StackKind::kConventional));
  }
  EXPECT_THROW(param_count(RecurrentUnit::kGru, 0, 4), ParameterError);
}

TEST(ParamCount, AgreesWithInstantiatedStacks) {
  for (StackKind kind : {StackKind::kSingle, StackKind::kConventional, StackKind::kFeedback}) {
    for (auto [d, h] : {std::pair<std::size_t, std::size_t>{3, 4}, {7, 2}, {16, 16}}) {
      EXPECT_EQ(trainable_count(GruStack::zeros(kind, d, h)),
                param_count(RecurrentUnit::kGru, d, h, kind))
          << to_string(kind) << " " << d << "x" << h;
    }
  }
}

}  // namespace
}  // namespace mmgru
