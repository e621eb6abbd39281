// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/model.hpp"

#include <cmath>

#include "mmgru/errors.hpp"

namespace mmgru {

ModelParams ModelParams::zeros(std::size_t feature_dim, std::size_t hidden_size,
                               std::size_t vocab_size, StackKind kind) {
  if (feature_dim == 0 || hidden_size == 0 || vocab_size == 0) {
    throw ParameterError("model dimensions must be positive");
  }
  ModelParams p;
  p.image_proj = Matrix(feature_dim, hidden_size);
  p.image_bias = Vector(hidden_size);
  p.word_embedding = Matrix(vocab_size, hidden_size);
  p.gru = GruStack::zeros(kind, hidden_size, hidden_size);
  p.output_proj = Matrix(hidden_size, vocab_size);
  p.output_bias = Vector(vocab_size);
  return p;
}

ModelParams ModelParams::random(std::size_t feature_dim, std::size_t hidden_size,
                                std::size_t vocab_size, StackKind kind, Rng& rng, double scale) {
  ModelParams p = zeros(feature_dim, hidden_size, vocab_size, kind);
  for (auto& t : tensors(p)) {
    if (!t.regularized) continue;
    const Matrix m = init_uniform(rng, t.rows, t.cols, scale);
    std::copy(m.values().begin(), m.values().end(), t.data.begin());
  }
  return p;
}

void ModelParams::validate() const {
  const std::size_t d = feature_dim(), h = hidden_size(), n = vocab_size();
  gru.validate();
  if (image_bias.size() != h || word_embedding.cols() != h || output_proj.rows() != h ||
      output_proj.cols() != n || output_bias.size() != n || gru.input_size() != h ||
      gru.hidden_size() != h) {
    throw ShapeError("model parameters inconsistent with (d_img=" + std::to_string(d) +
                     ", h=" + std::to_string(h) + ", N0=" + std::to_string(n) + ")");
  }
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (gru.kind != other.gru.kind || gru.layers.size() != other.gru.layers.size()) return false;
  const auto a = tensors(*this);
  const auto b = tensors(other);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows != b[i].rows || a[i].cols != b[i].cols) return false;
    if (!std::equal(a[i].data.begin(), a[i].data.end(), b[i].data.begin())) return false;
  }
  return true;
}

namespace {

template <typename View, typename Params>
std::vector<View> collect_tensors(Params& p) {
  std::vector<View> out;
  auto mat = [&](std::string name, auto& m) {
    out.push_back(View{std::move(name), m.rows(), m.cols(), m.values(), true});
  };
  auto vec = [&](std::string name, auto& v) {
    out.push_back(View{std::move(name), 1, v.size(), v.values(), false});
  };
  mat("image_proj", p.image_proj);
  vec("image_bias", p.image_bias);
  mat("word_embedding", p.word_embedding);
  for (std::size_t j = 0; j < p.gru.layers.size(); ++j) {
    auto& l = p.gru.layers[j];
    const std::string prefix = "gru" + std::to_string(j) + ".";
    mat(prefix + "w_reset", l.w_reset);
    mat(prefix + "w_update", l.w_update);
    mat(prefix + "w_cand", l.w_cand);
    if (l.recurrent) {
      mat(prefix + "u_reset", l.u_reset);
      mat(prefix + "u_update", l.u_update);
      mat(prefix + "u_cand", l.u_cand);
    }
    vec(prefix + "b_reset", l.b_reset);
    vec(prefix + "b_update", l.b_update);
    vec(prefix + "b_cand", l.b_cand);
  }
  mat("output_proj", p.output_proj);
  vec("output_bias", p.output_bias);
  return out;
}

}  // namespace

std::vector<TensorView> tensors(ModelParams& params) {
  return collect_tensors<TensorView>(params);
}

std::vector<ConstTensorView> tensors(const ModelParams& params) {
  return collect_tensors<ConstTensorView>(params);
}

std::uint64_t trainable_count(const ModelParams& params) {
  std::uint64_t n = 0;
  for (const auto& t : tensors(params)) n += t.data.size();
  return n;
}

double weight_penalty(const ModelParams& params) {
  double acc = 0.0;
  for (const auto& t : tensors(params))
    if (t.regularized) acc += squared_norm(t.data);
  return acc;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning_rate must be finite and >= 0");
  }
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw ParameterError("l2_lambda must be finite and >= 0");
  }
  if (max_grad_norm && !(*max_grad_norm > 0.0)) {
    throw ParameterError("max_grad_norm must be positive");
  }
  if (hidden_size == 0) throw ParameterError("hidden_size must be positive");
  if (!(init_scale > 0.0)) throw ParameterError("init_scale must be positive");
}

void validate_caption(const TokenSeq& caption, std::size_t vocab_size) {
  if (caption.size() < 2) throw DataError("caption must contain at least START and STOP");
  if (caption.front() != kStartId) throw DataError("caption must begin with START");
  if (caption.back() != kStopId) throw DataError("caption must end with STOP");
  for (TokenId id : caption) {
    if (id >= vocab_size) {
      throw DataError("caption token id " + std::to_string(id) + " >= vocabulary size " +
                      std::to_string(vocab_size));
    }
  }
}

Vector embed_image(const ModelParams& params, const Vector& feature) {
  if (feature.size() != params.feature_dim()) {
    throw ShapeError("embed_image: feature has length " + std::to_string(feature.size()) +
                     ", model expects " + std::to_string(params.feature_dim()));
  }
  return add(vecmat(feature, params.image_proj), params.image_bias);
}

Vector embed_word(const ModelParams& params, TokenId word) {
  if (word >= params.vocab_size()) {
    throw IndexError("embed_word: index " + std::to_string(word) + " out of range for N0=" +
                     std::to_string(params.vocab_size()));
  }
  const auto row = params.word_embedding.row(word);
  return Vector(std::vector<double>(row.begin(), row.end()));
}

StackStep encode_image(const ModelParams& params, const Vector& feature) {
  return stack_forward(params.gru, embed_image(params, feature), zero_state(params.gru));
}

StepTrace unroll_from_state(const ModelParams& params, const StackState& initial,
                            const TokenSeq& caption) {
  if (caption.empty() || caption.front() != kStartId) {
    throw DataError("caption must begin with START");
  }
  StepTrace trace;
  trace.caption = caption;
  StackState state = initial;
  for (std::size_t t = 0; t + 1 < caption.size(); ++t) {
    StackStep step = stack_forward(params.gru, embed_word(params, caption[t]), state);
    Vector p = softmax(add(vecmat(step.output(), params.output_proj), params.output_bias));
    const TokenId target = caption[t + 1];
    if (target >= params.vocab_size()) throw DataError("caption token id out of range");
    trace.data_loss -= std::log(p[target]);
    state = step.state();
    trace.steps.push_back(std::move(step));
    trace.probs.push_back(std::move(p));
  }
  return trace;
}

StepTrace forward(const ModelParams& params, const Vector& feature, const TokenSeq& caption,
                  double l2_lambda) {
  validate_caption(caption, params.vocab_size());
  StackStep image_step = encode_image(params, feature);
  StepTrace trace = unroll_from_state(params, image_step.state(), caption);
  trace.feature = feature;
  trace.image_step = std::move(image_step);
  trace.penalty = l2_lambda > 0.0 ? l2_lambda * weight_penalty(params) : 0.0;
  if (!std::isfinite(trace.loss())) throw NumericError("forward: non-finite loss");
  return trace;
}

ModelParams backward(const ModelParams& params, const StepTrace& trace, double l2_lambda) {
  ModelParams g = ModelParams::zeros(params.feature_dim(), params.hidden_size(),
                                     params.vocab_size(), params.stack_kind());
  const auto& caption = trace.caption;
  StackState d_next = zero_state(params.gru);

  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    Vector dy = trace.probs[t];
    dy[caption[t + 1]] -= 1.0;
    const StackStep& step = trace.steps[t];
    add_outer(g.output_proj, step.output(), dy);
    axpy(1.0, dy, g.output_bias);

    StackState d_state = d_next;
    axpy(1.0, vecmat_transposed(dy, params.output_proj), d_state.back());

    auto in = stack_backward_accumulate(params.gru, step, d_state, g.gru);
    axpy(1.0, in.dx.values(), g.word_embedding.row(caption[t]));
    d_next = std::move(in.d_prev);
  }

  auto in = stack_backward_accumulate(params.gru, trace.image_step, d_next, g.gru);
  add_outer(g.image_proj, trace.feature, in.dx);
  axpy(1.0, in.dx, g.image_bias);

  if (l2_lambda > 0.0) {
    auto gv = tensors(g);
    const auto pv = tensors(params);
    for (std::size_t i = 0; i < gv.size(); ++i) {
      if (gv[i].regularized) axpy(2.0 * l2_lambda, pv[i].data, gv[i].data);
    }
  }
  return g;
}

double global_norm(const ModelParams& grads) {
  double acc = 0.0;
  for (const auto& t : tensors(grads)) acc += squared_norm(t.data);
  return std::sqrt(acc);
}

void apply_update(ModelParams& params, const ModelParams& grads, double learning_rate) {
  auto pv = tensors(params);
  const auto gv = tensors(grads);
  for (std::size_t i = 0; i < pv.size(); ++i) axpy(-learning_rate, gv[i].data, pv[i].data);
}

namespace {

struct PairIndex {
  std::size_t record;
  std::size_t caption;
};

std::vector<PairIndex> all_pairs(const CaptionDataset& dataset) {
  std::vector<PairIndex> pairs;
  for (std::size_t r = 0; r < dataset.records.size(); ++r)
    for (std::size_t c = 0; c < dataset.records[r].captions.size(); ++c) pairs.push_back({r, c});
  return pairs;
}

}  // namespace

double mean_data_loss(const ModelParams& params, const CaptionDataset& dataset) {
  const auto pairs = all_pairs(dataset);
  if (pairs.empty()) throw ParameterError("mean_data_loss: empty dataset");
  double total = 0.0;
  for (const auto& [r, c] : pairs) {
    const auto& rec = dataset.records[r];
    total += forward(params, rec.feature, rec.captions[c], 0.0).data_loss;
  }
  return total / static_cast<double>(pairs.size());
}

double sgd_epoch(ModelParams& params, const CaptionDataset& dataset, const TrainConfig& config,
                 Rng& rng) {
  config.validate();
  auto pairs = all_pairs(dataset);
  if (pairs.empty()) throw ParameterError("sgd_epoch: empty dataset");
  shuffle(pairs, rng);

  double total = 0.0;
  for (const auto& [r, c] : pairs) {
    const auto& rec = dataset.records[r];
    const StepTrace trace = forward(params, rec.feature, rec.captions[c], config.l2_lambda);
    total += trace.data_loss;
    if (config.learning_rate == 0.0) continue;
    ModelParams g = backward(params, trace, config.l2_lambda);
    double lr = config.learning_rate;
    if (config.max_grad_norm) {
      const double norm = global_norm(g);
      if (norm > *config.max_grad_norm) lr *= *config.max_grad_norm / norm;
    }
    apply_update(params, g, lr);
  }
  return total / static_cast<double>(pairs.size());
}

ModelParams train(const CaptionDataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.records.empty()) throw ParameterError("train: empty dataset");
  Rng rng(config.seed);
  ModelParams params = ModelParams::random(dataset.feature_dim, config.hidden_size,
                                           dataset.vocab.size(), config.stack, rng,
                                           config.init_scale);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    const double loss = sgd_epoch(params, dataset, config, rng);
    if (on_epoch) on_epoch(e + 1, loss);
  }
  return params;
}

}  // namespace mmgru
