// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Multimodal GRU caption model.
//
// For an image feature f and caption w_0 = START, w_1, ..., w_N = STOP:
//
//   v        = f W_I + b_I                       image embedding
//   s_t      = row w_t of W_s                    word embedding
//   h_{-1}   = Stack(v, 0)                       image enters once
//   h_t      = Stack(s_t, h_{t-1})               t = 0 .. N-1
//   p_{t+1}  = softmax(top(h_t) W_d + b_d)
//   loss     = -sum_{t=1..N} log p_t[w_t] + lambda * ||theta||^2
//
// theta in the penalty covers every weight matrix (W_I, W_s, W_d and all GRU
// W/U) but no biases. Training is per-example SGD.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmgru/dataset.hpp"
#include "mmgru/gru.hpp"
#include "mmgru/linalg.hpp"
#include "mmgru/vocab.hpp"

namespace mmgru {

struct ModelParams {
  Matrix image_proj;      // d_img x h
  Vector image_bias;      // h
  Matrix word_embedding;  // N0 x h
  GruStack gru;
  Matrix output_proj;     // h x N0
  Vector output_bias;     // N0

  static ModelParams zeros(std::size_t feature_dim, std::size_t hidden_size,
                           std::size_t vocab_size, StackKind kind);
  /// Weights uniform in [-scale, scale), biases zero.
  static ModelParams random(std::size_t feature_dim, std::size_t hidden_size,
                            std::size_t vocab_size, StackKind kind, Rng& rng, double scale);

  std::size_t feature_dim() const { return image_proj.rows(); }
  std::size_t hidden_size() const { return image_proj.cols(); }
  std::size_t vocab_size() const { return word_embedding.rows(); }
  StackKind stack_kind() const { return gru.kind; }

  void validate() const;

  bool operator==(const ModelParams& other) const;
};

/// Named view over one trainable tensor. Vectors appear as 1 x n.
template <typename T>
struct BasicTensorView {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<T> data;
  bool regularized = false;  // weight matrices yes, biases no
};
using TensorView = BasicTensorView<double>;
using ConstTensorView = BasicTensorView<const double>;

/// Every trainable tensor in a fixed order. U matrices of a non-recurrent
/// layer are omitted.
std::vector<TensorView> tensors(ModelParams& params);
std::vector<ConstTensorView> tensors(const ModelParams& params);

std::uint64_t trainable_count(const ModelParams& params);

/// ||theta||^2 over the regularized tensors.
double weight_penalty(const ModelParams& params);

struct TrainConfig {
  double learning_rate = 1e-2;
  double l2_lambda = 1e-4;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  std::optional<double> max_grad_norm;
  std::size_t hidden_size = 256;
  StackKind stack = StackKind::kSingle;
  double init_scale = 0.08;

  void validate() const;
};

/// Throws DataError unless `caption` is START ... STOP with every id < vocab_size.
void validate_caption(const TokenSeq& caption, std::size_t vocab_size);

Vector embed_image(const ModelParams& params, const Vector& feature);
Vector embed_word(const ModelParams& params, TokenId word);

/// The image step: h_{-1} = Stack(v, 0).
StackStep encode_image(const ModelParams& params, const Vector& feature);

struct StepTrace {
  Vector feature;
  StackStep image_step;
  TokenSeq caption;
  std::vector<StackStep> steps;  // steps[t] consumed caption[t]
  std::vector<Vector> probs;     // probs[t] predicts caption[t + 1]
  double data_loss = 0.0;
  double penalty = 0.0;          // lambda * ||theta||^2

  double loss() const { return data_loss + penalty; }
};

/// Runs the caption from a given h_{-1} state. Only the word part of the trace
/// is filled (no image step, no penalty). `caption` must start with START; it
/// need not end with STOP.
StepTrace unroll_from_state(const ModelParams& params, const StackState& initial,
                            const TokenSeq& caption);

/// Full forward pass. Throws DataError on a malformed caption.
StepTrace forward(const ModelParams& params, const Vector& feature, const TokenSeq& caption,
                  double l2_lambda);

/// Exact gradient of trace.loss() with respect to every parameter, as a
/// ModelParams of identical shape.
ModelParams backward(const ModelParams& params, const StepTrace& trace, double l2_lambda);

double global_norm(const ModelParams& grads);

/// params -= learning_rate * grads
void apply_update(ModelParams& params, const ModelParams& grads, double learning_rate);

/// Mean data loss (no penalty) over every (image, caption) pair.
double mean_data_loss(const ModelParams& params, const CaptionDataset& dataset);

/// One pass over all (image, caption) pairs in an order shuffled by `rng`,
/// updating after each pair. Returns the mean data loss observed during the
/// pass (each pair's loss is taken before its own update).
double sgd_epoch(ModelParams& params, const CaptionDataset& dataset, const TrainConfig& config,
                 Rng& rng);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Initializes from config.seed and runs config.epochs epochs.
ModelParams train(const CaptionDataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace mmgru
