// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/decoder.hpp"

#include "mmgru/errors.hpp"

namespace mmgru {

TokenSeq generate_ids(const ModelParams& params, const Vector& feature, const DecodeConfig& cfg) {
  if (cfg.max_len < 1) throw ParameterError("DecodeConfig: max_len must be >= 1");
  StackState state = encode_image(params, feature).state();
  TokenId word = kStartId;
  TokenSeq out;
  while (out.size() < cfg.max_len) {
    StackStep step = stack_forward(params.gru, embed_word(params, word), state);
    // softmax is monotone, so the argmax of the logits is the argmax of p.
    const Vector logits = add(vecmat(step.output(), params.output_proj), params.output_bias);
    std::size_t best = params.vocab_size();
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (i == kStartId || (cfg.forbid_unk && i == kUnkId)) continue;
      if (best == params.vocab_size() || logits[i] > logits[best]) best = i;
    }
    if (best == params.vocab_size() || best == kStopId) break;
    word = static_cast<TokenId>(best);
    out.push_back(word);
    state = step.state();
  }
  return out;
}

Tokens generate(const ModelParams& params, const Vocabulary& vocab, const Vector& feature,
                const DecodeConfig& cfg) {
  return decode_caption(generate_ids(params, feature, cfg), vocab);
}

double sequence_logprob(const ModelParams& params, const Vector& feature, const TokenSeq& caption) {
  return -forward(params, feature, caption, 0.0).data_loss;
}

double prefix_logprob(const ModelParams& params, const Vector& feature, const TokenSeq& prefix) {
  for (TokenId id : prefix) {
    if (id >= params.vocab_size()) throw DataError("token id out of range");
  }
  const StackStep image = encode_image(params, feature);
  return -unroll_from_state(params, image.state(), prefix).data_loss;
}

}  // namespace mmgru
