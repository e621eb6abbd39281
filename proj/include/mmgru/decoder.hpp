// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "mmgru/linalg.hpp"
#include "mmgru/model.hpp"
#include "mmgru/vocab.hpp"

namespace mmgru {

inline constexpr std::size_t kDefaultMaxLen = 30;

struct DecodeConfig {
  std::size_t max_len = kDefaultMaxLen;  // cap on emitted words
  bool forbid_unk = true;
};

/// Greedy decoding: encode the image into h_{-1}, feed START, then keep
/// feeding back the argmax word until STOP or max_len words. START is never
/// a candidate; UNK is excluded when cfg.forbid_unk. Ties go to the lowest
/// index. Returned ids exclude START and STOP.
TokenSeq generate_ids(const ModelParams& params, const Vector& feature, const DecodeConfig& cfg);

Tokens generate(const ModelParams& params, const Vocabulary& vocab, const Vector& feature,
                const DecodeConfig& cfg);

/// sum_t log p_t[w_t] over every predicted position of a START ... STOP
/// caption. Throws DataError on a malformed caption.
double sequence_logprob(const ModelParams& params, const Vector& feature, const TokenSeq& caption);

/// Same sum for any sequence that starts with START (STOP not required).
double prefix_logprob(const ModelParams& params, const Vector& feature, const TokenSeq& prefix);

}  // namespace mmgru
