// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Caption generation metrics over tokenized sentences.
//
// BLEU    corpus-level clipped n-gram precision p_n (clip = max count in any
//         single reference), brevity penalty min(1, exp(1 - r/c)) with r the
//         summed closest-reference lengths, B-N = BP * exp(mean log p_n).
// METEOR  exact-match unigram alignment with the most matches and, among
//         those, the fewest chunks. H = 10PR/(R+9P), penalty 0.5 (C/m)^3,
//         M = H (1 - penalty). Best reference per sentence, corpus = mean.
//         No stemming or synonym matching.
// CIDEr   per order n = 1..4, TF-IDF vectors with idf = log(N / max(1, df)),
//         df counted over images' reference sets; score per image is
//         10 * mean_n mean_refs cos(hyp, ref); corpus = mean over images.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mmgru/vocab.hpp"

namespace mmgru {

inline constexpr std::size_t kMaxNgramOrder = 4;
inline constexpr std::size_t kMeteorExhaustiveLimit = 20;

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n);

struct ClippedPrecision {
  double matched = 0.0;
  double total = 0.0;

  /// No hypothesis n-grams of this order anywhere in the corpus.
  bool degenerate() const { return total == 0.0; }
  double value() const { return total == 0.0 ? 0.0 : matched / total; }
};

/// refs[i] is the reference set for hyps[i].
ClippedPrecision modified_precision(const std::vector<Tokens>& hyps,
                                    const std::vector<std::vector<Tokens>>& refs, std::size_t n);

/// Length of the reference closest to hyp_len; ties go to the shorter one.
std::size_t closest_ref_length(std::size_t hyp_len, const std::vector<Tokens>& refs);

/// min(1, exp(1 - r/c)). Requires c >= 1.
double brevity_penalty(double ref_len, double hyp_len);

struct BleuScore {
  double value = 0.0;
  double brevity_penalty = 0.0;
  std::vector<double> precisions;  // p_1 .. p_N
  bool degenerate_order = false;   // some order had no hypothesis n-grams
};

BleuScore bleu(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs,
               std::size_t max_order);

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  bool exhaustive = true;  // false when the greedy fallback was used
};

MeteorAlignment align_unigrams(const Tokens& hyp, const Tokens& ref,
                               std::size_t exhaustive_limit = kMeteorExhaustiveLimit);

/// Score from alignment statistics; 0 when there are no matches.
double meteor_from_alignment(std::size_t matches, std::size_t chunks, std::size_t hyp_len,
                             std::size_t ref_len);

struct MeteorScore {
  double value = 0.0;
  bool heuristic = false;  // at least one alignment used the greedy fallback
};

/// Best score over the references.
MeteorScore meteor(const Tokens& hyp, const std::vector<Tokens>& refs);

/// Mean of sentence scores.
MeteorScore corpus_meteor(const std::vector<Tokens>& hyps,
                          const std::vector<std::vector<Tokens>>& refs);

struct CiderScore {
  double value = 0.0;
  std::vector<double> per_image;
};

/// Requires at least two images, each with at least one reference.
CiderScore cider(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs);

struct SentenceScores {
  std::array<double, kMaxNgramOrder> bleu{};
  double meteor = 0.0;
  double cider = 0.0;
};

struct MetricReport {
  std::array<double, kMaxNgramOrder> bleu{};  // B-1 .. B-4
  double meteor = 0.0;
  double cider = 0.0;
  bool cider_available = false;    // false for single-image corpora
  bool bleu_degenerate = false;
  bool meteor_heuristic = false;
  std::vector<SentenceScores> per_sentence;
};

MetricReport evaluate_captions(const std::vector<Tokens>& hyps,
                               const std::vector<std::vector<Tokens>>& refs);

}  // namespace mmgru
