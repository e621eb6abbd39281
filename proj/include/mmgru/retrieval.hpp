// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Bidirectional image <-> sentence ranking with the generative model as the
// scorer, plus the R@K and median-rank summaries.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmgru/dataset.hpp"
#include "mmgru/model.hpp"
#include "mmgru/parallel.hpp"

namespace mmgru {

enum class Direction { kImageToSentence, kSentenceToImage };

enum class ScoreMode {
  kNormalized,  // log-likelihood divided by the number of predicted words
  kRaw,         // total log-likelihood
};

enum class MedianMode {
  kMeanOfMedians,  // mean over queries of each query's median correct rank
  kMedianOfBest,   // median over queries of each query's best correct rank
};

std::string_view to_string(Direction d);
std::string_view to_string(ScoreMode m);
std::string_view to_string(MedianMode m);

struct RankResult {
  std::string query_id;
  std::vector<std::string> ranked_candidate_ids;  // best first
  std::vector<std::size_t> correct_ranks;         // 1-based, ascending
};

double score_pair(const ModelParams& params, const Vector& feature, const TokenSeq& caption,
                  ScoreMode mode = ScoreMode::kNormalized);

/// Sorts candidates by descending score (ties: ascending candidate id) and
/// records where the correct ones landed.
RankResult rank_candidates(std::string query_id, const std::vector<std::string>& candidate_ids,
                           std::span<const double> scores, const std::vector<bool>& is_correct);

/// Image x caption score table for the whole pool.
struct ScoreMatrix {
  std::vector<std::string> image_ids;
  std::vector<std::string> caption_ids;     // "<image_id>#<k>"
  std::vector<std::size_t> caption_owner;   // index into image_ids
  Matrix scores;                            // images x captions
};

ScoreMatrix score_matrix(const ModelParams& params, const CaptionDataset& dataset,
                         ScoreMode mode = ScoreMode::kNormalized,
                         std::size_t workers = worker_count());

/// image->sentence: one query per image over every caption; sentence->image:
/// one query per caption over every image.
std::vector<RankResult> rank_from_scores(const ScoreMatrix& table, Direction direction);

std::vector<RankResult> rank_bidirectional(const ModelParams& params, const CaptionDataset& dataset,
                                           Direction direction,
                                           ScoreMode mode = ScoreMode::kNormalized,
                                           std::size_t workers = worker_count());

/// Fraction of queries whose best correct rank is <= k.
double recall_at_k(const std::vector<RankResult>& results, std::size_t k);

double median_rank(const std::vector<RankResult>& results,
                   MedianMode mode = MedianMode::kMeanOfMedians);

}  // namespace mmgru
