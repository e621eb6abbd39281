// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "mmgru/decoder.hpp"
#include "mmgru/errors.hpp"

namespace mmgru {

std::string_view to_string(Direction d) {
  return d == Direction::kImageToSentence ? "image_to_sentence" : "sentence_to_image";
}

std::string_view to_string(ScoreMode m) {
  return m == ScoreMode::kNormalized ? "normalized" : "raw";
}

std::string_view to_string(MedianMode m) {
  return m == MedianMode::kMeanOfMedians ? "mean_of_medians" : "median_of_best";
}

double score_pair(const ModelParams& params, const Vector& feature, const TokenSeq& caption,
                  ScoreMode mode) {
  const double lp = sequence_logprob(params, feature, caption);
  if (mode == ScoreMode::kRaw) return lp;
  return lp / static_cast<double>(caption.size() - 1);
}

RankResult rank_candidates(std::string query_id, const std::vector<std::string>& candidate_ids,
                           std::span<const double> scores, const std::vector<bool>& is_correct) {
  const std::size_t n = candidate_ids.size();
  if (scores.size() != n || is_correct.size() != n) {
    throw ShapeError("rank_candidates: ids, scores and labels differ in length");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidate_ids[a] < candidate_ids[b];
  });

  RankResult r;
  r.query_id = std::move(query_id);
  r.ranked_candidate_ids.reserve(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    r.ranked_candidate_ids.push_back(candidate_ids[order[pos]]);
    if (is_correct[order[pos]]) r.correct_ranks.push_back(pos + 1);
  }
  return r;
}

ScoreMatrix score_matrix(const ModelParams& params, const CaptionDataset& dataset, ScoreMode mode,
                         std::size_t workers) {
  if (dataset.records.empty()) throw ParameterError("score_matrix: empty dataset");
  ScoreMatrix t;
  std::vector<const TokenSeq*> captions;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& rec = dataset.records[i];
    t.image_ids.push_back(rec.image_id);
    for (std::size_t k = 0; k < rec.captions.size(); ++k) {
      t.caption_ids.push_back(rec.image_id + "#" + std::to_string(k));
      t.caption_owner.push_back(i);
      captions.push_back(&rec.captions[k]);
    }
  }
  const std::size_t n_img = t.image_ids.size(), n_cap = captions.size();
  std::vector<double> cells(n_img * n_cap);
  parallel_for(
      n_img * n_cap,
      [&](std::size_t idx) {
        const std::size_t i = idx / n_cap, j = idx % n_cap;
        cells[idx] = score_pair(params, dataset.records[i].feature, *captions[j], mode);
      },
      workers);
  t.scores = Matrix(n_img, n_cap, std::move(cells));
  return t;
}

std::vector<RankResult> rank_from_scores(const ScoreMatrix& table, Direction direction) {
  std::vector<RankResult> out;
  const std::size_t n_img = table.image_ids.size(), n_cap = table.caption_ids.size();
  if (direction == Direction::kImageToSentence) {
    for (std::size_t i = 0; i < n_img; ++i) {
      std::vector<bool> correct(n_cap);
      for (std::size_t j = 0; j < n_cap; ++j) correct[j] = table.caption_owner[j] == i;
      out.push_back(rank_candidates(table.image_ids[i], table.caption_ids, table.scores.row(i),
                                    correct));
    }
  } else {
    for (std::size_t j = 0; j < n_cap; ++j) {
      std::vector<double> col(n_img);
      std::vector<bool> correct(n_img);
      for (std::size_t i = 0; i < n_img; ++i) {
        col[i] = table.scores(i, j);
        correct[i] = table.caption_owner[j] == i;
      }
      out.push_back(rank_candidates(table.caption_ids[j], table.image_ids, col, correct));
    }
  }
  return out;
}

std::vector<RankResult> rank_bidirectional(const ModelParams& params, const CaptionDataset& dataset,
                                           Direction direction, ScoreMode mode,
                                           std::size_t workers) {
  return rank_from_scores(score_matrix(params, dataset, mode, workers), direction);
}

double recall_at_k(const std::vector<RankResult>& results, std::size_t k) {
  if (results.empty()) throw ParameterError("recall_at_k: no queries");
  if (k < 1) throw ParameterError("recall_at_k: k must be >= 1");
  std::size_t hits = 0;
  for (const auto& r : results) {
    if (!r.correct_ranks.empty() && r.correct_ranks.front() <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

namespace {

double median_of_sorted(const std::vector<double>& v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double median_rank(const std::vector<RankResult>& results, MedianMode mode) {
  if (results.empty()) throw ParameterError("median_rank: no queries");
  for (const auto& r : results) {
    if (r.correct_ranks.empty()) {
      throw DataError("median_rank: query '" + r.query_id + "' has no correct candidate");
    }
  }
  if (mode == MedianMode::kMeanOfMedians) {
    double total = 0.0;
    for (const auto& r : results) {
      std::vector<double> ranks(r.correct_ranks.begin(), r.correct_ranks.end());
      std::sort(ranks.begin(), ranks.end());
      total += median_of_sorted(ranks);
    }
    return total / static_cast<double>(results.size());
  }
  std::vector<double> best;
  for (const auto& r : results) {
    best.push_back(static_cast<double>(*std::min_element(r.correct_ranks.begin(), r.correct_ranks.end())));
  }
  std::sort(best.begin(), best.end());
  return median_of_sorted(best);
}

}  // namespace mmgru
