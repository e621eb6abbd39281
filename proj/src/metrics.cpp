// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <unordered_map>

#include "mmgru/errors.hpp"

namespace mmgru {

namespace {

void require_aligned(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs,
                     const char* op) {
  if (hyps.size() != refs.size()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(hyps.size()) + " hypotheses but " +
                     std::to_string(refs.size()) + " reference sets");
  }
}

}  // namespace

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

ClippedPrecision modified_precision(const std::vector<Tokens>& hyps,
                                    const std::vector<std::vector<Tokens>>& refs, std::size_t n) {
  require_aligned(hyps, refs, "modified_precision");
  if (n < 1 || n > kMaxNgramOrder) throw ParameterError("modified_precision: n must be in 1..4");
  ClippedPrecision p;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const NgramCounts hyp = count_ngrams(hyps[i], n);
    NgramCounts max_ref;
    for (const auto& ref : refs[i]) {
      for (const auto& [g, c] : count_ngrams(ref, n)) {
        auto& slot = max_ref[g];
        slot = std::max(slot, c);
      }
    }
    for (const auto& [g, c] : hyp) {
      p.total += static_cast<double>(c);
      auto it = max_ref.find(g);
      if (it != max_ref.end()) p.matched += static_cast<double>(std::min(c, it->second));
    }
  }
  return p;
}

std::size_t closest_ref_length(std::size_t hyp_len, const std::vector<Tokens>& refs) {
  if (refs.empty()) throw ParameterError("closest_ref_length: no references");
  std::size_t best = refs.front().size();
  auto dist = [&](std::size_t len) {
    return len > hyp_len ? len - hyp_len : hyp_len - len;
  };
  for (const auto& r : refs) {
    const std::size_t len = r.size();
    if (dist(len) < dist(best) || (dist(len) == dist(best) && len < best)) best = len;
  }
  return best;
}

double brevity_penalty(double ref_len, double hyp_len) {
  if (!(hyp_len >= 1.0)) throw ParameterError("brevity_penalty: hypothesis length must be >= 1");
  if (hyp_len >= ref_len) return 1.0;
  return std::min(1.0, std::exp(1.0 - ref_len / hyp_len));
}

BleuScore bleu(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs,
               std::size_t max_order) {
  require_aligned(hyps, refs, "bleu");
  if (hyps.empty()) throw ParameterError("bleu: empty corpus");
  if (max_order < 1 || max_order > kMaxNgramOrder) {
    throw ParameterError("bleu: order must be in 1..4");
  }
  BleuScore s;
  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 1; n <= max_order; ++n) {
    const ClippedPrecision p = modified_precision(hyps, refs, n);
    s.precisions.push_back(p.value());
    if (p.degenerate()) s.degenerate_order = true;
    if (p.value() == 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(p.value());
    }
  }

  double hyp_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyp_len += static_cast<double>(hyps[i].size());
    ref_len += static_cast<double>(closest_ref_length(hyps[i].size(), refs[i]));
  }
  if (hyp_len == 0.0) return s;  // nothing generated: BLEU is 0
  s.brevity_penalty = brevity_penalty(ref_len, hyp_len);
  if (any_zero) return s;
  s.value = s.brevity_penalty * std::exp(log_sum / static_cast<double>(max_order));
  return s;
}

namespace {

// Fewest chunks over all alignments that reach `target` matches. Positions
// in ref are tracked in a bitmask, so ref must have <= 32 tokens.
class ChunkSearch {
 public:
  ChunkSearch(const Tokens& hyp, const Tokens& ref, std::size_t target)
      : hyp_(hyp), ref_(ref), target_(target) {}

  std::size_t run() { return best(0, 0, -1); }

 private:
  static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;

  // Upper bound on further matches from hyp position i given used ref slots.
  std::size_t reachable(std::size_t i, std::uint32_t used) const {
    std::unordered_map<std::string_view, long> balance;
    for (std::size_t j = 0; j < ref_.size(); ++j)
      if (!(used >> j & 1u)) ++balance[ref_[j]];
    std::size_t n = 0;
    for (std::size_t k = i; k < hyp_.size(); ++k) {
      auto it = balance.find(hyp_[k]);
      if (it != balance.end() && it->second > 0) {
        --it->second;
        ++n;
      }
    }
    return n;
  }

  std::size_t best(std::size_t i, std::uint32_t used, int prev) {
    const auto matched = static_cast<std::size_t>(std::popcount(used));
    if (i == hyp_.size()) return matched == target_ ? 0 : kInf;
    if (matched + reachable(i, used) < target_) return kInf;

    const std::uint64_t key = (static_cast<std::uint64_t>(i) << 40) |
                              (static_cast<std::uint64_t>(prev + 1) << 32) | used;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    std::size_t result = best(i + 1, used, -1);
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      if ((used >> j & 1u) || ref_[j] != hyp_[i]) continue;
      const std::size_t opens = (prev >= 0 && j == static_cast<std::size_t>(prev) + 1) ? 0 : 1;
      const std::size_t rest = best(i + 1, used | (1u << j), static_cast<int>(j));
      if (rest != kInf) result = std::min(result, opens + rest);
    }
    memo_.emplace(key, result);
    return result;
  }

  const Tokens& hyp_;
  const Tokens& ref_;
  std::size_t target_;
  std::unordered_map<std::uint64_t, std::size_t> memo_;
};

std::size_t greedy_chunks(const Tokens& hyp, const Tokens& ref) {
  std::vector<bool> used(ref.size());
  std::size_t chunks = 0;
  long prev = -1;
  for (const auto& w : hyp) {
    long pick = -1;
    if (prev >= 0 && static_cast<std::size_t>(prev + 1) < ref.size() && !used[prev + 1] &&
        ref[prev + 1] == w) {
      pick = prev + 1;
    } else {
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (!used[j] && ref[j] == w) {
          pick = static_cast<long>(j);
          break;
        }
      }
    }
    if (pick < 0) {
      prev = -1;
      continue;
    }
    if (!(prev >= 0 && pick == prev + 1)) ++chunks;
    used[pick] = true;
    prev = pick;
  }
  return chunks;
}

}  // namespace

MeteorAlignment align_unigrams(const Tokens& hyp, const Tokens& ref, std::size_t exhaustive_limit) {
  MeteorAlignment a;
  std::map<std::string, std::size_t> ref_counts, hyp_counts;
  for (const auto& w : ref) ++ref_counts[w];
  for (const auto& w : hyp) ++hyp_counts[w];
  for (const auto& [w, c] : hyp_counts) {
    auto it = ref_counts.find(w);
    if (it != ref_counts.end()) a.matches += std::min(c, it->second);
  }
  if (a.matches == 0) return a;

  const std::size_t limit = std::min<std::size_t>(exhaustive_limit, 32);
  if (hyp.size() <= limit && ref.size() <= limit) {
    a.chunks = ChunkSearch(hyp, ref, a.matches).run();
  } else {
    a.exhaustive = false;
    a.chunks = greedy_chunks(hyp, ref);
  }
  return a;
}

double meteor_from_alignment(std::size_t matches, std::size_t chunks, std::size_t hyp_len,
                             std::size_t ref_len) {
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double precision = m / static_cast<double>(hyp_len);
  const double recall = m / static_cast<double>(ref_len);
  const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double penalty = 0.5 * std::pow(static_cast<double>(chunks) / m, 3.0);
  return fmean * (1.0 - penalty);
}

MeteorScore meteor(const Tokens& hyp, const std::vector<Tokens>& refs) {
  MeteorScore s;
  for (const auto& ref : refs) {
    const MeteorAlignment a = align_unigrams(hyp, ref);
    if (!a.exhaustive) s.heuristic = true;
    s.value = std::max(s.value, meteor_from_alignment(a.matches, a.chunks, hyp.size(), ref.size()));
  }
  return s;
}

MeteorScore corpus_meteor(const std::vector<Tokens>& hyps,
                          const std::vector<std::vector<Tokens>>& refs) {
  require_aligned(hyps, refs, "corpus_meteor");
  if (hyps.empty()) throw ParameterError("corpus_meteor: empty corpus");
  MeteorScore total;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const MeteorScore s = meteor(hyps[i], refs[i]);
    total.value += s.value;
    total.heuristic = total.heuristic || s.heuristic;
  }
  total.value /= static_cast<double>(hyps.size());
  return total;
}

namespace {

using TfIdf = std::map<Ngram, double>;

double cosine(const TfIdf& a, const TfIdf& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [g, v] : a) {
    na += v * v;
    auto it = b.find(g);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [g, v] : b) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

CiderScore cider(const std::vector<Tokens>& hyps, const std::vector<std::vector<Tokens>>& refs) {
  require_aligned(hyps, refs, "cider");
  if (hyps.size() < 2) throw ParameterError("cider: need at least two images for IDF");
  for (const auto& r : refs) {
    if (r.empty()) throw ParameterError("cider: every image needs at least one reference");
  }

  const double n_images = static_cast<double>(hyps.size());
  std::map<Ngram, std::size_t> doc_freq;
  for (const auto& image_refs : refs) {
    std::set<Ngram> present;
    for (const auto& ref : image_refs)
      for (std::size_t n = 1; n <= kMaxNgramOrder; ++n)
        for (const auto& [g, c] : count_ngrams(ref, n)) present.insert(g);
    for (const auto& g : present) ++doc_freq[g];
  }

  auto tfidf = [&](const Tokens& sentence, std::size_t n) {
    TfIdf v;
    for (const auto& [g, c] : count_ngrams(sentence, n)) {
      auto it = doc_freq.find(g);
      const double df = it == doc_freq.end() ? 1.0 : static_cast<double>(it->second);
      v[g] = static_cast<double>(c) * std::log(n_images / std::max(1.0, df));
    }
    return v;
  };

  CiderScore s;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    double image_score = 0.0;
    for (std::size_t n = 1; n <= kMaxNgramOrder; ++n) {
      const TfIdf h = tfidf(hyps[i], n);
      double acc = 0.0;
      for (const auto& ref : refs[i]) acc += cosine(h, tfidf(ref, n));
      image_score += acc / static_cast<double>(refs[i].size());
    }
    image_score = 10.0 * image_score / static_cast<double>(kMaxNgramOrder);
    s.per_image.push_back(image_score);
    s.value += image_score;
  }
  s.value /= n_images;
  return s;
}

MetricReport evaluate_captions(const std::vector<Tokens>& hyps,
                               const std::vector<std::vector<Tokens>>& refs) {
  require_aligned(hyps, refs, "evaluate_captions");
  if (hyps.empty()) throw ParameterError("evaluate_captions: empty corpus");
  MetricReport r;
  for (std::size_t n = 1; n <= kMaxNgramOrder; ++n) {
    const BleuScore b = bleu(hyps, refs, n);
    r.bleu[n - 1] = b.value;
    r.bleu_degenerate = r.bleu_degenerate || b.degenerate_order;
  }
  const MeteorScore m = corpus_meteor(hyps, refs);
  r.meteor = m.value;
  r.meteor_heuristic = m.heuristic;

  CiderScore c;
  if (hyps.size() >= 2) {
    c = cider(hyps, refs);
    r.cider = c.value;
    r.cider_available = true;
  }

  for (std::size_t i = 0; i < hyps.size(); ++i) {
    SentenceScores s;
    for (std::size_t n = 1; n <= kMaxNgramOrder; ++n) {
      s.bleu[n - 1] = bleu({hyps[i]}, {refs[i]}, n).value;
    }
    s.meteor = meteor(hyps[i], refs[i]).value;
    s.cider = r.cider_available ? c.per_image[i] : 0.0;
    r.per_sentence.push_back(s);
  }
  return r;
}

}  // namespace mmgru
