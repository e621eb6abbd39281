// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/vocab.hpp"

#include <algorithm>
#include <map>

#include "mmgru/errors.hpp"

namespace mmgru {

Tokens normalize_text(std::string_view raw) {
  Tokens out;
  std::string current;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(static_cast<char>(c));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary::Vocabulary() {
  append(std::string(kStart));
  append(std::string(kStop));
  append(std::string(kUnk));
}

void Vocabulary::append(std::string token) {
  const auto id = static_cast<TokenId>(tokens_.size());
  if (!index_of_.emplace(token, id).second) {
    throw DataError("vocabulary: duplicate token '" + token + "'");
  }
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 3 || tokens[0] != kStart || tokens[1] != kStop || tokens[2] != kUnk) {
    throw DataError("vocabulary: token list must begin with <start>, <stop>, <unk>");
  }
  Vocabulary v;
  for (std::size_t i = 3; i < tokens.size(); ++i) v.append(std::move(tokens[i]));
  return v;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw IndexError("vocabulary: index " + std::to_string(id) + " out of range for size " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_of_.find(std::string(token));
  if (it == index_of_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::index_or_unk(std::string_view token) const {
  return find(token).value_or(unk_id());
}

Vocabulary build_vocab(const std::vector<Tokens>& corpus, std::size_t min_count) {
  if (min_count < 1) throw ParameterError("build_vocab: min_count must be >= 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& sentence : corpus)
    for (const auto& tok : sentence) ++freq[tok];

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : freq) {
    if (n < min_count) continue;
    if (tok == Vocabulary::kStart || tok == Vocabulary::kStop || tok == Vocabulary::kUnk) continue;
    kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> tokens{std::string(Vocabulary::kStart), std::string(Vocabulary::kStop),
                                  std::string(Vocabulary::kUnk)};
  for (auto& [tok, n] : kept) tokens.push_back(tok);
  return Vocabulary::from_tokens(std::move(tokens));
}

TokenSeq encode_caption(const Tokens& tokens, const Vocabulary& vocab) {
  TokenSeq ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(vocab.start_id());
  for (const auto& t : tokens) ids.push_back(vocab.index_or_unk(t));
  ids.push_back(vocab.stop_id());
  return ids;
}

Tokens decode_caption(const TokenSeq& ids, const Vocabulary& vocab) {
  Tokens out;
  for (TokenId id : ids) {
    if (id == vocab.start_id() || id == vocab.stop_id()) continue;
    out.push_back(vocab.token(id));
  }
  return out;
}

}  // namespace mmgru
