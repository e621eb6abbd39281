// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmgru {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;
using Tokens = std::vector<std::string>;

inline constexpr std::size_t kDefaultMinCount = 5;

/// Sentinel ids shared by every vocabulary.
inline constexpr TokenId kStartId = 0;
inline constexpr TokenId kStopId = 1;
inline constexpr TokenId kUnkId = 2;

/// Lowercases ASCII letters, drops every byte outside [a-z0-9] and
/// whitespace, then splits on whitespace. Empty tokens never appear.
Tokens normalize_text(std::string_view raw);

/// Token <-> index bijection. Indices 0, 1, 2 are always the START, STOP and
/// UNK sentinels; their spellings contain '<' so no normalized word can
/// collide with them.
class Vocabulary {
 public:
  static constexpr std::string_view kStart = "<start>";
  static constexpr std::string_view kStop = "<stop>";
  static constexpr std::string_view kUnk = "<unk>";

  /// Sentinels only.
  Vocabulary();

  /// Rebuilds a vocabulary from its token list in index order (as stored in a
  /// checkpoint). Throws DataError unless the first three entries are the
  /// sentinels and all tokens are distinct.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  TokenId start_id() const { return kStartId; }
  TokenId stop_id() const { return kStopId; }
  TokenId unk_id() const { return kUnkId; }

  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  /// Index of `token`, or unk_id() when absent.
  TokenId index_or_unk(std::string_view token) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_of_;
};

/// Keeps tokens seen at least `min_count` times across the whole corpus,
/// ordered by descending frequency then lexicographically.
Vocabulary build_vocab(const std::vector<Tokens>& corpus, std::size_t min_count = kDefaultMinCount);

/// [START, ids..., STOP] with out-of-vocabulary words mapped to UNK.
TokenSeq encode_caption(const Tokens& tokens, const Vocabulary& vocab);

/// Inverse of encode_caption: strips START/STOP and maps ids back to strings.
Tokens decode_caption(const TokenSeq& ids, const Vocabulary& vocab);

}  // namespace mmgru
