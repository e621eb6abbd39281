// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Image-feature files (MMFT) and caption files (JSON Lines), and the aligned
// dataset built from them.
//
// MMFT v1, little-endian:
//   "MMFT" | u32 version=1 | u32 record_count | u32 dim
//   record_count x ( u16 id_len | id bytes (UTF-8) | dim x f32 )
//
// Caption file: one JSON object per line,
//   {"id": "<image_id>", "captions": ["raw sentence", ...]}

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mmgru/linalg.hpp"
#include "mmgru/vocab.hpp"

namespace mmgru {

inline constexpr std::uint32_t kDefaultFeatureDim = 4096;
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

struct FeatureFile {
  std::uint32_t dim = 0;
  std::map<std::string, Vector> vectors;  // ordered by id
};

/// Throws FormatError on bad magic/version, DataError on duplicate ids or
/// non-finite values, IoError on truncation or trailing bytes.
FeatureFile load_features(const std::filesystem::path& path);
FeatureFile parse_features(std::span<const std::uint8_t> bytes);

/// Values are narrowed to f32 on write. Every vector must have length `dim`.
void save_features(const std::filesystem::path& path, const FeatureFile& features);
std::vector<std::uint8_t> serialize_features(const FeatureFile& features);

struct CaptionEntry {
  std::string id;
  std::vector<std::string> captions;  // raw text
};

/// Parses a caption JSON Lines file. Blank lines are skipped; malformed lines
/// throw ParseError naming the 1-based line number.
std::vector<CaptionEntry> read_caption_file(const std::filesystem::path& path);
std::vector<CaptionEntry> parse_caption_lines(std::string_view text);

/// Every normalized caption of every entry, in file order.
std::vector<Tokens> caption_corpus(const std::vector<CaptionEntry>& entries);

struct CaptionRecord {
  std::string image_id;
  Vector feature;
  std::vector<TokenSeq> captions;  // encoded, START ... STOP
  std::vector<Tokens> references;  // normalized text, same order as captions
};

struct CaptionDataset {
  std::vector<CaptionRecord> records;
  Vocabulary vocab;
  std::size_t feature_dim = 0;

  std::size_t caption_count() const;
};

/// Joins caption entries with their features. Throws DataError when an entry
/// has no captions, an id is repeated, or features are missing (the message
/// lists every missing id).
CaptionDataset build_dataset(const std::vector<CaptionEntry>& entries, const FeatureFile& features,
                             const Vocabulary& vocab);

CaptionDataset load_captions(const std::filesystem::path& path, const Vocabulary& vocab,
                             const FeatureFile& features);

}  // namespace mmgru
