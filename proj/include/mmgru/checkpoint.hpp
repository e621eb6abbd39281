// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// MGRU checkpoint, little-endian:
//
//   "MGRU" | u32 version=1 | u32 d_img | u32 h | u32 N0 | u8 stack_kind
//   | u32 layer_count
//   | u32 token_count | token_count x ( u16 len | UTF-8 bytes )   index order
//   | tensor blocks until the trailer:
//       u16 name_len | name | u32 rows | u32 cols | rows*cols x f64
//   | u32 CRC-32 (zlib polynomial) of every preceding byte
//
// Tensor payloads are f64 so a save/load round trip is bit-exact. Tensor
// names and order are those of tensors(ModelParams).

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmgru/model.hpp"
#include "mmgru/vocab.hpp"

namespace mmgru {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
};

std::vector<std::uint8_t> serialize_checkpoint(const ModelParams& params, const Vocabulary& vocab);

/// Throws FormatError on bad magic, version, checksum, truncation or any
/// structural inconsistency. Nothing is returned unless the whole file is valid.
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// CRC-32 as used in the trailer.
std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace mmgru
