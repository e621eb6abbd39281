// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/checkpoint.hpp"

#include <cmath>
#include <map>

#include <zlib.h>

#include "mmgru/binary_io.hpp"
#include "mmgru/errors.hpp"

namespace mmgru {

namespace {
constexpr std::string_view kMagic = "MGRU";
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large buffers.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = ::crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> serialize_checkpoint(const ModelParams& params, const Vocabulary& vocab) {
  params.validate();
  if (vocab.size() != params.vocab_size()) {
    throw ShapeError("checkpoint: vocabulary has " + std::to_string(vocab.size()) +
                     " tokens, model N0 is " + std::to_string(params.vocab_size()));
  }
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(params.feature_dim()));
  w.u32(static_cast<std::uint32_t>(params.hidden_size()));
  w.u32(static_cast<std::uint32_t>(params.vocab_size()));
  w.u8(static_cast<std::uint8_t>(params.stack_kind()));
  w.u32(static_cast<std::uint32_t>(params.gru.layers.size()));

  w.u32(static_cast<std::uint32_t>(vocab.size()));
  for (const auto& tok : vocab.tokens()) {
    if (tok.size() > 0xffff) throw ParameterError("checkpoint: token longer than 65535 bytes");
    w.u16(static_cast<std::uint16_t>(tok.size()));
    w.bytes(tok);
  }

  for (const auto& t : tensors(params)) {
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name);
    w.u32(static_cast<std::uint32_t>(t.rows));
    w.u32(static_cast<std::uint32_t>(t.cols));
    for (double v : t.data) w.f64(v);
  }

  std::vector<std::uint8_t> out = w.buffer();
  const std::uint32_t crc = crc32_of(out);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  return out;
}

namespace {

Checkpoint parse_body(std::span<const std::uint8_t> body) {
  io::ByteReader in(body);
  if (in.bytes(4) != kMagic) throw FormatError("checkpoint: bad magic (expected \"MGRU\")");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t d_img = in.u32();
  const std::uint32_t h = in.u32();
  const std::uint32_t n0 = in.u32();
  const std::uint8_t kind_byte = in.u8();
  if (kind_byte > static_cast<std::uint8_t>(StackKind::kFeedback)) {
    throw FormatError("checkpoint: unknown stack kind " + std::to_string(kind_byte));
  }
  const auto kind = static_cast<StackKind>(kind_byte);
  const std::uint32_t layers = in.u32();
  if (layers != layer_count(kind)) {
    throw FormatError("checkpoint: layer count " + std::to_string(layers) +
                      " does not match stack kind " + std::string(to_string(kind)));
  }
  if (d_img == 0 || h == 0 || n0 == 0) throw FormatError("checkpoint: zero dimension");

  const std::uint32_t token_count = in.u32();
  if (token_count != n0) {
    throw FormatError("checkpoint: vocabulary has " + std::to_string(token_count) +
                      " tokens but header N0 is " + std::to_string(n0));
  }
  std::vector<std::string> tokens;
  tokens.reserve(token_count);
  for (std::uint32_t i = 0; i < token_count; ++i) tokens.push_back(in.bytes(in.u16()));

  Checkpoint ck;
  try {
    ck.vocab = Vocabulary::from_tokens(std::move(tokens));
  } catch (const DataError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }

  ck.params = ModelParams::zeros(d_img, h, n0, kind);
  std::map<std::string, TensorView> expected;
  for (auto& t : tensors(ck.params)) expected.emplace(t.name, t);

  while (in.remaining() > 0) {
    const std::string name = in.bytes(in.u16());
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    auto it = expected.find(name);
    if (it == expected.end()) throw FormatError("checkpoint: unexpected tensor '" + name + "'");
    TensorView& view = it->second;
    if (rows != view.rows || cols != view.cols) {
      throw FormatError("checkpoint: tensor '" + name + "' has shape " + std::to_string(rows) +
                        "x" + std::to_string(cols) + ", expected " + std::to_string(view.rows) +
                        "x" + std::to_string(view.cols));
    }
    for (double& v : view.data) {
      v = in.f64();
      if (!std::isfinite(v)) throw FormatError("checkpoint: non-finite value in '" + name + "'");
    }
    expected.erase(it);
  }
  if (!expected.empty()) {
    throw FormatError("checkpoint: missing tensor '" + expected.begin()->first + "'");
  }
  return ck;
}

}  // namespace

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != kMagic) {
    throw FormatError("checkpoint: bad magic (expected \"MGRU\")");
  }
  if (bytes.size() < 8) throw FormatError("checkpoint: truncated");
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body.size() + i]) << (8 * i);
  try {
    // Version is checked before the checksum so an old file reports the
    // more useful error.
    io::ByteReader head(body);
    head.bytes(4);
    const std::uint32_t version = head.u32();
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    if (crc32_of(body) != stored) throw FormatError("checkpoint: checksum mismatch");
    return parse_body(body);
  } catch (const IoError& e) {
    throw FormatError(std::string("checkpoint: truncated (") + e.what() + ")");
  }
}

void save_checkpoint(const ModelParams& params, const Vocabulary& vocab,
                     const std::filesystem::path& path) {
  io::write_file(path, serialize_checkpoint(params, vocab));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return parse_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace mmgru
