// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmgru/binary_io.hpp"
#include "mmgru/errors.hpp"

namespace mmgru {

namespace io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace io

namespace {
constexpr char kFeatureMagic[4] = {'M', 'M', 'F', 'T'};
}

FeatureFile parse_features(std::span<const std::uint8_t> bytes) {
  io::ByteReader in(bytes);
  if (bytes.size() < 4) throw IoError("feature file: truncated before magic");
  if (std::string(reinterpret_cast<const char*>(bytes.data()), 4) !=
                              std::string(kFeatureMagic, 4)) {
    throw FormatError("feature file: bad magic (expected \"MMFT\")");
  }
  in.bytes(4);
  const std::uint32_t version = in.u32();
  if (version != kFeatureFormatVersion) {
    throw FormatError("feature file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  FeatureFile out;
  out.dim = in.u32();
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint16_t id_len = in.u16();
    std::string id = in.bytes(id_len);
    std::vector<double> values(out.dim);
    for (auto& v : values) {
      v = static_cast<double>(in.f32());
      if (!std::isfinite(v)) throw DataError("feature file: non-finite value for id '" + id + "'");
    }
    if (!out.vectors.emplace(id, Vector(std::move(values))).second) {
      throw DataError("feature file: duplicate id '" + id + "'");
    }
  }
  if (in.remaining() != 0) {
    throw IoError("feature file: " + std::to_string(in.remaining()) + " trailing bytes");
  }
  return out;
}

FeatureFile load_features(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return parse_features(bytes);
  } catch (const Error& e) {
    // Preserve the error category, add the path.
    const std::string msg = path.string() + ": " + e.what();
    if (dynamic_cast<const FormatError*>(&e)) throw FormatError(msg);
    if (dynamic_cast<const DataError*>(&e)) throw DataError(msg);
    throw IoError(msg);
  }
}

std::vector<std::uint8_t> serialize_features(const FeatureFile& features) {
  io::ByteWriter w;
  w.bytes(std::string_view(kFeatureMagic, 4));
  w.u32(kFeatureFormatVersion);
  w.u32(static_cast<std::uint32_t>(features.vectors.size()));
  w.u32(features.dim);
  for (const auto& [id, vec] : features.vectors) {
    if (id.size() > 0xffff) throw ParameterError("feature id longer than 65535 bytes");
    if (vec.size() != features.dim) {
      throw ShapeError("feature '" + id + "' has length " + std::to_string(vec.size()) +
                       ", header dim is " + std::to_string(features.dim));
    }
    w.u16(static_cast<std::uint16_t>(id.size()));
    w.bytes(id);
    for (double v : vec.values()) w.f32(static_cast<float>(v));
  }
  return w.buffer();
}

void save_features(const std::filesystem::path& path, const FeatureFile& features) {
  io::write_file(path, serialize_features(features));
}

std::vector<CaptionEntry> parse_caption_lines(std::string_view text) {
  std::vector<CaptionEntry> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "caption file line " + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("captions") || !obj["captions"].is_array()) {
      throw ParseError(where + "expected {\"id\": string, \"captions\": [string, ...]}");
    }
    CaptionEntry entry;
    entry.id = obj["id"].get<std::string>();
    for (const auto& c : obj["captions"]) {
      if (!c.is_string()) throw ParseError(where + "caption is not a string");
      entry.captions.push_back(c.get<std::string>());
    }
    entries.push_back(std::move(entry));
    if (end == text.size()) break;
  }
  return entries;
}

std::vector<CaptionEntry> read_caption_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  try {
    return parse_caption_lines(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<Tokens> caption_corpus(const std::vector<CaptionEntry>& entries) {
  std::vector<Tokens> corpus;
  for (const auto& e : entries)
    for (const auto& c : e.captions) corpus.push_back(normalize_text(c));
  return corpus;
}

std::size_t CaptionDataset::caption_count() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.captions.size();
  return n;
}

CaptionDataset build_dataset(const std::vector<CaptionEntry>& entries, const FeatureFile& features,
                             const Vocabulary& vocab) {
  CaptionDataset ds;
  ds.vocab = vocab;
  ds.feature_dim = features.dim;

  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.id).second) throw DataError("caption file: duplicate image id '" + e.id + "'");
    if (e.captions.empty()) throw DataError("caption file: image '" + e.id + "' has no captions");
    auto it = features.vectors.find(e.id);
    if (it == features.vectors.end()) {
      missing.push_back(e.id);
      continue;
    }
    CaptionRecord rec;
    rec.image_id = e.id;
    rec.feature = it->second;
    for (const auto& raw : e.captions) {
      Tokens toks = normalize_text(raw);
      rec.captions.push_back(encode_caption(toks, vocab));
      rec.references.push_back(std::move(toks));
    }
    ds.records.push_back(std::move(rec));
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "no feature vector for image id(s):";
    for (const auto& id : missing) msg << " '" << id << "'";
    throw DataError(msg.str());
  }
  return ds;
}

CaptionDataset load_captions(const std::filesystem::path& path, const Vocabulary& vocab,
                             const FeatureFile& features) {
  return build_dataset(read_caption_file(path), features, vocab);
}

}  // namespace mmgru
