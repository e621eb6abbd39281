// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the unit and acceptance tests: toy model builders, a
// central-difference gradient oracle, and temp-file plumbing.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mmgru/dataset.hpp"
#include "mmgru/gru.hpp"
#include "mmgru/linalg.hpp"
#include "mmgru/model.hpp"
#include "mmgru/vocab.hpp"

namespace mmgru::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kGradTolerance = 1e-4;
// Denominator floor for the relative error; below it the comparison is
// effectively absolute, which absorbs round-off in the differenced loss.
inline constexpr double kGradFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
  return std::abs(analytic - numeric) / denom;
}

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  return init_uniform(rng, r, c, scale);
}

// Randomizes every tensor, biases included, so the oracle sees nonzero
// gradients everywhere.
inline ModelParams toy_params(Rng& rng, std::size_t d_img, std::size_t h, std::size_t n0,
                              StackKind kind, double scale = 0.5) {
  ModelParams p = ModelParams::random(d_img, h, n0, kind, rng, scale);
  for (auto& t : tensors(p)) {
    for (auto& x : t.data) x = rng.uniform(-scale, scale);
  }
  return p;
}

// START, `len` words drawn from the non-sentinel range (or any id when
// allow_unk), STOP.
inline TokenSeq random_caption(Rng& rng, std::size_t n0, std::size_t len) {
  TokenSeq c{kStartId};
  for (std::size_t i = 0; i < len; ++i) {
    c.push_back(static_cast<TokenId>(kUnkId + rng.uniform_index(n0 - kUnkId)));
  }
  c.push_back(kStopId);
  return c;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Compares analytic gradients against central differences of `loss` over
// every entry of every tensor.
inline GradCheck check_model_gradient(ModelParams params, const ModelParams& analytic,
                                      const std::function<double(const ModelParams&)>& loss) {
  GradCheck out;
  auto views = tensors(params);
  const auto grads = tensors(analytic);
  for (std::size_t t = 0; t < views.size(); ++t) {
    for (std::size_t i = 0; i < views[t].data.size(); ++i) {
      double& x = views[t].data[i];
      const double saved = x;
      x = saved + kFdStep;
      const double up = loss(params);
      x = saved - kFdStep;
      const double down = loss(params);
      x = saved;
      const double numeric = (up - down) / (2.0 * kFdStep);
      const double err = relative_error(grads[t].data[i], numeric);
      ++out.checked;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst_tensor = views[t].name;
        out.worst_index = i;
      }
    }
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mmgru_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Ten images, each with a distinct feature pattern and a distinct caption.
// Words are shared across captions so decoding must use the image.
struct OverfitCorpus {
  std::vector<CaptionEntry> entries;
  FeatureFile features;
};

inline OverfitCorpus overfit_corpus(std::size_t pairs = 10, std::size_t dim = 10) {
  static const std::vector<std::string> kCaptions = {
      "a dog runs on grass",      "a cat sits on a mat",     "two birds fly over water",
      "a man rides a red bike",   "children play in snow",   "a boat on the lake",
      "a woman holds an umbrella", "the train leaves station", "a horse eats hay",
      "people walk on the beach",
  };
  OverfitCorpus c;
  c.features.dim = static_cast<std::uint32_t>(dim);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::string id = "img" + std::to_string(i);
    Vector f(dim, 0.0);
    f[i % dim] = 1.0;
    f[(i + 3) % dim] += 0.5;
    c.features.vectors.emplace(id, f);
    c.entries.push_back({id, {kCaptions[i % kCaptions.size()]}});
  }
  return c;
}

}  // namespace mmgru::testing
