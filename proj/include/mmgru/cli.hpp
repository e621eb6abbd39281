// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Subcommands:
//
//   train     fit a model on a feature file + caption file, write a checkpoint
//   caption   greedy captions for every image in a feature file (JSON Lines)
//   eval      generate and score against references (BLEU, METEOR, CIDEr)
//   retrieve  bidirectional ranking: R@K and median rank
//   params    GRU / LSTM parameter counts per hidden size
//   score     score precomputed hypotheses against references
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmgru/errors.hpp"

namespace mmgru::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace mmgru::cli
