// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace mmgru {

/// Worker count for parallel scoring: hardware concurrency, capped by the
/// MMGRU_THREADS environment variable when it holds a positive integer.
std::size_t worker_count();

/// Calls fn(i) for every i in [0, n) across up to `workers` threads. Each
/// index is visited exactly once; callers write results by index so output
/// order never depends on scheduling. The first exception thrown is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = worker_count());

}  // namespace mmgru
