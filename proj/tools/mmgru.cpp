// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/cli.hpp"

int main(int argc, char** argv) { return mmgru::cli::main(argc, argv); }
