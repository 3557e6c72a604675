// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

// The packaged benchmark_main archive carries LTO bytecode from a different
// compiler release, so the entry point lives here instead.
BENCHMARK_MAIN();
