// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "mslab/verifier.hpp"
#include "problems.hpp"

namespace {

using namespace mslab;

void BM_VerifyAll1D(benchmark::State& state) {
  const testing::JumpProblem1D p(512);
  const auto calib = calibration::calibrate(p.solve(100.0), p.g, 100.0);
  verifier::Sampling s;
  s.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verifier::verify_all(calib, s));
}
BENCHMARK(BM_VerifyAll1D)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_PhiColumn(benchmark::State& state) {
  const testing::JumpProblem1D p(512);
  const auto calib = calibration::calibrate(p.solve(100.0), p.g, 100.0);
  double x = -0.01;
  for (auto _ : state) {
    const auto c = calib.column(Vec2{x});
    benchmark::DoNotOptimize(calib.phi(c, c.u[0].value + 0.7 * c.h.h));
    x = x < 0.01 ? x + 1e-5 : -0.01;
  }
}
BENCHMARK(BM_PhiColumn);

}  // namespace
