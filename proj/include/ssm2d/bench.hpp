// Wall-clock comparison of the naive recurrence against the compiled
// cache -> kernel -> FFT pipeline. All phases report medians over reps.
#pragma once

#include <cstdint>

#include "ssm2d/core.hpp"

namespace ssm2d {

struct BenchConfig {
  Index rows = 32, cols = 32;
  Index state_dim = 16;
  Index n_ssm = 8;
  Index channels = 64;
  Index batch = 16;
  int reps = 5;
  Field field = Field::kReal;
  Mode mode = Mode::kNormalized;
  std::uint64_t seed = 0;
};

struct BenchResult {
  Index rows = 0, cols = 0, batch = 0;
  double scan_batch_s = 0.0;    // naive per-cell recurrence over every (batch, channel) plane
  double cache_build_s = 0.0;   // coefficient cache construction
  double compile_s = 0.0;       // kernel compilation for all groups/directions
  double fft_forward_s = 0.0;   // FFT forward pass for the whole batch, kernels prebuilt
  double ratio = 0.0;           // scan_batch_s / (compile_s + fft_forward_s)
};

BenchResult run_bench(const BenchConfig& cfg);

}  // namespace ssm2d
