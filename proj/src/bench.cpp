#include "ssm2d/bench.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

#include "ssm2d/conv.hpp"
#include "ssm2d/verify.hpp"

namespace ssm2d {

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double median_seconds(int reps, Fn&& fn) {
  fn();  // warmup
  std::vector<double> samples(reps);
  for (double& s : samples) {
    const auto t0 = Clock::now();
    fn();
    s = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

volatile double g_sink;  // keeps timed results from being optimized away

template <class Scalar>
BenchResult run_bench_impl(const BenchConfig& cfg) {
  LayerConfig layer_cfg;
  layer_cfg.rows = cfg.rows;
  layer_cfg.cols = cfg.cols;
  layer_cfg.channels = cfg.channels;
  layer_cfg.n_ssm = cfg.n_ssm;
  layer_cfg.state_dim = cfg.state_dim;
  layer_cfg.field = cfg.field;
  layer_cfg.mode = cfg.mode;
  layer_cfg.validate();

  std::vector<SsmParams<Scalar>> params;
  params.reserve(cfg.n_ssm);
  for (Index g = 0; g < cfg.n_ssm; ++g)
    params.push_back(constrain<Scalar>(random_raw(mix_seed(cfg.seed, g), cfg.state_dim, cfg.field)));

  ImageTensor x = ImageTensor::zeros(cfg.batch, cfg.rows, cfg.cols, cfg.channels);
  UniformSource rng(mix_seed(cfg.seed, 77));
  for (double& v : x.data) v = rng.draw();

  BenchResult result;
  result.rows = cfg.rows;
  result.cols = cfg.cols;
  result.batch = cfg.batch;

  // the naive baseline reuses its state buffers across planes, as any
  // recurrence implementation in a loop would
  StateGrid<Scalar> grid;
  Eigen::MatrixXd plane(cfg.rows, cfg.cols);
  result.scan_batch_s = median_seconds(cfg.reps, [&] {
    double acc = 0.0;
    for (Index b = 0; b < cfg.batch; ++b)
      for (Index c = 0; c < cfg.channels; ++c) {
        plane = x.plane(b, c);
        scan_into(params[layer_cfg.group_of(c)], plane, cfg.mode, grid);
        acc += grid.y(cfg.rows - 1, cfg.cols - 1);
      }
    g_sink = acc;
  });

  result.cache_build_s =
      median_seconds(cfg.reps, [&] { g_sink = build_cache(cfg.rows, cfg.cols, cfg.mode).max_coeff(); });

  const CoeffCache cache = build_cache(cfg.rows, cfg.cols, cfg.mode);
  result.compile_s = median_seconds(cfg.reps, [&] {
    const auto stack = compile_kernel_stack(params, layer_cfg, cache);
    g_sink = detail::real_part(stack.kernels.back()(cfg.rows - 1, cfg.cols - 1));
  });

  Layer<Scalar> layer(layer_cfg, params);
  layer.kernels();  // precompile outside the timed region
  result.fft_forward_s = median_seconds(cfg.reps, [&] {
    const ImageTensor y = layer.forward(x);
    g_sink = y.data.back();
  });

  result.ratio = result.scan_batch_s / (result.compile_s + result.fft_forward_s);
  return result;
}

}  // namespace

BenchResult run_bench(const BenchConfig& cfg) {
  require(cfg.rows >= 2 && cfg.cols >= 2, "run_bench: sizes must be at least 2x2");
  require(cfg.reps >= 1, "run_bench: reps must be >= 1");
  require(cfg.batch >= 1, "run_bench: batch must be >= 1");
  if (cfg.field == Field::kReal) return run_bench_impl<double>(cfg);
  return run_bench_impl<std::complex<double>>(cfg);
}

}  // namespace ssm2d
