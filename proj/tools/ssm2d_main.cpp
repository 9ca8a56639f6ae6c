// Command-line surface: kernel export, verification suite, benchmarks, rank
// reports and layer application to tensor files.
//
// Exit codes: 0 success, 1 failed property, 2 argument/config error,
// 3 I/O error, 4 shape/group mismatch.
#include <CLI11.hpp>

#include <complex>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "ssm2d/bench.hpp"
#include "ssm2d/conv.hpp"
#include "ssm2d/io.hpp"
#include "ssm2d/s4nd.hpp"
#include "ssm2d/verify.hpp"

namespace {

using ssm2d::Index;

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitArgument = 2;
constexpr int kExitIo = 3;
constexpr int kExitShape = 4;

struct Size2d {
  Index rows = 0, cols = 0;
};

Size2d parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw ssm2d::ParseError("size '" + text + "': expected <rows>x<cols>");
  try {
    const long r = std::stol(text.substr(0, x));
    const long c = std::stol(text.substr(x + 1));
    if (r < 1 || c < 1) throw std::invalid_argument("non-positive");
    return {static_cast<Index>(r), static_cast<Index>(c)};
  } catch (const std::exception&) {
    throw ssm2d::ParseError("size '" + text + "': expected <rows>x<cols>");
  }
}

ssm2d::Mode parse_mode_flag(const std::string& text) {
  if (text == "unnormalized") return ssm2d::Mode::kUnnormalized;
  if (text == "normalized") return ssm2d::Mode::kNormalized;
  if (text == "normalized_relaxed") return ssm2d::Mode::kNormalizedRelaxed;
  throw ssm2d::ParseError("mode '" + text +
                          "': expected unnormalized|normalized|normalized_relaxed");
}

// Compiled kernel of one group of a parsed config, projected to the reals.
Eigen::MatrixXd compile_config_kernel(const ssm2d::ParamFile& file, Index rows, Index cols,
                                      ssm2d::Mode mode, Index group) {
  if (group < 0 || group >= file.group_count())
    throw std::invalid_argument("group index out of range");
  const ssm2d::CoeffCache cache = ssm2d::build_cache(rows, cols, mode);
  if (file.field == ssm2d::Field::kReal)
    return ssm2d::compile_kernel(file.real_groups[group], cache);
  return ssm2d::compile_kernel(file.complex_groups[group], cache).real();
}

int cmd_kernel(const std::string& config_path, const std::string& size_text,
               const std::string& mode_text, const std::string& format,
               const std::string& out_path, Index group) {
  const ssm2d::ParamFile file = ssm2d::read_params(config_path);
  const Size2d size = parse_size(size_text);
  const ssm2d::Mode mode = mode_text.empty() ? file.mode : parse_mode_flag(mode_text);
  const Eigen::MatrixXd k = compile_config_kernel(file, size.rows, size.cols, mode, group);
  if (format == "csv")
    ssm2d::write_kernel_csv(out_path, k);
  else if (format == "pgm")
    ssm2d::write_kernel_pgm(out_path, k);
  else if (format == "bin")
    ssm2d::write_kernel_bin(out_path, k);
  else
    throw ssm2d::ParseError("format '" + format + "': expected csv|pgm|bin");
  std::cout << "command: kernel\nrows: " << size.rows << "\ncols: " << size.cols
            << "\nmode: " << ssm2d::to_string(mode) << "\nout: " << out_path << "\n";
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, Index max_size, int trials) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<ssm2d::CheckResult> results = ssm2d::run_verification(seed, max_size, trials);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::cout.precision(17);
  std::cout << "command: verify\nseed: " << seed << "\nmax_size: " << max_size
            << "\ntrials: " << trials << "\n";
  int failures = 0;
  for (const auto& r : results) {
    std::cout << r.name << "_cases: " << r.cases << "\n";
    std::cout << r.name << "_max_error: " << r.max_error << "\n";
    std::cout << r.name << "_tolerance: " << r.tolerance << "\n";
    std::cout << r.name << ": " << (r.passed ? "pass" : "FAIL") << "\n";
    failures += r.passed ? 0 : 1;
  }
  std::cout << "checks: " << results.size() << "\nfailures: " << failures << "\n";
  std::cout << "time_total_s: " << elapsed << "\n";
  std::cout << "overall: " << (failures == 0 ? "pass" : "FAIL") << "\n";
  return failures == 0 ? kExitOk : kExitPropertyFailure;
}

int cmd_bench(const std::string& sizes_text, Index state_dim, Index n_ssm, Index channels,
              Index batch, int reps, const std::string& mode_text) {
  ssm2d::BenchConfig cfg;
  cfg.state_dim = state_dim;
  cfg.n_ssm = n_ssm;
  cfg.channels = channels;
  cfg.batch = batch;
  cfg.reps = reps;
  if (!mode_text.empty()) cfg.mode = parse_mode_flag(mode_text);
  if (reps < 1) throw ssm2d::ParseError("reps must be >= 1");

  std::vector<Size2d> sizes;
  std::stringstream ss(sizes_text);
  std::string item;
  while (std::getline(ss, item, ',')) sizes.push_back(parse_size(item));
  if (sizes.empty()) throw ssm2d::ParseError("sizes: expected at least one <rows>x<cols>");

  std::cout.precision(6);
  std::cout << "command: bench\nstate_dim: " << state_dim << "\nn_ssm: " << n_ssm
            << "\nchannels: " << channels << "\nbatch: " << batch << "\nreps: " << reps << "\n";
  for (const Size2d& size : sizes) {
    if (size.rows < 2 || size.cols < 2) throw ssm2d::ParseError("bench sizes must be >= 2x2");
    cfg.rows = size.rows;
    cfg.cols = size.cols;
    const ssm2d::BenchResult r = ssm2d::run_bench(cfg);
    const std::string prefix = std::to_string(size.rows) + "x" + std::to_string(size.cols);
    std::cout << "time_" << prefix << "_scan_per_sample_s: "
              << r.scan_batch_s / static_cast<double>(batch) << "\n";
    std::cout << "time_" << prefix << "_scan_batch_s: " << r.scan_batch_s << "\n";
    std::cout << "time_" << prefix << "_cache_build_s: " << r.cache_build_s << "\n";
    std::cout << "time_" << prefix << "_compile_s: " << r.compile_s << "\n";
    std::cout << "time_" << prefix << "_fft_forward_s: " << r.fft_forward_s << "\n";
    std::cout << "time_" << prefix << "_ratio: " << r.ratio << "\n";
  }
  return kExitOk;
}

int cmd_apply(const std::string& input_path, const std::string& config_path,
              const std::string& out_path) {
  const ssm2d::ImageTensor x = ssm2d::read_tensor(input_path);
  const ssm2d::ParamFile file = ssm2d::read_params(config_path);

  ssm2d::LayerConfig cfg;
  cfg.rows = x.rows;
  cfg.cols = x.cols;
  cfg.channels = x.channels;
  cfg.n_ssm = file.n_ssm;
  cfg.state_dim = file.state_dim;
  cfg.field = file.field;
  cfg.mode = file.mode;
  cfg.directions = file.directions;

  ssm2d::ImageTensor y;
  if (file.field == ssm2d::Field::kReal)
    y = ssm2d::apply_layer(x, file.real_groups, cfg);
  else
    y = ssm2d::apply_layer(x, file.complex_groups, cfg);
  ssm2d::write_tensor(out_path, y);
  std::cout << "command: apply\nbatch: " << x.batch << "\nrows: " << x.rows
            << "\ncols: " << x.cols << "\nchannels: " << x.channels << "\nout: " << out_path
            << "\n";
  return kExitOk;
}

int cmd_rank(const std::string& config_path, bool s4nd, const std::string& size_text,
             std::uint64_t seed, Index state_dim, double tol_ratio) {
  const Size2d size = parse_size(size_text);
  Eigen::MatrixXd k;
  if (s4nd) {
    const auto p1 = ssm2d::random_ssm1d<double>(ssm2d::mix_seed(seed, 1), state_dim);
    const auto p2 = ssm2d::random_ssm1d<double>(ssm2d::mix_seed(seed, 2), state_dim);
    k = ssm2d::outer_kernel(ssm2d::kernel_1d(p1, size.rows), ssm2d::kernel_1d(p2, size.cols));
  } else {
    if (config_path.empty()) throw ssm2d::ParseError("rank: pass --config or --s4nd");
    const ssm2d::ParamFile file = ssm2d::read_params(config_path);
    k = compile_config_kernel(file, size.rows, size.cols, file.mode, 0);
  }
  const Eigen::VectorXd sigma = ssm2d::singular_values(k);
  std::cout.precision(17);
  std::cout << "command: rank\nrows: " << size.rows << "\ncols: " << size.cols
            << "\nkernel: " << (s4nd ? "s4nd_outer" : "2dssm") << "\n";
  std::cout << "singular_values: ";
  for (Index i = 0; i < sigma.size(); ++i) std::cout << (i ? ", " : "") << sigma[i];
  std::cout << "\nnumerical_rank: " << ssm2d::numerical_rank(k, tol_ratio)
            << "\ntolerance_ratio: " << tol_ratio << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2-D state-space convolution kernels: compile, verify, benchmark, apply"};
  app.require_subcommand(1);

  std::string config_path, size_text, mode_text, format, out_path, input_path, sizes_text;
  std::uint64_t seed = 0;
  Index max_size = 12, state_dim = 16, n_ssm = 8, channels = 64, batch = 16, group = 0;
  int trials = 50, reps = 5;
  bool s4nd = false;
  double tol_ratio = 1e-9;

  auto* kernel = app.add_subcommand("kernel", "compile a kernel and export it");
  kernel->add_option("--config", config_path, "parameter file")->required();
  kernel->add_option("--size", size_text, "<rows>x<cols>")->required();
  kernel->add_option("--mode", mode_text, "override the config mode");
  kernel->add_option("--format", format, "csv|pgm|bin")->required();
  kernel->add_option("--out", out_path, "output path")->required();
  kernel->add_option("--group", group, "parameter group to compile (default 0)");

  auto* verify = app.add_subcommand("verify", "run the seeded verification suite");
  verify->add_option("--seed", seed, "seed (default 0)");
  verify->add_option("--max-size", max_size, "largest grid extent (default 12)");
  verify->add_option("--trials", trials, "draws per check combination (default 50)");

  auto* bench = app.add_subcommand("bench", "time recurrence vs compiled convolution");
  bench->add_option("--sizes", sizes_text, "comma list of <rows>x<cols>")->default_val("32x32");
  bench->add_option("--state-dim", state_dim, "state dimension N (default 16)");
  bench->add_option("--n-ssm", n_ssm, "parameter groups (default 8)");
  bench->add_option("--channels", channels, "channel count H (default 64)");
  bench->add_option("--batch", batch, "batch size (default 16)");
  bench->add_option("--reps", reps, "repetitions per phase, median reported (default 5)");
  bench->add_option("--mode", mode_text, "normalization mode (default normalized)");

  auto* apply = app.add_subcommand("apply", "apply the layer to a tensor file");
  apply->add_option("--input", input_path, "input tensor path")->required();
  apply->add_option("--config", config_path, "parameter file")->required();
  apply->add_option("--out", out_path, "output tensor path")->required();

  auto* rank = app.add_subcommand("rank", "singular values and numerical rank of a kernel");
  rank->add_option("--config", config_path, "parameter file for the 2-D SSM kernel");
  rank->add_flag("--s4nd", s4nd, "rank a random separable (outer-product) kernel");
  rank->add_option("--size", size_text, "<rows>x<cols>")->required();
  rank->add_option("--seed", seed, "seed for --s4nd (default 0)");
  rank->add_option("--state-dim", state_dim, "state dimension for --s4nd (default 1)");
  rank->add_option("--tol", tol_ratio, "singular value ratio cutoff (default 1e-9)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitArgument;
  }

  try {
    if (kernel->parsed())
      return cmd_kernel(config_path, size_text, mode_text, format, out_path, group);
    if (verify->parsed()) {
      if (trials < 1 || max_size < 5) {
        std::cerr << "verify: trials must be >= 1 and max-size >= 5\n";
        return kExitArgument;
      }
      return cmd_verify(seed, max_size, trials);
    }
    if (bench->parsed())
      return cmd_bench(sizes_text, state_dim, n_ssm, channels, batch, reps, mode_text);
    if (apply->parsed()) return cmd_apply(input_path, config_path, out_path);
    if (rank->parsed()) {
      if (rank->count("--state-dim") == 0) state_dim = 1;
      return cmd_rank(config_path, s4nd, size_text, seed, state_dim, tol_ratio);
    }
  } catch (const ssm2d::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const ssm2d::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitShape;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
  return kExitArgument;
}
