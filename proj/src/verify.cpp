#include "ssm2d/verify.hpp"

#include <algorithm>
#include <array>
#include <complex>

#include "ssm2d/conv.hpp"
#include "ssm2d/kernel.hpp"
#include "ssm2d/recurrence.hpp"
#include "ssm2d/s4nd.hpp"

namespace ssm2d {

namespace {

using Complex = std::complex<double>;

constexpr std::array<Mode, 3> kModes = {Mode::kUnnormalized, Mode::kNormalized,
                                        Mode::kNormalizedRelaxed};
constexpr std::array<Field, 2> kFields = {Field::kReal, Field::kComplex};

struct GridSize {
  Index rows, cols;
};
constexpr std::array<GridSize, 3> kEquivalenceGrids = {{{5, 5}, {8, 5}, {12, 12}}};

template <class Scalar>
double equivalence_error(const RawParams& raw, const CoeffCache& cache) {
  const auto p = constrain<Scalar>(raw);
  const auto compiled = compile_kernel(p, cache);
  const auto oracle = impulse_response(p, cache.rows(), cache.cols(), cache.mode());
  return (compiled - oracle).cwiseAbs().maxCoeff();
}

double fd_relative_error(const Eigen::MatrixXcd& analytic, const Eigen::MatrixXcd& fd) {
  const double diff = (analytic - fd).cwiseAbs().maxCoeff();
  const double scale = std::max({1.0, analytic.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff()});
  return diff / scale;
}

// Central finite difference of the compiled kernel with respect to one raw
// entry, via a mutation functor.
template <class Scalar, class Mutate>
Eigen::MatrixX<Scalar> fd_kernel(RawParams raw, const CoeffCache& cache, Mutate&& mutate,
                                 double eps) {
  mutate(raw, +eps);
  const auto hi = compile_kernel(constrain<Scalar>(raw), cache);
  mutate(raw, -2.0 * eps);
  const auto lo = compile_kernel(constrain<Scalar>(raw), cache);
  return ((hi - lo) / (2.0 * eps)).eval();
}

template <class Scalar>
double bound_excess(const RawParams& raw, const CoeffCache& cache) {
  const auto p = constrain<Scalar>(raw);
  const auto sk = compile_state_kernels(p, cache);
  double excess = 0.0;
  for (Index g = 0; g < p.state_dim(); ++g) {
    const double bound = std::max(std::abs(p.B[0][g]), std::abs(p.B[1][g]));
    for (const auto* grid : {&sk.h[g], &sk.v[g]})
      excess = std::max(excess, grid->cwiseAbs().maxCoeff() - bound);
  }
  return excess;
}

template <class Scalar>
double gradient_check_error(const RawParams& raw, const CoeffCache& cache) {
  constexpr double eps = 1e-6;
  const auto grad = kernel_gradient<Scalar>(raw, cache);
  double worst = 0.0;
  auto compare = [&](const Eigen::MatrixX<Scalar>& analytic, auto&& mutate) {
    const auto fd = fd_kernel<Scalar>(raw, cache, mutate, eps);
    worst = std::max(worst, fd_relative_error(analytic.template cast<Complex>(),
                                              fd.template cast<Complex>()));
  };
  const Index n = raw.state_dim();
  for (Index g = 0; g < n; ++g) {
    for (int m = 0; m < 4; ++m) {
      compare(grad.a[m][g], [m, g](RawParams& r, double d) { r.a[m][g] += d; });
      if (raw.field == Field::kComplex)
        compare(grad.a_angle[m][g], [m, g](RawParams& r, double d) { r.a_angle[m][g] += d; });
    }
    for (int b = 0; b < 2; ++b) {
      compare(grad.b[b][g], [b, g](RawParams& r, double d) { r.b[b][g] += d; });
      compare(grad.c[b][g], [b, g](RawParams& r, double d) { r.c[b][g] += d; });
      if (raw.field == Field::kComplex) {
        compare(grad.b_angle[b][g], [b, g](RawParams& r, double d) { r.b_angle[b][g] += d; });
        compare(grad.c_angle[b][g], [b, g](RawParams& r, double d) { r.c_angle[b][g] += d; });
      }
    }
  }
  return worst;
}

}  // namespace

RawParams random_raw(std::uint64_t seed, Index state_dim, Field field) {
  return init_raw(seed, state_dim, field);
}

SsmParams<double> pascal_params() {
  SsmParams<double> p;
  p.A[0] = p.A[1] = p.A[2] = Eigen::ArrayXd::Ones(1);
  p.A[3] = Eigen::ArrayXd::Zero(1);
  p.B[0] = Eigen::ArrayXd::Ones(1);
  p.B[1] = Eigen::ArrayXd::Zero(1);
  p.C[0] = Eigen::ArrayXd::Ones(1);
  p.C[1] = Eigen::ArrayXd::Zero(1);
  p.D = Eigen::ArrayXd::Zero(1);
  return p;
}

Eigen::MatrixXd pascal_matrix(Index size) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (Index i = 0; i < size; ++i) {
    m(i, 0) = 1.0;
    for (Index j = 1; j <= i; ++j)
      m(i, j) = m(i - 1, j - 1) + (j <= i - 1 ? m(i - 1, j) : 0.0);
  }
  return m;
}

CheckResult check_oracle_equivalence(std::uint64_t seed, int trials, Index max_size) {
  CheckResult r{"oracle_equivalence", 0, 0.0, 1e-10, false};
  std::uint64_t salt = 0;
  for (const auto& grid : kEquivalenceGrids) {
    if (grid.rows > max_size || grid.cols > max_size) continue;
    for (Mode mode : kModes) {
      const CoeffCache cache = build_cache(grid.rows, grid.cols, mode);
      for (Field field : kFields) {
        for (int t = 0; t < trials; ++t) {
          const Index n = 1 + static_cast<Index>(mix_seed(seed, salt) % 4);
          const RawParams raw = random_raw(mix_seed(seed, salt++), n, field);
          const double err = field == Field::kReal ? equivalence_error<double>(raw, cache)
                                                   : equivalence_error<Complex>(raw, cache);
          r.max_error = std::max(r.max_error, err);
          ++r.cases;
        }
      }
    }
  }
  r.passed = r.cases > 0 && r.max_error <= r.tolerance;
  return r;
}

CheckResult check_s4nd_rank_one(std::uint64_t seed, int trials, Index max_size) {
  CheckResult r{"s4nd_rank_one", 0, 0.0, 1e-12, false};
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = mix_seed(seed, 1000 + t);
    const Index rows = 2 + static_cast<Index>(mix_seed(s, 1) % (max_size - 1));
    const Index cols = 2 + static_cast<Index>(mix_seed(s, 2) % (max_size - 1));
    const Index n = 1 + static_cast<Index>(mix_seed(s, 3) % 4);
    Eigen::VectorXd k1, k2;
    if (mix_seed(s, 4) % 2 == 0) {
      k1 = kernel_1d(random_ssm1d<double>(mix_seed(s, 5), n), rows);
      k2 = kernel_1d(random_ssm1d<double>(mix_seed(s, 6), n), cols);
    } else {
      k1 = kernel_1d(random_ssm1d<Complex>(mix_seed(s, 5), n), rows);
      k2 = kernel_1d(random_ssm1d<Complex>(mix_seed(s, 6), n), cols);
    }
    const Eigen::MatrixXd outer = outer_kernel(k1, k2);
    const Eigen::VectorXd sigma = singular_values(outer);
    if (sigma[0] == 0.0) continue;  // degenerate all-zero draw
    const double ratio = sigma.size() > 1 ? sigma[1] / sigma[0] : 0.0;
    r.max_error = std::max(r.max_error, ratio);
    if (numerical_rank(outer) != 1) r.max_error = std::max(r.max_error, 1.0);
    ++r.cases;
  }
  r.passed = r.cases > 0 && r.max_error <= r.tolerance;
  return r;
}

CheckResult check_fft_vs_direct(std::uint64_t seed, int trials, Index max_size) {
  CheckResult r{"fft_vs_direct", 0, 0.0, 1e-8, false};
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = mix_seed(seed, 2000 + t);
    const Index rows = 2 + static_cast<Index>(mix_seed(s, 1) % (max_size - 1));
    const Index cols = 2 + static_cast<Index>(mix_seed(s, 2) % (max_size - 1));
    UniformSource rng(mix_seed(s, 3));
    Eigen::MatrixXd u(rows, cols), k(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        u(i, j) = rng.draw();
        k(i, j) = rng.draw();
      }
    const Eigen::MatrixXd direct = conv2d_direct(u, k);
    const Eigen::MatrixXd fast = conv2d_fft(u, k);
    const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
    r.max_error = std::max(r.max_error, (direct - fast).cwiseAbs().maxCoeff() / scale);
    ++r.cases;
  }
  r.passed = r.cases > 0 && r.max_error <= r.tolerance;
  return r;
}

CheckResult check_gradients(std::uint64_t seed, int trials) {
  CheckResult r{"gradient_fd", 0, 0.0, 1e-4, false};
  for (int t = 0; r.cases < trials; ++t) {
    const Mode mode = kModes[t % 3];
    const Field field = kFields[(t / 3) % 2];
    const CoeffCache cache = build_cache(8, 8, mode);
    const Index n = 1 + static_cast<Index>(mix_seed(seed, 3000 + t) % 3);
    const RawParams raw = random_raw(mix_seed(seed, 4000 + t), n, field);
    const double err = field == Field::kReal ? gradient_check_error<double>(raw, cache)
                                             : gradient_check_error<Complex>(raw, cache);
    r.max_error = std::max(r.max_error, err);
    ++r.cases;
  }
  r.passed = r.cases > 0 && r.max_error <= r.tolerance;
  return r;
}

CheckResult check_normalization_bound(std::uint64_t seed, int trials, Index size) {
  // tolerance: strict inequality up to rounding
  CheckResult r{"normalization_bound", 0, 0.0, 1e-15, false};
  const CoeffCache cache = build_cache(size, size, Mode::kNormalized);
  for (int t = 0; t < trials; ++t) {
    const Index n = 1 + static_cast<Index>(mix_seed(seed, 5000 + t) % 4);
    const Field field = t % 2 == 0 ? Field::kReal : Field::kComplex;
    const RawParams raw = random_raw(mix_seed(seed, 6000 + t), n, field);
    // |B| <= 1 by construction: complex draws go through the limited polar
    // map; real raws lie in [-1,1] already.
    const double excess = field == Field::kReal ? bound_excess<double>(raw, cache)
                                                : bound_excess<Complex>(raw, cache);
    r.max_error = std::max(r.max_error, excess);
    ++r.cases;
  }
  r.passed = r.cases > 0 && r.max_error <= r.tolerance;
  return r;
}

CheckResult check_pascal_construction(Index max_size) {
  CheckResult r{"pascal_construction", 0, 0.0, 0.0, false};
  const auto p = pascal_params();
  bool ok = true;
  for (Index size = 3; size <= std::min<Index>(8, max_size); ++size) {
    const CoeffCache cache = build_cache(size, size, Mode::kUnnormalized);
    const Eigen::MatrixXd k = compile_kernel(p, cache);
    const Eigen::MatrixXd expected = pascal_matrix(size);
    const double err = (k - expected).cwiseAbs().maxCoeff();
    r.max_error = std::max(r.max_error, err);
    ok = ok && err == 0.0 && numerical_rank(k) == size;
    ++r.cases;
  }
  r.passed = ok && r.cases > 0;
  return r;
}

CheckResult check_cache_structure(Index size) {
  CheckResult r{"cache_structure", 0, 0.0, 0.0, false};
  bool ok = true;
  for (Mode mode : kModes) {
    const CoeffCache cache = build_cache(size, size, mode);
    const Index limit = 2 * cache.max_extent();
    for (Index i = 0; i < size && ok; ++i)
      for (Index j = 0; j < size && ok; ++j) {
        for (const auto* terms : {&cache.horizontal(i, j), &cache.vertical(i, j)}) {
          ok = ok && static_cast<Index>(terms->size()) <= limit;
          for (const Monomial& m : *terms) {
            const Index z_sum = m.z[0] + m.z[1] + m.z[2] + m.z[3];
            ok = ok && z_sum == i + j && m.coeff > 0.0;
          }
        }
        ++r.cases;
      }
  }
  r.passed = ok && r.cases > 0;
  return r;
}

std::vector<CheckResult> run_verification(std::uint64_t seed, Index max_size, int trials) {
  require(trials >= 1, "run_verification: trials must be >= 1");
  require(max_size >= 5, "run_verification: max-size must be >= 5");
  std::vector<CheckResult> results;
  results.push_back(check_pascal_construction(max_size));
  results.push_back(check_cache_structure(std::min<Index>(max_size, 16)));
  results.push_back(check_oracle_equivalence(seed, trials, max_size));
  results.push_back(check_normalization_bound(seed, trials, std::min<Index>(max_size, 16)));
  results.push_back(check_gradients(seed, std::min(trials, 25)));
  results.push_back(check_fft_vs_direct(seed, trials, std::min<Index>(max_size, 32)));
  results.push_back(check_s4nd_rank_one(seed, trials, std::min<Index>(max_size, 32)));
  return results;
}

}  // namespace ssm2d
