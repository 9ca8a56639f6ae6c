// Seeded verification checks shared by the CLI verify command, the unit
// tests and the acceptance suite. Every check is deterministic given its
// arguments.
#pragma once

#include <string>
#include <vector>

#include "ssm2d/params.hpp"

namespace ssm2d {

struct CheckResult {
  std::string name;
  int cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Restricted parameters that reach the rotated-Pascal kernel: A1=A2=A3=1,
// A4=0, B1=C1=1, B2=C2=0 (N=1, outside the sigmoid image on purpose).
SsmParams<double> pascal_params();

// The kernel those parameters generate under our axis convention:
// K[i,j] = binomial(i, j), lower triangular.
Eigen::MatrixXd pascal_matrix(Index size);

// Max |compiled kernel - recurrence impulse response| over random constrained
// draws across both fields, all three modes and grids {5x5, 8x5, 12x12}
// capped at max_size; trials draws per combination.
CheckResult check_oracle_equivalence(std::uint64_t seed, int trials, Index max_size);

// sigma2/sigma1 of random separable (outer-product) kernels.
CheckResult check_s4nd_rank_one(std::uint64_t seed, int trials, Index max_size);

// Relative error between FFT and direct causal convolution on random pairs.
CheckResult check_fft_vs_direct(std::uint64_t seed, int trials, Index max_size);

// Analytic kernel partials against central finite differences (eps 1e-6) on
// 8x8 grids, both fields, all modes.
CheckResult check_gradients(std::uint64_t seed, int trials);

// Normalized-mode bound: per-coordinate |k^h|, |k^v| <= max(|B1|,|B2|) when
// the B entries are inside the unit disc.
CheckResult check_normalization_bound(std::uint64_t seed, int trials, Index size);

// Pascal construction: exact kernel entries and full numerical rank for
// sizes 3..8 (capped at max_size).
CheckResult check_pascal_construction(Index max_size);

// Cache structure: per-cell term count <= 2*Lmax and exponent sums equal to
// i+j, for every cell of every mode at the given size.
CheckResult check_cache_structure(Index size);

// Runs the full ladder at defaults compatible with the CLI verify command.
std::vector<CheckResult> run_verification(std::uint64_t seed, Index max_size, int trials);

// Seeded constrained draw helpers (U[-1,1] raws through the constraint maps).
RawParams random_raw(std::uint64_t seed, Index state_dim, Field field);

}  // namespace ssm2d
