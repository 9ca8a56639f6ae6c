// Closed-form kernel compilation from cached monomials, plus direction stacks
// and analytic parameter gradients.
//
// Powers of the diagonal spectra are tabulated once up to 2*Lmax; each cell is
// then the cached monomial sum evaluated per state coordinate and contracted
// with C1/C2. Relaxed caches carry dedicated unnormalized lists for the first
// row and column, which are evaluated with doubled output vectors.
#pragma once

#include <utility>
#include <vector>

#include "ssm2d/coeff_cache.hpp"
#include "ssm2d/params.hpp"

namespace ssm2d {

namespace detail {

template <class Scalar>
using PowerTable = std::array<Eigen::ArrayXX<Scalar>, 4>;

template <class Scalar>
PowerTable<Scalar> build_power_tables(const SsmParams<Scalar>& p, Index max_extent) {
  const Index n = p.state_dim();
  const Index max_power = 2 * max_extent;  // highest exponent present in any cell
  PowerTable<Scalar> tables;
  for (int m = 0; m < 4; ++m) {
    auto& t = tables[m];
    t.resize(n, max_power + 1);
    t.col(0) = Eigen::ArrayX<Scalar>::Ones(n);
    for (Index pw = 1; pw <= max_power; ++pw) t.col(pw) = t.col(pw - 1) * p.A[m];
  }
  return tables;
}

// Per-coordinate sums of one cell's monomial list.
template <class Scalar>
struct TermSums {
  Eigen::ArrayX<Scalar> value;                    // sum coeff * A^z * B_b
  std::array<Eigen::ArrayX<Scalar>, 2> b_part;    // same without the B factor, split by b
  std::array<Eigen::ArrayX<Scalar>, 4> d_matrix;  // d(value)/dA_m

  void reset(Index n) {
    value = Eigen::ArrayX<Scalar>::Zero(n);
    for (auto& b : b_part) b = Eigen::ArrayX<Scalar>::Zero(n);
    for (auto& d : d_matrix) d = Eigen::ArrayX<Scalar>::Zero(n);
  }
};

template <class Scalar>
void accumulate_value(const CoeffCache::Terms& terms, const PowerTable<Scalar>& pw,
                      const SsmParams<Scalar>& p, Eigen::ArrayX<Scalar>& acc) {
  // fused per-coordinate walk; this loop carries the O(L_tot Lmax N) cost
  const Index n = acc.size();
  Scalar* out = acc.data();
  const Scalar* b_vec[2] = {p.B[0].data(), p.B[1].data()};
  for (const Monomial& m : terms) {
    const Scalar* p0 = pw[0].data() + static_cast<Index>(m.z[0]) * n;
    const Scalar* p1 = pw[1].data() + static_cast<Index>(m.z[1]) * n;
    const Scalar* p2 = pw[2].data() + static_cast<Index>(m.z[2]) * n;
    const Scalar* p3 = pw[3].data() + static_cast<Index>(m.z[3]) * n;
    const Scalar* bb = b_vec[m.b_index - 1];
    const double coeff = m.coeff;
    for (Index g = 0; g < n; ++g) out[g] += coeff * p0[g] * p1[g] * p2[g] * p3[g] * bb[g];
  }
}

// Full accumulation including B-split parts and dA terms (gradient path).
template <class Scalar>
void accumulate_sums(const CoeffCache::Terms& terms, const PowerTable<Scalar>& pw,
                     const SsmParams<Scalar>& p, TermSums<Scalar>& sums) {
  const Index n = p.state_dim();
  Eigen::ArrayX<Scalar> prod(n), partial(n);
  for (const Monomial& m : terms) {
    prod = pw[0].col(m.z[0]) * pw[1].col(m.z[1]);
    prod *= pw[2].col(m.z[2]);
    prod *= pw[3].col(m.z[3]);
    sums.b_part[m.b_index - 1] += m.coeff * prod;
    sums.value += m.coeff * prod * p.B[m.b_index - 1];
    for (int mat = 0; mat < 4; ++mat) {
      if (m.z[mat] == 0) continue;
      partial = Eigen::ArrayX<Scalar>::Constant(n, Scalar(static_cast<double>(m.z[mat])));
      for (int other = 0; other < 4; ++other)
        partial *= other == mat ? pw[other].col(m.z[other] - 1).eval() : pw[other].col(m.z[other]).eval();
      sums.d_matrix[mat] += m.coeff * partial * p.B[m.b_index - 1];
    }
  }
}

inline void check_unnormalized_guard(const CoeffCache& cache) {
  if (cache.mode() == Mode::kUnnormalized && !cache.exact())
    throw std::domain_error(
        "compile_kernel: unnormalized path counts exceed the exactly representable "
        "double range (2^53); use a normalized mode at this grid size");
}

}  // namespace detail

// K[i,j] = sum_g C1[g] k^h[i,j][g] + C2[g] k^v[i,j][g], evaluated from the
// cache. The kernel stays over Scalar; the layer takes the real part at its
// output.
template <class Scalar>
Eigen::MatrixX<Scalar> compile_kernel(const SsmParams<Scalar>& p, const CoeffCache& cache) {
  detail::check_unnormalized_guard(cache);
  const Index rows = cache.rows(), cols = cache.cols(), n = p.state_dim();
  require(n >= 1, "compile_kernel: state dimension must be >= 1");

  const auto pw = detail::build_power_tables(p, cache.max_extent());
  Eigen::MatrixX<Scalar> k(rows, cols);
  Eigen::ArrayX<Scalar> kh(n), kv(n);

  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const bool relaxed_edge = cache.has_edge_lists() && (i == 0 || j == 0);
      kh.setZero();
      kv.setZero();
      if (relaxed_edge) {
        detail::accumulate_value(cache.edge_horizontal(i, j), pw, p, kh);
        detail::accumulate_value(cache.edge_vertical(i, j), pw, p, kv);
      } else {
        detail::accumulate_value(cache.horizontal(i, j), pw, p, kh);
        detail::accumulate_value(cache.vertical(i, j), pw, p, kv);
      }
      const double c_scale = relaxed_edge ? 2.0 : 1.0;
      k(i, j) = c_scale * ((p.C[0] * kh).sum() + (p.C[1] * kv).sum());
    }
  }
  return k;
}

// Per-coordinate horizontal/vertical kernels of the main (pre-relaxation)
// recurrence; used by the normalization-bound checks.
template <class Scalar>
struct StateKernels {
  std::vector<Eigen::MatrixX<Scalar>> h, v;  // one grid per state coordinate
};

template <class Scalar>
StateKernels<Scalar> compile_state_kernels(const SsmParams<Scalar>& p, const CoeffCache& cache) {
  detail::check_unnormalized_guard(cache);
  const Index rows = cache.rows(), cols = cache.cols(), n = p.state_dim();
  const auto pw = detail::build_power_tables(p, cache.max_extent());

  StateKernels<Scalar> out;
  out.h.assign(n, Eigen::MatrixX<Scalar>(rows, cols));
  out.v.assign(n, Eigen::MatrixX<Scalar>(rows, cols));
  Eigen::ArrayX<Scalar> kh(n), kv(n);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      kh.setZero();
      kv.setZero();
      detail::accumulate_value(cache.horizontal(i, j), pw, p, kh);
      detail::accumulate_value(cache.vertical(i, j), pw, p, kv);
      for (Index g = 0; g < n; ++g) {
        out.h[g](i, j) = kh[g];
        out.v[g](i, j) = kv[g];
      }
    }
  }
  return out;
}

// Axis flips applied to direction d of a 1/2/4-direction stack:
// one direction: none; two: identity and the double flip; four: all
// combinations (none, rows, cols, both).
inline std::pair<bool, bool> direction_flips(int directions, int d) {
  require(d >= 0 && d < directions, "direction_flips: direction index out of range");
  switch (directions) {
    case 1: return {false, false};
    case 2: return d == 0 ? std::pair{false, false} : std::pair{true, true};
    case 4: return {(d & 1) != 0, (d & 2) != 0};
    default: throw std::invalid_argument("direction_flips: directions must be 1, 2 or 4");
  }
}

template <class Scalar>
Eigen::MatrixX<Scalar> flip2d(const Eigen::MatrixX<Scalar>& m, bool flip_rows, bool flip_cols) {
  if (flip_rows && flip_cols) return m.reverse();
  if (flip_rows) return m.colwise().reverse();
  if (flip_cols) return m.rowwise().reverse();
  return m;
}

template <class Scalar>
struct KernelStack {
  Index groups = 0;
  int directions = 1;
  std::vector<Eigen::MatrixX<Scalar>> kernels;  // [group * directions + direction]

  const Eigen::MatrixX<Scalar>& at(Index group, int direction) const {
    return kernels[group * directions + direction];
  }
};

// Compiles one kernel per (group, direction). `params` holds either one entry
// per group (shared across directions, the default bidirectional scheme) or
// one entry per (group, direction), group-major.
template <class Scalar>
KernelStack<Scalar> compile_kernel_stack(const std::vector<SsmParams<Scalar>>& params,
                                         const LayerConfig& cfg, const CoeffCache& cache) {
  cfg.validate();
  require(cache.rows() == cfg.rows && cache.cols() == cfg.cols,
          "compile_kernel_stack: cache extents do not match the configuration");
  require(cache.mode() == cfg.mode, "compile_kernel_stack: cache mode does not match");
  const Index g_count = cfg.n_ssm;
  const bool shared = static_cast<Index>(params.size()) == g_count;
  require(shared || static_cast<Index>(params.size()) == g_count * cfg.directions,
          "compile_kernel_stack: expected one parameter set per group or per (group, direction)");

  KernelStack<Scalar> stack;
  stack.groups = g_count;
  stack.directions = cfg.directions;
  stack.kernels.reserve(g_count * cfg.directions);
  for (Index g = 0; g < g_count; ++g) {
    Eigen::MatrixX<Scalar> shared_kernel;
    if (shared) shared_kernel = compile_kernel(params[g], cache);
    for (int d = 0; d < cfg.directions; ++d) {
      const auto& base =
          shared ? shared_kernel : compile_kernel(params[g * cfg.directions + d], cache);
      auto [fi, fj] = direction_flips(cfg.directions, d);
      stack.kernels.push_back(flip2d(base, fi, fj));
    }
  }
  return stack;
}

// Partial derivatives of the compiled kernel with respect to every raw
// parameter entry, one grid per raw scalar. Complex-field grids hold the
// holomorphic directional derivatives; their finite-difference counterparts
// are complex as well.
template <class Scalar>
struct KernelGradient {
  std::array<std::vector<Eigen::MatrixX<Scalar>>, 4> a, a_angle;
  std::array<std::vector<Eigen::MatrixX<Scalar>>, 2> b, b_angle;
  std::array<std::vector<Eigen::MatrixX<Scalar>>, 2> c, c_angle;
};

template <class Scalar>
KernelGradient<Scalar> kernel_gradient(const RawParams& raw, const CoeffCache& cache) {
  require(raw.field == ScalarTraits<Scalar>::field,
          "kernel_gradient: raw parameter field does not match the requested scalar");
  const SsmParams<Scalar> p = constrain<Scalar>(raw);
  detail::check_unnormalized_guard(cache);

  const Index rows = cache.rows(), cols = cache.cols(), n = p.state_dim();
  const auto pw = detail::build_power_tables(p, cache.max_extent());
  const bool complex_field = ScalarTraits<Scalar>::is_complex;

  KernelGradient<Scalar> grad;
  auto alloc = [&](auto& block, int count) {
    for (int i = 0; i < count; ++i)
      block[i].assign(n, Eigen::MatrixX<Scalar>::Zero(rows, cols));
  };
  alloc(grad.a, 4);
  alloc(grad.b, 2);
  alloc(grad.c, 2);
  if (complex_field) {
    alloc(grad.a_angle, 4);
    alloc(grad.b_angle, 2);
    alloc(grad.c_angle, 2);
  }

  detail::TermSums<Scalar> sh, sv;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const bool relaxed_edge = cache.has_edge_lists() && (i == 0 || j == 0);
      sh.reset(n);
      sv.reset(n);
      if (relaxed_edge) {
        detail::accumulate_sums(cache.edge_horizontal(i, j), pw, p, sh);
        detail::accumulate_sums(cache.edge_vertical(i, j), pw, p, sv);
      } else {
        detail::accumulate_sums(cache.horizontal(i, j), pw, p, sh);
        detail::accumulate_sums(cache.vertical(i, j), pw, p, sv);
      }
      const double cs = relaxed_edge ? 2.0 : 1.0;

      for (Index g = 0; g < n; ++g) {
        // dK/dA_m, dK/dB_b, dK/dC via the cell sums, then the chain through
        // the constraint maps onto the raw entries.
        for (int m = 0; m < 4; ++m) {
          const Scalar dK_dA = cs * (p.C[0][g] * sh.d_matrix[m][g] + p.C[1][g] * sv.d_matrix[m][g]);
          if constexpr (!ScalarTraits<Scalar>::is_complex) {
            grad.a[m][g](i, j) = dK_dA * sigmoid_slope(p.A[m][g]);
          } else {
            const double r = sigmoid(raw.a[m][g]);
            const double th_s = sigmoid(raw.a_angle[m][g]);
            const Scalar phase = p.A[m][g] / r;
            grad.a[m][g](i, j) = dK_dA * phase * sigmoid_slope(r);
            grad.a_angle[m][g](i, j) =
                dK_dA * Scalar(0, 1) * p.A[m][g] * (kTwoPi * sigmoid_slope(th_s));
          }
        }
        for (int bi = 0; bi < 2; ++bi) {
          const Scalar dK_dB = cs * (p.C[0][g] * sh.b_part[bi][g] + p.C[1][g] * sv.b_part[bi][g]);
          if constexpr (!ScalarTraits<Scalar>::is_complex) {
            grad.b[bi][g](i, j) = dK_dB;
          } else {
            const double r = sigmoid(raw.b[bi][g]);
            const double th_s = sigmoid(raw.b_angle[bi][g]);
            const Scalar phase = p.B[bi][g] / r;
            grad.b[bi][g](i, j) = dK_dB * phase * sigmoid_slope(r);
            grad.b_angle[bi][g](i, j) =
                dK_dB * Scalar(0, 1) * p.B[bi][g] * (kTwoPi * sigmoid_slope(th_s));
          }
        }
        const Scalar kh_g = cs * sh.value[g];
        const Scalar kv_g = cs * sv.value[g];
        if constexpr (!ScalarTraits<Scalar>::is_complex) {
          grad.c[0][g](i, j) = kh_g;
          grad.c[1][g](i, j) = kv_g;
        } else {
          const Scalar grids[2] = {kh_g, kv_g};
          for (int ci = 0; ci < 2; ++ci) {
            const double th = kTwoPi * sigmoid(raw.c_angle[ci][g]);
            const double th_s = sigmoid(raw.c_angle[ci][g]);
            const Scalar phase(std::cos(th), std::sin(th));  // radius unconstrained
            grad.c[ci][g](i, j) = grids[ci] * phase;
            grad.c_angle[ci][g](i, j) =
                grids[ci] * Scalar(0, 1) * p.C[ci][g] * (kTwoPi * sigmoid_slope(th_s));
          }
        }
      }
    }
  }
  return grad;
}

}  // namespace ssm2d
