// Parameter-independent monomial lists for closed-form kernel evaluation.
//
// Every entry of the horizontal/vertical kernels is a sum of monomials
// coeff * A1^z1 A2^z2 A3^z3 A4^z4 * B_b. The exponent tuples and path-count
// coefficients depend only on the grid position and the normalization mode,
// so they are built once per (rows, cols, mode) by a Pascal-style dynamic
// program and reused for every parameter set.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ssm2d/core.hpp"

namespace ssm2d {

struct Monomial {
  std::array<std::uint16_t, 4> z{};  // exponents of A1..A4
  std::uint8_t b_index = 1;          // 1 -> B1, 2 -> B2
  double coeff = 0.0;                // path count, 0.5-per-step folded in when normalized
};

class CoeffCache {
 public:
  using Terms = std::vector<Monomial>;

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Mode mode() const { return mode_; }
  Index max_extent() const { return rows_ > cols_ ? rows_ : cols_; }

  const Terms& horizontal(Index i, Index j) const { return h_[i * cols_ + j]; }
  const Terms& vertical(Index i, Index j) const { return v_[i * cols_ + j]; }

  // Dedicated unnormalized lists for the first row and column, present only
  // in relaxed mode. Valid for cells with i == 0 or j == 0.
  const Terms& edge_horizontal(Index i, Index j) const {
    return i == 0 ? edge_row_h_[j] : edge_col_h_[i];
  }
  const Terms& edge_vertical(Index i, Index j) const {
    return i == 0 ? edge_row_v_[j] : edge_col_v_[i];
  }
  bool has_edge_lists() const { return mode_ == Mode::kNormalizedRelaxed; }

  // Largest path count seen while building (1.0 in normalized builds where
  // counts are folded with the step factors).
  double max_coeff() const { return max_coeff_; }

  // Counts exceeding 2^53 are no longer exactly representable; compilation
  // refuses unnormalized caches past that point.
  bool exact() const { return max_coeff_ <= 9007199254740992.0; }

  friend CoeffCache build_cache(Index rows, Index cols, Mode mode);

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Mode mode_ = Mode::kNormalized;
  double max_coeff_ = 0.0;
  std::vector<Terms> h_, v_;
  std::vector<Terms> edge_row_h_, edge_row_v_;  // indexed by j along row 0
  std::vector<Terms> edge_col_h_, edge_col_v_;  // indexed by i along column 0
};

CoeffCache build_cache(Index rows, Index cols, Mode mode);

}  // namespace ssm2d
