#include "ssm2d/coeff_cache.hpp"

#include <algorithm>

namespace ssm2d {

namespace {

bool key_less(const Monomial& a, const Monomial& b) {
  if (a.z != b.z) return a.z < b.z;
  return a.b_index < b.b_index;
}

bool key_equal(const Monomial& a, const Monomial& b) {
  return a.z == b.z && a.b_index == b.b_index;
}

// Append `src` with exponent `axis` bumped by one and coefficients scaled by
// the per-step factor.
void append_shifted(std::vector<Monomial>& dst, const std::vector<Monomial>& src, int axis,
                    double step) {
  for (Monomial m : src) {
    m.z[axis] = static_cast<std::uint16_t>(m.z[axis] + 1);
    m.coeff *= step;
    dst.push_back(m);
  }
}

void sort_and_coalesce(std::vector<Monomial>& terms) {
  std::sort(terms.begin(), terms.end(), key_less);
  std::size_t out = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (out > 0 && key_equal(terms[out - 1], terms[i])) {
      terms[out - 1].coeff += terms[i].coeff;
    } else {
      terms[out++] = terms[i];
    }
  }
  terms.resize(out);
}

Monomial base_term(std::uint8_t b_index) {
  Monomial m;
  m.b_index = b_index;
  m.coeff = 1.0;
  return m;
}

}  // namespace

CoeffCache build_cache(Index rows, Index cols, Mode mode) {
  require(rows >= 1 && cols >= 1, "build_cache: grid extents must be >= 1");

  CoeffCache cache;
  cache.rows_ = rows;
  cache.cols_ = cols;
  cache.mode_ = mode;
  cache.h_.resize(rows * cols);
  cache.v_.resize(rows * cols);

  const double step = mode == Mode::kUnnormalized ? 1.0 : 0.5;
  double max_coeff = 0.0;

  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      auto& h = cache.h_[i * cols + j];
      auto& v = cache.v_[i * cols + j];
      if (i == 0 && j == 0) {
        h.push_back(base_term(1));
        v.push_back(base_term(2));
        max_coeff = std::max(max_coeff, 1.0);
        continue;
      }
      // x^h advances along i: A1 on the previous horizontal state, A2 on the
      // previous vertical state. x^v advances along j with A3, A4.
      if (i > 0) {
        append_shifted(h, cache.h_[(i - 1) * cols + j], 0, step);
        append_shifted(h, cache.v_[(i - 1) * cols + j], 1, step);
        sort_and_coalesce(h);
      }
      if (j > 0) {
        append_shifted(v, cache.h_[i * cols + (j - 1)], 2, step);
        append_shifted(v, cache.v_[i * cols + (j - 1)], 3, step);
        sort_and_coalesce(v);
      }
      for (const Monomial& m : h) max_coeff = std::max(max_coeff, m.coeff);
      for (const Monomial& m : v) max_coeff = std::max(max_coeff, m.coeff);
    }
  }

  if (mode == Mode::kNormalizedRelaxed) {
    // Unnormalized one-dimensional sweeps along the first row and column;
    // these stay tiny (at most two monomials per cell).
    cache.edge_row_h_.resize(cols);
    cache.edge_row_v_.resize(cols);
    cache.edge_col_h_.resize(rows);
    cache.edge_col_v_.resize(rows);
    cache.edge_row_h_[0].push_back(base_term(1));
    cache.edge_row_v_[0].push_back(base_term(2));
    cache.edge_col_h_[0] = cache.edge_row_h_[0];
    cache.edge_col_v_[0] = cache.edge_row_v_[0];
    for (Index j = 1; j < cols; ++j) {
      append_shifted(cache.edge_row_v_[j], cache.edge_row_h_[j - 1], 2, 1.0);
      append_shifted(cache.edge_row_v_[j], cache.edge_row_v_[j - 1], 3, 1.0);
      sort_and_coalesce(cache.edge_row_v_[j]);
    }
    for (Index i = 1; i < rows; ++i) {
      append_shifted(cache.edge_col_h_[i], cache.edge_col_h_[i - 1], 0, 1.0);
      append_shifted(cache.edge_col_h_[i], cache.edge_col_v_[i - 1], 1, 1.0);
      sort_and_coalesce(cache.edge_col_h_[i]);
    }
  }

  cache.max_coeff_ = max_coeff;
  return cache;
}

}  // namespace ssm2d
