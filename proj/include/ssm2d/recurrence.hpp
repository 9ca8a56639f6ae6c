// Ground-truth evaluation of the two-axis linear recurrence. scan() walks the
// grid cell by cell and is the reference the kernel compiler is checked
// against; impulse_response() is the same walk driven by a unit impulse.
//
// Conventions (fixed across the project): the horizontal state advances along
// i (rows), the vertical state along j (cols); states at index -1 are zero;
// the input enters both states at their own cell:
//   x^h[i,j] = s*(A1 x^h[i-1,j] + A2 x^v[i-1,j]) + B1 u[i,j]
//   x^v[i,j] = s*(A3 x^h[i,j-1] + A4 x^v[i,j-1]) + B2 u[i,j]
//   y[i,j]   = Re(C1 . x^h[i,j] + C2 . x^v[i,j])
// with s = 1 unnormalized and s = 0.5 otherwise. In relaxed mode the reported
// output on the first row and column comes from a second pass that re-runs the
// edges with s = 1 and doubled output vectors; interior cells never see those
// edge states.
#pragma once

#include <complex>

#include "ssm2d/params.hpp"

namespace ssm2d {

template <class Scalar>
struct StateGrid {
  Index rows = 0, cols = 0;
  Eigen::MatrixX<Scalar> xh, xv;  // N x (rows*cols), one column per cell (i*cols + j)
  Eigen::MatrixXd y;              // rows x cols

  Eigen::Ref<const Eigen::VectorX<Scalar>> horizontal(Index i, Index j) const {
    return xh.col(i * cols + j);
  }
  Eigen::Ref<const Eigen::VectorX<Scalar>> vertical(Index i, Index j) const {
    return xv.col(i * cols + j);
  }
};

namespace detail {

// Unnormalized sweep along the first row (i = 0): the horizontal state there
// reduces to B1 u, the vertical one is a 1-D recurrence in j.
template <class Scalar>
void edge_states_row0(const SsmParams<Scalar>& p, const Eigen::Ref<const Eigen::VectorXd>& u_row,
                      Eigen::MatrixX<Scalar>& xh, Eigen::MatrixX<Scalar>& xv) {
  const Index n = p.state_dim(), cols = u_row.size();
  xh.resize(n, cols);
  xv.resize(n, cols);
  for (Index j = 0; j < cols; ++j) {
    xh.col(j) = (p.B[0] * u_row[j]).matrix();
    xv.col(j) = (p.B[1] * u_row[j]).matrix();
    if (j > 0)
      xv.col(j) += (p.A[2] * xh.col(j - 1).array() + p.A[3] * xv.col(j - 1).array()).matrix();
  }
}

// Mirror sweep along the first column (j = 0).
template <class Scalar>
void edge_states_col0(const SsmParams<Scalar>& p, const Eigen::Ref<const Eigen::VectorXd>& u_col,
                      Eigen::MatrixX<Scalar>& xh, Eigen::MatrixX<Scalar>& xv) {
  const Index n = p.state_dim(), rows = u_col.size();
  xh.resize(n, rows);
  xv.resize(n, rows);
  for (Index i = 0; i < rows; ++i) {
    xh.col(i) = (p.B[0] * u_col[i]).matrix();
    xv.col(i) = (p.B[1] * u_col[i]).matrix();
    if (i > 0)
      xh.col(i) += (p.A[0] * xh.col(i - 1).array() + p.A[1] * xv.col(i - 1).array()).matrix();
  }
}

template <class Scalar>
Scalar readout(const SsmParams<Scalar>& p, const Eigen::Ref<const Eigen::VectorX<Scalar>>& xh,
               const Eigen::Ref<const Eigen::VectorX<Scalar>>& xv) {
  // plain (non-conjugating) inner products
  return (p.C[0] * xh.array()).sum() + (p.C[1] * xv.array()).sum();
}

}  // namespace detail

// scan with caller-owned storage; repeated calls at one geometry reuse the
// grid's buffers.
template <class Scalar>
void scan_into(const SsmParams<Scalar>& p, const Eigen::Ref<const Eigen::MatrixXd>& u, Mode mode,
               StateGrid<Scalar>& grid) {
  const Index rows = u.rows(), cols = u.cols(), n = p.state_dim();
  require(rows >= 1 && cols >= 1, "scan: input grid must be non-empty");

  grid.rows = rows;
  grid.cols = cols;
  grid.xh.resize(n, rows * cols);
  grid.xv.resize(n, rows * cols);
  grid.y.resize(rows, cols);

  const double s = mode == Mode::kUnnormalized ? 1.0 : 0.5;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Index cell = i * cols + j;
      auto xh = grid.xh.col(cell);
      auto xv = grid.xv.col(cell);
      xh = (p.B[0] * u(i, j)).matrix();
      if (i > 0) {
        const Index up = (i - 1) * cols + j;
        xh += s * (p.A[0] * grid.xh.col(up).array() + p.A[1] * grid.xv.col(up).array()).matrix();
      }
      xv = (p.B[1] * u(i, j)).matrix();
      if (j > 0) {
        const Index left = i * cols + (j - 1);
        xv +=
            s * (p.A[2] * grid.xh.col(left).array() + p.A[3] * grid.xv.col(left).array()).matrix();
      }
      // the single point where complex outputs are projected to the reals
      grid.y(i, j) = detail::real_part(detail::readout<Scalar>(p, xh, xv));
    }
  }

  if (mode == Mode::kNormalizedRelaxed) {
    Eigen::MatrixX<Scalar> exh, exv;
    detail::edge_states_row0(p, u.row(0).transpose(), exh, exv);
    for (Index j = 0; j < cols; ++j)
      grid.y(0, j) = 2.0 * detail::real_part(detail::readout<Scalar>(p, exh.col(j), exv.col(j)));
    detail::edge_states_col0(p, u.col(0), exh, exv);
    for (Index i = 0; i < rows; ++i)
      grid.y(i, 0) = 2.0 * detail::real_part(detail::readout<Scalar>(p, exh.col(i), exv.col(i)));
  }
}

template <class Scalar>
StateGrid<Scalar> scan(const SsmParams<Scalar>& p, const Eigen::Ref<const Eigen::MatrixXd>& u,
                       Mode mode) {
  StateGrid<Scalar> grid;
  scan_into(p, u, mode, grid);
  return grid;
}

// Kernel of the system by definition: the response to a unit impulse at the
// origin, kept over Scalar (the layer projects to the reals only at its
// output). Checked against compile_kernel() in the tests.
template <class Scalar>
Eigen::MatrixX<Scalar> impulse_response(const SsmParams<Scalar>& p, Index rows, Index cols,
                                        Mode mode) {
  require(rows >= 1 && cols >= 1, "impulse_response: grid extents must be >= 1");
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(rows, cols);
  u(0, 0) = 1.0;

  // Re-run the scan but keep the pre-projection readout.
  const Index n = p.state_dim();
  Eigen::MatrixX<Scalar> xh(n, rows * cols), xv(n, rows * cols);
  Eigen::MatrixX<Scalar> k(rows, cols);
  const double s = mode == Mode::kUnnormalized ? 1.0 : 0.5;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Index cell = i * cols + j;
      xh.col(cell) = (p.B[0] * u(i, j)).matrix();
      if (i > 0) {
        const Index up = (i - 1) * cols + j;
        xh.col(cell) += s * (p.A[0] * xh.col(up).array() + p.A[1] * xv.col(up).array()).matrix();
      }
      xv.col(cell) = (p.B[1] * u(i, j)).matrix();
      if (j > 0) {
        const Index left = i * cols + (j - 1);
        xv.col(cell) +=
            s * (p.A[2] * xh.col(left).array() + p.A[3] * xv.col(left).array()).matrix();
      }
      k(i, j) = detail::readout<Scalar>(p, xh.col(cell), xv.col(cell));
    }
  }

  if (mode == Mode::kNormalizedRelaxed) {
    Eigen::MatrixX<Scalar> exh, exv;
    detail::edge_states_row0(p, u.row(0).transpose(), exh, exv);
    for (Index j = 0; j < cols; ++j)
      k(0, j) = 2.0 * detail::readout<Scalar>(p, exh.col(j), exv.col(j));
    detail::edge_states_col0(p, u.col(0), exh, exv);
    for (Index i = 0; i < rows; ++i)
      k(i, 0) = 2.0 * detail::readout<Scalar>(p, exh.col(i), exv.col(i));
  }

  return k;
}

}  // namespace ssm2d
