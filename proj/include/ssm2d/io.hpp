// File formats: the key=value parameter text format, kernel exports
// (CSV / PGM P2 / raw binary) and the raw tensor container.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ssm2d/conv.hpp"
#include "ssm2d/params.hpp"

namespace ssm2d {

// Malformed content (unknown key, bad number, wrong magic, short payload).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure (missing file, unwritable path).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed parameter file: constrained parameter sets for every group, plus the
// layout keys needed to drive a layer.
struct ParamFile {
  Field field = Field::kReal;
  Mode mode = Mode::kNormalized;
  Index state_dim = 1;
  Index n_ssm = 1;
  int directions = 1;
  std::vector<SsmParams<double>> real_groups;
  std::vector<SsmParams<std::complex<double>>> complex_groups;

  Index group_count() const {
    return static_cast<Index>(field == Field::kReal ? real_groups.size()
                                                    : complex_groups.size());
  }
};

// Text format, one `key = value` per line, '#' starts a comment.
//   field = real | complex        mode = unnormalized | normalized | normalized_relaxed
//   n = <state dim>               n_ssm = <groups>        directions = 1|2|4
// Parameters are comma-separated arrays of length n_ssm * n (groups
// concatenated). Raw keys (a1_raw ... c2_raw, d_raw) pass through the
// constraint maps; direct keys (a1 ... c2, d) are taken as already
// constrained. In the complex field each group slice doubles to 2n values:
// radius then angle for raw keys, real then imaginary for direct keys.
// d / d_raw holds one value per group (or a single shared value).
ParamFile read_params(const std::string& path);
ParamFile parse_params(const std::string& text);

void write_kernel_csv(const std::string& path, const Eigen::MatrixXd& k);
// P2 grayscale, min-max scaled to 0..255; the scaling is recorded in a
// header comment.
void write_kernel_pgm(const std::string& path, const Eigen::MatrixXd& k);
// "SSM2DKRN", u32-le rows, u32-le cols, then rows*cols f64-le row-major.
void write_kernel_bin(const std::string& path, const Eigen::MatrixXd& k);
Eigen::MatrixXd read_kernel_bin(const std::string& path);

// "SSM2DTEN", u32-le batch/rows/cols/channels, f64-le payload in
// (batch, row, col, channel) order.
void write_tensor(const std::string& path, const ImageTensor& t);
ImageTensor read_tensor(const std::string& path);

}  // namespace ssm2d
