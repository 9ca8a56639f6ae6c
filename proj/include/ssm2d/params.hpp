// Unconstrained parameter storage, the stability constraint maps, and
// seeded initialization.
//
// Real field: eigenvalues pass through a sigmoid, everything else is free.
// Complex field: A and B are polar with sigmoid radius in (0,1) and angle in
// (0,2pi); C keeps an unconstrained radius. D is real in both fields because
// the layer output takes the real part anyway.
#pragma once

#include <array>
#include <complex>

#include "ssm2d/core.hpp"

namespace ssm2d {

// Raw (optimizer-space) values for one channel group. In the real field the
// *_angle arrays stay empty; in the complex field each parameter is a
// (radius raw, angle raw) pair.
struct RawParams {
  Field field = Field::kReal;
  std::array<Eigen::ArrayXd, 4> a;
  std::array<Eigen::ArrayXd, 4> a_angle;
  std::array<Eigen::ArrayXd, 2> b;
  std::array<Eigen::ArrayXd, 2> b_angle;
  std::array<Eigen::ArrayXd, 2> c;
  std::array<Eigen::ArrayXd, 2> c_angle;
  Eigen::ArrayXd d;  // skip weights, one entry or one per channel of the group

  Index state_dim() const { return a[0].size(); }
};

// Constrained system parameters for one channel group: diagonal spectra
// A1..A4 plus the input/output vectors, all length N over Scalar.
template <class Scalar>
struct SsmParams {
  std::array<Eigen::ArrayX<Scalar>, 4> A;
  std::array<Eigen::ArrayX<Scalar>, 2> B;
  std::array<Eigen::ArrayX<Scalar>, 2> C;
  Eigen::ArrayXd D{Eigen::ArrayXd::Zero(1)};

  Index state_dim() const { return A[0].size(); }

  double skip(Index channel_in_group) const {
    return D.size() == 1 ? D[0] : D[channel_in_group];
  }
};

namespace detail {

inline void check_finite(const Eigen::ArrayXd& v, const char* name) {
  if (!v.isFinite().all())
    throw std::invalid_argument(std::string("non-finite value in parameter '") + name + "'");
}

inline void check_shape(const Eigen::ArrayXd& v, Index n, const char* name) {
  if (v.size() != n)
    throw std::invalid_argument(std::string("parameter '") + name + "' has inconsistent length");
}

}  // namespace detail

inline void validate(const RawParams& raw) {
  const Index n = raw.state_dim();
  require(n >= 1, "RawParams: state dimension must be >= 1");
  static constexpr const char* kA[4] = {"a1_raw", "a2_raw", "a3_raw", "a4_raw"};
  static constexpr const char* kAng[4] = {"a1_angle_raw", "a2_angle_raw", "a3_angle_raw",
                                          "a4_angle_raw"};
  static constexpr const char* kB[2] = {"b1_raw", "b2_raw"};
  static constexpr const char* kBAng[2] = {"b1_angle_raw", "b2_angle_raw"};
  static constexpr const char* kC[2] = {"c1_raw", "c2_raw"};
  static constexpr const char* kCAng[2] = {"c1_angle_raw", "c2_angle_raw"};
  const bool complex = raw.field == Field::kComplex;
  for (int i = 0; i < 4; ++i) {
    detail::check_shape(raw.a[i], n, kA[i]);
    detail::check_finite(raw.a[i], kA[i]);
    if (complex) {
      detail::check_shape(raw.a_angle[i], n, kAng[i]);
      detail::check_finite(raw.a_angle[i], kAng[i]);
    }
  }
  for (int i = 0; i < 2; ++i) {
    detail::check_shape(raw.b[i], n, kB[i]);
    detail::check_finite(raw.b[i], kB[i]);
    detail::check_shape(raw.c[i], n, kC[i]);
    detail::check_finite(raw.c[i], kC[i]);
    if (complex) {
      detail::check_shape(raw.b_angle[i], n, kBAng[i]);
      detail::check_finite(raw.b_angle[i], kBAng[i]);
      detail::check_shape(raw.c_angle[i], n, kCAng[i]);
      detail::check_finite(raw.c_angle[i], kCAng[i]);
    }
  }
  require(raw.d.size() >= 1, "RawParams: d must have at least one entry");
  detail::check_finite(raw.d, "d_raw");
}

namespace detail {

inline Eigen::ArrayXcd polar_from_raw(const Eigen::ArrayXd& radius_raw,
                                      const Eigen::ArrayXd& angle_raw, bool limit_radius) {
  const Index n = radius_raw.size();
  Eigen::ArrayXcd out(n);
  for (Index g = 0; g < n; ++g) {
    const double r = limit_radius ? sigmoid(radius_raw[g]) : radius_raw[g];
    const double th = kTwoPi * sigmoid(angle_raw[g]);
    out[g] = std::complex<double>(r * std::cos(th), r * std::sin(th));
  }
  return out;
}

}  // namespace detail

template <class Scalar>
SsmParams<Scalar> constrain(const RawParams& raw);

template <>
inline SsmParams<double> constrain<double>(const RawParams& raw) {
  require(raw.field == Field::kReal, "constrain<double> requires real-field raw parameters");
  validate(raw);
  SsmParams<double> p;
  for (int i = 0; i < 4; ++i) p.A[i] = raw.a[i].unaryExpr([](double x) { return sigmoid(x); });
  for (int i = 0; i < 2; ++i) {
    p.B[i] = raw.b[i];
    p.C[i] = raw.c[i];
  }
  p.D = raw.d;
  return p;
}

template <>
inline SsmParams<std::complex<double>> constrain<std::complex<double>>(const RawParams& raw) {
  require(raw.field == Field::kComplex, "constrain<complex> requires complex-field raw parameters");
  validate(raw);
  SsmParams<std::complex<double>> p;
  for (int i = 0; i < 4; ++i) p.A[i] = detail::polar_from_raw(raw.a[i], raw.a_angle[i], true);
  for (int i = 0; i < 2; ++i) {
    p.B[i] = detail::polar_from_raw(raw.b[i], raw.b_angle[i], true);
    p.C[i] = detail::polar_from_raw(raw.c[i], raw.c_angle[i], false);
  }
  p.D = raw.d;
  return p;
}

// Seeded U[-1,1] initialization of one channel group. Draw order is part of
// the contract: a1..a4, their angles, b1, b2, angles, c1, c2, angles, d.
inline RawParams init_raw(std::uint64_t seed, Index state_dim, Field field) {
  require(state_dim >= 1, "init_raw: state_dim must be >= 1");
  UniformSource rng(seed);
  RawParams raw;
  raw.field = field;
  const bool complex = field == Field::kComplex;
  for (int i = 0; i < 4; ++i) {
    raw.a[i] = rng.draw_array(state_dim);
    if (complex) raw.a_angle[i] = rng.draw_array(state_dim);
  }
  for (int i = 0; i < 2; ++i) {
    raw.b[i] = rng.draw_array(state_dim);
    if (complex) raw.b_angle[i] = rng.draw_array(state_dim);
  }
  for (int i = 0; i < 2; ++i) {
    raw.c[i] = rng.draw_array(state_dim);
    if (complex) raw.c_angle[i] = rng.draw_array(state_dim);
  }
  raw.d = rng.draw_array(1);
  return raw;
}

inline RawParams init_raw(std::uint64_t seed, const LayerConfig& cfg) {
  return init_raw(seed, cfg.state_dim, cfg.field);
}

}  // namespace ssm2d
