// Separable (outer-product) kernel baseline and numerical rank measurement.
//
// The baseline runs an independent diagonal SSM per axis and combines the two
// 1-D kernels by outer product; any such kernel has rank one, which is what
// the rank checks exercise against the full two-axis model.
#pragma once

#include <Eigen/SVD>

#include "ssm2d/params.hpp"

namespace ssm2d {

template <class Scalar>
struct Ssm1dParams {
  Eigen::ArrayX<Scalar> A, B, C;

  Index state_dim() const { return A.size(); }
};

// Directly parameterized discrete diagonal SSM kernel:
// k[l] = Re(sum_g C[g] A[g]^l B[g]).
template <class Scalar>
Eigen::VectorXd kernel_1d(const Ssm1dParams<Scalar>& p, Index length) {
  require(length >= 1, "kernel_1d: length must be >= 1");
  const Index n = p.state_dim();
  require(n >= 1 && p.B.size() == n && p.C.size() == n, "kernel_1d: inconsistent shapes");
  Eigen::VectorXd k(length);
  Eigen::ArrayX<Scalar> power = Eigen::ArrayX<Scalar>::Ones(n);
  for (Index l = 0; l < length; ++l) {
    k[l] = detail::real_part((p.C * power * p.B).sum());
    power *= p.A;
  }
  return k;
}

inline Eigen::MatrixXd outer_kernel(const Eigen::Ref<const Eigen::VectorXd>& k1,
                                    const Eigen::Ref<const Eigen::VectorXd>& k2) {
  require(k1.size() >= 1 && k2.size() >= 1, "outer_kernel: factors must be non-empty");
  return k1 * k2.transpose();
}

inline Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& k) {
  require(k.allFinite(), "singular_values: non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k);
  return svd.singularValues();
}

// Count of singular values above tol_ratio times the largest one; the zero
// matrix has rank 0.
inline Index numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& k, double tol_ratio = 1e-9) {
  require(tol_ratio > 0.0 && tol_ratio < 1.0, "numerical_rank: tol_ratio must be in (0,1)");
  const Eigen::VectorXd sigma = singular_values(k);
  if (sigma.size() == 0 || sigma[0] == 0.0) return 0;
  const double cutoff = sigma[0] * tol_ratio;
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;
  return rank;
}

// Seeded constrained 1-D parameters, same constraint scheme as the 2-D model
// (sigmoid eigenvalues / polar map with limited radius).
template <class Scalar>
Ssm1dParams<Scalar> random_ssm1d(std::uint64_t seed, Index state_dim) {
  require(state_dim >= 1, "random_ssm1d: state_dim must be >= 1");
  UniformSource rng(seed);
  Ssm1dParams<Scalar> p;
  if constexpr (!ScalarTraits<Scalar>::is_complex) {
    p.A = rng.draw_array(state_dim).unaryExpr([](double x) { return sigmoid(x); });
    p.B = rng.draw_array(state_dim);
    p.C = rng.draw_array(state_dim);
  } else {
    auto polar = [&](bool limit_radius) {
      const Eigen::ArrayXd radius_raw = rng.draw_array(state_dim);
      const Eigen::ArrayXd angle_raw = rng.draw_array(state_dim);
      return ssm2d::detail::polar_from_raw(radius_raw, angle_raw, limit_radius);
    };
    p.A = polar(true);
    p.B = polar(true);
    p.C = polar(false);
  }
  return p;
}

}  // namespace ssm2d
