#include <doctest.h>

#include <complex>

#include "ssm2d/recurrence.hpp"
#include "ssm2d/verify.hpp"
#include "test_support.hpp"

using namespace ssm2d;
using namespace ssm2d::testing;
using Complex = std::complex<double>;

namespace {

Eigen::MatrixXd impulse_grid(Index rows, Index cols) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(rows, cols);
  u(0, 0) = 1.0;
  return u;
}

}  // namespace

TEST_CASE("zero-A parameters kill all propagation") {
  const auto p = delta_params();
  const auto grid = scan(p, impulse_grid(4, 5), Mode::kUnnormalized);
  CHECK(grid.y(0, 0) == 1.0);
  CHECK(grid.y.cwiseAbs().sum() == 1.0);
}

TEST_CASE("restricted parameters produce the rotated Pascal matrix") {
  const auto p = pascal_params();
  const auto grid = scan(p, impulse_grid(5, 5), Mode::kUnnormalized);
  // column 0 all ones, bottom row a full binomial row
  const Eigen::MatrixXd expected = pascal_matrix(5);
  CHECK((grid.y - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grid.y(4, 2) == 6.0);
}

TEST_CASE("one recurrence step along the horizontal axis") {
  const auto p = one_step_params();
  const auto grid = scan(p, impulse_grid(3, 3), Mode::kUnnormalized);
  CHECK(grid.y(1, 0) == doctest::Approx(0.75).epsilon(1e-15));  // A1 B1 + A2 B2
  const auto normalized = scan(p, impulse_grid(3, 3), Mode::kNormalized);
  CHECK(normalized.y(1, 0) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("scan is linear in the input for every mode") {
  const RawParams raw = random_raw(11, 3, Field::kReal);
  const auto p = constrain<double>(raw);
  const Eigen::MatrixXd u = random_grid(1, 6, 7), w = random_grid(2, 6, 7);
  const double alpha = 0.7, beta = -1.3;
  for (Mode mode : {Mode::kUnnormalized, Mode::kNormalized, Mode::kNormalizedRelaxed}) {
    const Eigen::MatrixXd combined = scan(p, alpha * u + beta * w, mode).y;
    const Eigen::MatrixXd split = alpha * scan(p, u, mode).y + beta * scan(p, w, mode).y;
    CHECK((combined - split).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("impulse placed at (p,q) shifts the origin response") {
  const auto p = constrain<double>(random_raw(5, 2, Field::kReal));
  const Index rows = 6, cols = 5;
  for (Mode mode : {Mode::kUnnormalized, Mode::kNormalized}) {
    const Eigen::MatrixX<double> base = impulse_response(p, rows, cols, mode);
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(rows, cols);
    u(2, 1) = 1.0;
    const auto shifted = scan(p, u, mode);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        const double expected = (i >= 2 && j >= 1) ? base(i - 2, j - 1) : 0.0;
        CHECK(shifted.y(i, j) == doctest::Approx(expected).epsilon(1e-13));
      }
  }
}

TEST_CASE("normalized impulse states stay below max |B|") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (Field field : {Field::kReal, Field::kComplex}) {
      const RawParams raw = random_raw(seed, 3, field);
      const Index rows = 7, cols = 7;
      auto check_states = [&](const auto& grid, const auto& p) {
        for (Index g = 0; g < 3; ++g) {
          const double bound = std::max(std::abs(p.B[0][g]), std::abs(p.B[1][g]));
          CHECK(grid.xh.row(g).cwiseAbs().maxCoeff() <= bound + 1e-15);
          CHECK(grid.xv.row(g).cwiseAbs().maxCoeff() <= bound + 1e-15);
        }
      };
      Eigen::MatrixXd u = Eigen::MatrixXd::Zero(rows, cols);
      u(0, 0) = 1.0;
      if (field == Field::kReal) {
        const auto p = constrain<double>(raw);
        check_states(scan(p, u, Mode::kNormalized), p);
      } else {
        const auto p = constrain<Complex>(raw);
        check_states(scan(p, u, Mode::kNormalized), p);
      }
    }
  }
}

TEST_CASE("complex scan output is the real part of the complex readout") {
  const auto p = constrain<Complex>(random_raw(9, 2, Field::kComplex));
  for (Mode mode : {Mode::kUnnormalized, Mode::kNormalized, Mode::kNormalizedRelaxed}) {
    const auto grid = scan(p, impulse_grid(5, 4), mode);
    const Eigen::MatrixXcd k = impulse_response(p, 5, 4, mode);
    CHECK((grid.y - k.real()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("impulse_response equals the scan driven by a unit impulse") {
  const auto p = constrain<double>(random_raw(33, 3, Field::kReal));
  for (Mode mode : {Mode::kUnnormalized, Mode::kNormalized, Mode::kNormalizedRelaxed}) {
    const Eigen::MatrixXd k = impulse_response(p, 6, 7, mode);
    const auto grid = scan(p, impulse_grid(6, 7), mode);
    CHECK((grid.y - k).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("relaxed mode reports doubled unnormalized edges, interior untouched by them") {
  const auto p = one_step_params();
  const Eigen::MatrixXd u = random_grid(4, 5, 5);
  const auto relaxed = scan(p, u, Mode::kNormalizedRelaxed);
  const auto normalized = scan(p, u, Mode::kNormalized);
  const auto unnormalized = scan(p, u, Mode::kUnnormalized);
  // edge outputs: unnormalized states with doubled C
  for (Index i = 0; i < 5; ++i)
    CHECK(relaxed.y(i, 0) == doctest::Approx(2.0 * unnormalized.y(i, 0)).epsilon(1e-13));
  for (Index j = 0; j < 5; ++j)
    CHECK(relaxed.y(0, j) == doctest::Approx(2.0 * unnormalized.y(0, j)).epsilon(1e-13));
  // interior cells agree with the plain normalized scan
  CHECK((relaxed.y.block(1, 1, 4, 4) - normalized.y.block(1, 1, 4, 4)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("empty grids are rejected") {
  const auto p = delta_params();
  CHECK_THROWS_AS(scan(p, Eigen::MatrixXd(), Mode::kNormalized), std::invalid_argument);
  CHECK_THROWS_AS(impulse_response(p, 0, 3, Mode::kNormalized), std::invalid_argument);
}
