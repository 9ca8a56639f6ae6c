// Shared scalar-field machinery: field/mode tags, layer configuration and the
// deterministic draw used by parameter initialization.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace ssm2d {

using Index = Eigen::Index;

enum class Field { kReal, kComplex };
enum class Mode { kUnnormalized, kNormalized, kNormalizedRelaxed };

inline const char* to_string(Field f) {
  return f == Field::kReal ? "real" : "complex";
}

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kUnnormalized: return "unnormalized";
    case Mode::kNormalized: return "normalized";
    case Mode::kNormalizedRelaxed: return "normalized_relaxed";
  }
  return "?";
}

template <class Scalar>
struct ScalarTraits {
  static constexpr bool is_complex = false;
  static constexpr Field field = Field::kReal;
};

template <class Real>
struct ScalarTraits<std::complex<Real>> {
  static constexpr bool is_complex = true;
  static constexpr Field field = Field::kComplex;
};

// Grid-square and channel layout of one layer instance. `rows`/`cols` are the
// two sequence lengths; the horizontal state advances along rows.
struct LayerConfig {
  Index rows = 1;
  Index cols = 1;
  Index channels = 1;   // H
  Index n_ssm = 1;      // parameter groups; channels within a group share kernels
  Index state_dim = 1;  // N
  Field field = Field::kReal;
  Mode mode = Mode::kNormalized;
  int directions = 1;  // 1, 2 or 4 flip variants of each group kernel

  Index total() const { return rows * cols; }
  Index max_extent() const { return rows > cols ? rows : cols; }
  Index group_of(Index channel) const { return channel * n_ssm / channels; }
  Index channels_per_group() const { return channels / n_ssm; }

  void validate() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("LayerConfig: grid extents must be >= 1");
    if (state_dim < 1) throw std::invalid_argument("LayerConfig: state_dim must be >= 1");
    if (channels < 1) throw std::invalid_argument("LayerConfig: channels must be >= 1");
    if (n_ssm < 1 || channels % n_ssm != 0)
      throw std::invalid_argument("LayerConfig: n_ssm must divide channels");
    if (directions != 1 && directions != 2 && directions != 4)
      throw std::invalid_argument("LayerConfig: directions must be 1, 2 or 4");
  }
};

// Logistic map clamped to the open unit interval. Raw magnitudes beyond ~37
// saturate to exactly 0 or 1 in double precision; the clamp keeps the image
// strictly inside (0, 1) for every finite input.
inline double sigmoid(double x) {
  double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return s < lo ? lo : (s > hi ? hi : s);
}

inline double sigmoid_slope(double value) { return value * (1.0 - value); }

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Deterministic uniform stream on [-1, 1); the bit mapping is fixed here so
// equal seeds give equal draws on any platform.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  double draw() {
    const std::uint64_t bits = engine_() >> 11;  // top 53 bits
    return 2.0 * (static_cast<double>(bits) * 0x1.0p-53) - 1.0;
  }

  Eigen::ArrayXd draw_array(Index n) {
    Eigen::ArrayXd out(n);
    for (Index i = 0; i < n; ++i) out[i] = draw();
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

inline void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

// splitmix64 step; combines seeds for independent deterministic substreams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

inline double real_part(double v) { return v; }
inline double real_part(const std::complex<double>& v) { return v.real(); }

}  // namespace detail

}  // namespace ssm2d
