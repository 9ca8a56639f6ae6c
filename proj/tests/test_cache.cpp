#include <doctest.h>

#include "ssm2d/coeff_cache.hpp"

using namespace ssm2d;

namespace {

bool same_terms(const CoeffCache::Terms& a, const CoeffCache::Terms& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].z != b[i].z || a[i].b_index != b[i].b_index || a[i].coeff != b[i].coeff) return false;
  return true;
}

Monomial term(std::uint16_t z1, std::uint16_t z2, std::uint16_t z3, std::uint16_t z4,
              std::uint8_t b, double coeff) {
  Monomial m;
  m.z = {z1, z2, z3, z4};
  m.b_index = b;
  m.coeff = coeff;
  return m;
}

}  // namespace

TEST_CASE("origin cell holds the bare B terms") {
  const CoeffCache cache = build_cache(3, 3, Mode::kUnnormalized);
  CHECK(same_terms(cache.horizontal(0, 0), {term(0, 0, 0, 0, 1, 1.0)}));
  CHECK(same_terms(cache.vertical(0, 0), {term(0, 0, 0, 0, 2, 1.0)}));
}

TEST_CASE("cell (1,1) horizontal kernel is A2 A3 B1 + A2 A4 B2") {
  const CoeffCache cache = build_cache(2, 2, Mode::kUnnormalized);
  CHECK(same_terms(cache.horizontal(1, 1),
                   {term(0, 1, 0, 1, 2, 1.0), term(0, 1, 1, 0, 1, 1.0)}));
}

TEST_CASE("first row has no horizontal propagation, first column no vertical") {
  const CoeffCache cache = build_cache(4, 4, Mode::kUnnormalized);
  for (Index j = 1; j < 4; ++j) CHECK(cache.horizontal(0, j).empty());
  for (Index i = 1; i < 4; ++i) CHECK(cache.vertical(i, 0).empty());
  // the surviving edge lists are single-path chains
  CHECK(same_terms(cache.horizontal(2, 0), {term(1, 1, 0, 0, 2, 1.0),
                                            term(2, 0, 0, 0, 1, 1.0)}));
  CHECK(same_terms(cache.vertical(0, 2), {term(0, 0, 0, 2, 2, 1.0),
                                          term(0, 0, 1, 1, 1, 1.0)}));
}

TEST_CASE("term bound, exponent conservation and ordering on an 8x8 grid") {
  for (Mode mode : {Mode::kUnnormalized, Mode::kNormalized}) {
    const CoeffCache cache = build_cache(8, 8, mode);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j)
        for (const auto* terms : {&cache.horizontal(i, j), &cache.vertical(i, j)}) {
          CHECK(static_cast<Index>(terms->size()) <= 2 * cache.max_extent());
          for (std::size_t t = 0; t < terms->size(); ++t) {
            const Monomial& m = (*terms)[t];
            CHECK(m.z[0] + m.z[1] + m.z[2] + m.z[3] == i + j);
            CHECK(m.coeff > 0.0);
            if (t > 0) {
              const Monomial& prev = (*terms)[t - 1];
              CHECK((prev.z < m.z || (prev.z == m.z && prev.b_index < m.b_index)));
            }
          }
        }
  }
}

TEST_CASE("normalized coefficients fold one half per recurrence step") {
  const CoeffCache plain = build_cache(6, 6, Mode::kUnnormalized);
  const CoeffCache normalized = build_cache(6, 6, Mode::kNormalized);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) {
      const auto& a = plain.horizontal(i, j);
      const auto& b = normalized.horizontal(i, j);
      REQUIRE(a.size() == b.size());
      const double fold = std::pow(0.5, static_cast<double>(i + j));
      for (std::size_t t = 0; t < a.size(); ++t)
        CHECK(b[t].coeff == doctest::Approx(a[t].coeff * fold).epsilon(1e-14));
    }
}

TEST_CASE("relaxed caches carry unnormalized single-path edge lists") {
  const CoeffCache cache = build_cache(4, 4, Mode::kNormalizedRelaxed);
  REQUIRE(cache.has_edge_lists());
  // k^h[2,0] = A1^2 B1 + A1 A2 B2 and k^v[2,0] = 0
  CHECK(same_terms(cache.edge_horizontal(2, 0),
                   {term(1, 1, 0, 0, 2, 1.0), term(2, 0, 0, 0, 1, 1.0)}));
  CHECK(cache.edge_vertical(2, 0).empty());
  // k^v[0,2] = A3 A4 B1 + A4^2 B2 and k^h[0,2] = 0
  CHECK(same_terms(cache.edge_vertical(0, 2),
                   {term(0, 0, 0, 2, 2, 1.0), term(0, 0, 1, 1, 1, 1.0)}));
  CHECK(cache.edge_horizontal(0, 2).empty());
  CHECK(same_terms(cache.edge_horizontal(0, 0), {term(0, 0, 0, 0, 1, 1.0)}));
  // interior lists are the normalized ones
  CHECK(cache.horizontal(1, 1).size() == 2);
  CHECK(cache.horizontal(1, 1)[0].coeff == doctest::Approx(0.25));
}

TEST_CASE("cache depends only on extents and mode") {
  const CoeffCache a = build_cache(5, 7, Mode::kNormalized);
  const CoeffCache b = build_cache(5, 7, Mode::kNormalized);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 7; ++j) {
      CHECK(same_terms(a.horizontal(i, j), b.horizontal(i, j)));
      CHECK(same_terms(a.vertical(i, j), b.vertical(i, j)));
    }
}

TEST_CASE("invalid extents are rejected") {
  CHECK_THROWS_AS(build_cache(0, 3, Mode::kNormalized), std::invalid_argument);
  CHECK_THROWS_AS(build_cache(3, -1, Mode::kNormalized), std::invalid_argument);
}
