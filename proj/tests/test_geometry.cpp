#include <doctest.h>

#include "oracles.hpp"
#include "pvparam/error.hpp"
#include "pvparam/geometry.hpp"
#include "test_util.hpp"

using namespace pvparam;

TEST_CASE("normalize reorients rings and recomputes area") {
  ArrayPolygon p;
  p.exterior = {{0, 0}, {0, 2}, {3, 2}, {3, 0}};  // clockwise
  p.holes = {{{1, 0.5}, {2, 0.5}, {2, 1.5}, {1, 1.5}}};  // counterclockwise
  normalize(p);
  CHECK(signed_ring_area(p.exterior) > 0.0);
  CHECK(signed_ring_area(p.holes[0]) < 0.0);
  CHECK(p.area_m2 == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("normalize drops repeated and collinear vertices") {
  ArrayPolygon p;
  p.exterior = {{0, 0}, {1, 0}, {1, 0}, {2, 0}, {2, 2}, {0, 2}};
  normalize(p);
  CHECK(p.exterior.size() == 4);
}

TEST_CASE("normalize rejects degenerate exteriors") {
  ArrayPolygon p;
  p.exterior = {{0, 0}, {1, 1}, {2, 2}};
  CHECK_THROWS_AS(normalize(p), GeometryError);
}

TEST_CASE("contains_point is boundary inclusive and honours holes") {
  const auto p = testutil::polygon({{0, 0}, {4, 0}, {4, 4}, {0, 4}}, {{{1, 1}, {1, 3}, {3, 3}, {3, 1}}});
  CHECK(contains_point(p, {0.5, 0.5}));
  CHECK(contains_point(p, {4.0, 2.0}));
  CHECK_FALSE(contains_point(p, {2.0, 2.0}));
  CHECK(contains_point(p, {1.0, 2.0}));
  CHECK_FALSE(contains_point(p, {5.0, 2.0}));
}

TEST_CASE("boolean operations on overlapping squares") {
  const auto a = to_multi(testutil::rect(0, 0, 2, 2));
  const auto b = to_multi(testutil::rect(1, 0, 3, 2));
  CHECK(area(intersection(a, b)) == doctest::Approx(2.0));
  CHECK(area(unite(a, b)) == doctest::Approx(6.0));
  CHECK(area(difference(a, b)) == doctest::Approx(2.0));
}

TEST_CASE("from_multi splits parts and filters by area") {
  geom::MultiPolygon m = unite(to_multi(testutil::rect(0, 0, 1, 1)), to_multi(testutil::rect(5, 5, 5.1, 5.1)));
  CHECK(from_multi(m, "crs").size() == 2);
  const auto big = from_multi(m, "crs", 0.5);
  REQUIRE(big.size() == 1);
  CHECK(big[0].area_m2 == doctest::Approx(1.0));
  CHECK(big[0].crs_id == "crs");
}

TEST_CASE("point_segment_distance") {
  CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(point_segment_distance({3, 4}, {0, 0}, {0, 0}) == doctest::Approx(5.0));
  CHECK(point_segment_distance({2, 1}, {-1, 0}, {1, 0}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("area agrees with an independent shoelace sum on random stars") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto ring = oracle::random_star(rng);
    const auto p = testutil::polygon(ring);
    CHECK(p.area_m2 == doctest::Approx(std::abs(oracle::ring_area(ring))).epsilon(1e-9));
    CHECK(area(to_multi(p)) == doctest::Approx(p.area_m2).epsilon(1e-9));
  }
}
