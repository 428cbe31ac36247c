#include "doctest.h"

#include <cmath>
#include <random>

#include "coarsepoint/core.hpp"
#include "coarsepoint/error.hpp"

using namespace coarsepoint;

TEST_CASE("point_box_distance worked examples") {
  const BBox b{10, 10, 4, 8};
  CHECK(point_box_distance({10, 10}, b) == 0.0);
  CHECK(point_box_distance({12, 10}, b) == 1.0);
  CHECK(point_box_distance({13, 10}, b) == 1.5);
  CHECK(point_box_distance({10, 14}, b) == 1.0);
}

TEST_CASE("distance <= 1 is closed-box membership on a rational grid") {
  const BBox b{10, 10, 4, 8};
  // Quarter-pixel grid around the box; every value is exactly representable.
  for (int i = -40; i <= 120; ++i) {
    for (int j = -40; j <= 120; ++j) {
      const Point2 p{i * 0.25, j * 0.25};
      const bool inside = p.x >= 8 && p.x <= 12 && p.y >= 6 && p.y <= 14;
      REQUIRE((point_box_distance(p, b) <= 1.0) == inside);
    }
  }
}

TEST_CASE("rel_coords worked examples") {
  const BBox b{10, 10, 4, 8};
  CHECK(rel_coords({10, 10}, b) == RelPoint{0, 0});
  CHECK(rel_coords({12, 10}, b) == RelPoint{0.5, 0});
  CHECK(rel_coords({9, 6}, b) == RelPoint{-0.25, -0.5});
}

TEST_CASE("rel_coords and abs_coords are inverse") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-500, 500), ext(0.5, 200);
  for (int i = 0; i < 10000; ++i) {
    const BBox b{pos(rng), pos(rng), ext(rng), ext(rng)};
    const Point2 p{pos(rng), pos(rng)};
    const Point2 back = abs_coords(rel_coords(p, b), b);
    REQUIRE(std::abs(back.x - p.x) <= 1e-9);
    REQUIRE(std::abs(back.y - p.y) <= 1e-9);
  }
}

TEST_CASE("scale buckets") {
  CHECK(scale_bucket({0, 0, 10, 10}).bucket == ScaleBucket::tiny);
  CHECK(scale_bucket({0, 0, 32, 32}).bucket == ScaleBucket::normal);
  CHECK(scale_bucket({0, 0, 25, 25}).bucket == ScaleBucket::small);
  CHECK(scale_bucket({0, 0, 20, 20}).bucket == ScaleBucket::small);
  CHECK(scale_bucket({0, 0, 2, 2}).bucket == ScaleBucket::tiny);
  CHECK_FALSE(scale_bucket({0, 0, 2, 2}).below_range);

  SUBCASE("sizes below 2 are tiny but flagged") {
    const auto a = scale_bucket({0, 0, 1, 1});
    CHECK(a.bucket == ScaleBucket::tiny);
    CHECK(a.below_range);
  }
  SUBCASE("size uses the geometric mean") {
    CHECK(scale_bucket({0, 0, 10, 40}).bucket == ScaleBucket::small);  // sqrt(400) = 20
  }
  SUBCASE("tiny, small and normal partition sizes >= 2") {
    for (double s = 2.0; s < 100.0; s += 0.125) {
      const BBox b{0, 0, s, s};
      const int hits = in_bucket(b, ScaleBucket::tiny) + in_bucket(b, ScaleBucket::small) +
                       in_bucket(b, ScaleBucket::normal);
      REQUIRE(hits == 1);
      REQUIRE(in_bucket(b, ScaleBucket::all));
    }
  }
}

TEST_CASE("bucket names round-trip") {
  for (auto b : {ScaleBucket::tiny, ScaleBucket::small, ScaleBucket::normal, ScaleBucket::all}) {
    CHECK(parse_scale_bucket(to_string(b)) == b);
  }
  CHECK_THROWS_AS(parse_scale_bucket("huge"), ParameterError);
}

TEST_CASE("box and scene validation") {
  CHECK_THROWS_AS(validate(BBox{0, 0, 0, 1}), ParameterError);
  CHECK_THROWS_AS(validate(BBox{0, 0, 1, -1}), ParameterError);
  CHECK_THROWS_AS(validate(BBox{NAN, 0, 1, 1}), ParameterError);
  CHECK_NOTHROW(validate(BBox{0, 0, 1, 1}));

  Scene s{"a", 100, 100, {{0, {50, 50, 10, 10}}, {1, {5, 5, 10, 10}}}};
  CHECK_NOTHROW(validate(s));
  s.objects[1].object_index = 0;
  CHECK_THROWS_AS(validate(s), DataError);
  s.objects[1] = {1, {2, 5, 10, 10}};
  CHECK_THROWS_AS(validate(s), DataError);
}
