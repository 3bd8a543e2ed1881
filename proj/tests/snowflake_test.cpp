#include <doctest.h>

#include <cmath>

#include "simart/geometry.hpp"
#include "simart/rng.hpp"
#include "simart/snowflake.hpp"

using namespace simart;

namespace {

// Independent closed form: triangle area A0 with circumradius 1/2, plus the
// classical bump series A0 * (3/5) * (1 - (4/9)^q).
double series_area(int q) {
  double a0 = 3.0 * std::sqrt(3.0) / 16.0;
  return a0 * (1.0 + 0.6 * (1.0 - std::pow(4.0 / 9.0, q)));
}

}  // namespace

TEST_SUITE("snowflake") {
  TEST_CASE("area follows the bump series") {
    for (int q : {0, 1, 2, 3, 8, 12}) {
      CHECK(snowflake_area(q) == doctest::Approx(series_area(q)).epsilon(1e-12));
    }
    // Monotone increasing, bounded by the 8/5 limit.
    double limit = 1.6 * 3.0 * std::sqrt(3.0) / 16.0;
    for (int q = 0; q < 12; ++q) {
      CHECK(snowflake_area(q + 1) > snowflake_area(q));
      CHECK(snowflake_area(q) < limit);
    }
  }

  TEST_CASE("membership grid reproduces the closed-form area") {
    Box bb = snowflake_bounding_box();
    const int n = 1200;
    double hx = (bb.hi[0] - bb.lo[0]) / n;
    double hy = (bb.hi[1] - bb.lo[1]) / n;
    long hits = 0;
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        VecD p(bb.lo[0] + (ix + 0.5) * hx, bb.lo[1] + (iy + 0.5) * hy);
        if (snowflake_contains(p, 2)) ++hits;
      }
    }
    CHECK(hits * hx * hy == doctest::Approx(snowflake_area(2)).epsilon(5e-3));
  }

  TEST_CASE("membership matches the normalized frame") {
    // Top vertex of the base triangle.
    CHECK(snowflake_contains(VecD(0.0, 0.4999), 0));
    CHECK(snowflake_contains(VecD(0.0, 0.4999), 3));
    // The bottom bump apex only appears from depth 1 on.
    CHECK_FALSE(snowflake_contains(VecD(0.0, -0.4999), 0));
    CHECK(snowflake_contains(VecD(0.0, -0.4999), 1));
    CHECK(snowflake_contains(VecD(0.0, -0.4999), 2));
    CHECK(snowflake_contains(VecD(0.0, 0.0), 0));
    CHECK_FALSE(snowflake_contains(VecD(0.6, 0.0), 4));
  }

  TEST_CASE("the region grows with depth and stays in the half ball") {
    Stream s(77);
    for (int i = 0; i < 4000; ++i) {
      VecD p(s.next_in(-0.55, 0.55), s.next_in(-0.55, 0.55));
      for (int q = 0; q < 3; ++q) {
        if (snowflake_contains(p, q)) CHECK(snowflake_contains(p, q + 1));
      }
      if (snowflake_contains(p, 3)) CHECK(p.norm() <= 0.5 + 1e-9);
    }
  }

  TEST_CASE("distance vanishes exactly on the region") {
    Stream s(78);
    for (int i = 0; i < 1500; ++i) {
      VecD p(s.next_in(-0.7, 0.7), s.next_in(-0.7, 0.7));
      double dist = snowflake_distance(p, 2);
      if (snowflake_contains(p, 2)) {
        CHECK(dist == 0.0);
      } else {
        CHECK(dist > 0.0);
        CHECK(dist <= p.norm() + 1e-9);  // the origin is inside
      }
    }
    double d = snowflake_distance(VecD(0.6, 0.0), 2);
    CHECK(d >= 0.1 - 1e-9);  // everything lives in the radius 1/2 ball
    CHECK(d <= 0.6);
  }

  TEST_CASE("distance is 1-Lipschitz") {
    Stream s(79);
    for (int i = 0; i < 800; ++i) {
      VecD a(s.next_in(-0.7, 0.7), s.next_in(-0.7, 0.7));
      VecD b(s.next_in(-0.7, 0.7), s.next_in(-0.7, 0.7));
      CHECK(std::fabs(snowflake_distance(a, 2) - snowflake_distance(b, 2)) <=
            a.dist(b) + 1e-9);
    }
  }

  TEST_CASE("bounding box is tight for the normalized frame") {
    Box bb = snowflake_bounding_box();
    CHECK(bb.hi[1] == doctest::Approx(0.5));
    CHECK(bb.lo[1] == doctest::Approx(-0.5));
    CHECK(bb.hi[0] == doctest::Approx(std::sqrt(3.0) / 4.0));
    CHECK(bb.lo[0] == doctest::Approx(-std::sqrt(3.0) / 4.0));
    Stream s(80);
    for (int i = 0; i < 4000; ++i) {
      VecD p(s.next_in(-0.55, 0.55), s.next_in(-0.55, 0.55));
      if (snowflake_contains(p, 4)) {
        CHECK(p[0] >= bb.lo[0] - 1e-9);
        CHECK(p[0] <= bb.hi[0] + 1e-9);
        CHECK(p[1] >= bb.lo[1] - 1e-9);
        CHECK(p[1] <= bb.hi[1] + 1e-9);
      }
    }
  }
}
