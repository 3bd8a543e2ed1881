#include <doctest.h>

#include <cmath>
#include <vector>

#include "simart/cutout.hpp"
#include "simart/error.hpp"
#include "simart/model.hpp"
#include "simart/rng.hpp"
#include "simart/snowflake.hpp"
#include "support.hpp"

using namespace simart;

namespace {

IntensitySpec half_ball_intensity(int d) {
  IntensitySpec spec;
  IntensityAtom atom;
  atom.kind = ShapeKind::ball;
  atom.weight = 0.5 / shape_volume(ShapeKind::ball, d, 0);
  spec.atoms = {atom};
  return spec;
}

Domain ball_domain(int d) {
  Domain dom;
  dom.kind = DomainKind::ball;
  dom.d = d;
  return dom;
}

}  // namespace

TEST_SUITE("cutout") {
  TEST_CASE("canonical shape volumes") {
    CHECK(shape_volume(ShapeKind::ball, 1, 0) == doctest::Approx(1.0));
    CHECK(shape_volume(ShapeKind::ball, 2, 0) == doctest::Approx(M_PI / 4.0));
    CHECK(shape_volume(ShapeKind::ball, 3, 0) == doctest::Approx(M_PI / 6.0));
    CHECK(shape_volume(ShapeKind::snowflake, 2, 8) == doctest::Approx(snowflake_area(8)));
    CHECK(shape_volume(ShapeKind::rotated_snowflake, 2, 8) ==
          doctest::Approx(snowflake_area(8)));
  }

  TEST_CASE("intensity weights set the decay exponent") {
    IntensitySpec spec = half_ball_intensity(2);
    spec.validate(2);
    CHECK(alpha_of_intensity(spec, 2) == doctest::Approx(0.5).epsilon(1e-12));

    IntensitySpec empty;
    empty.validate(2);
    CHECK(alpha_of_intensity(empty, 2) == doctest::Approx(0.0));

    IntensitySpec bad;
    IntensityAtom atom;
    atom.kind = ShapeKind::ball;
    atom.weight = -1.0;
    bad.atoms = {atom};
    CHECK_THROWS_AS(bad.validate(2), Error);

    IntensitySpec flake;
    atom.kind = ShapeKind::snowflake;
    atom.weight = 1.0;
    flake.atoms = {atom};
    CHECK_THROWS_AS(flake.validate(1), Error);  // snowflakes are planar
  }

  TEST_CASE("domains answer membership, distance, and volume") {
    Domain ball = ball_domain(2);
    ball.validate();
    CHECK(ball.contains(VecD(0.3, -0.2)));
    CHECK_FALSE(ball.contains(VecD(1.2, 0.0)));
    CHECK(ball.distance(VecD(0.3, -0.2)) == doctest::Approx(0.0));
    CHECK(ball.distance(VecD(2.0, 0.0)) == doctest::Approx(1.0));
    CHECK(ball.volume() == doctest::Approx(M_PI));
    CHECK(ball.bounding_box().lo[0] == doctest::Approx(-1.0));

    Domain flake;
    flake.kind = DomainKind::snowflake;
    flake.d = 2;
    flake.validate();
    CHECK(flake.volume() == doctest::Approx(snowflake_area(flake.snowflake_depth)));
    CHECK(flake.contains(VecD(0.0, 0.0)) == snowflake_contains(VecD(0.0, 0.0), flake.snowflake_depth));
    CHECK(flake.contains(VecD(0.0, 0.49)) ==
          snowflake_contains(VecD(0.0, 0.49), flake.snowflake_depth));

    Domain bad = flake;
    bad.d = 1;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("sampling is reproducible and seed-sensitive") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    CutoutRealization a = sample_cutouts(spec, dom, 6, SeedPath(9001));
    CutoutRealization b = sample_cutouts(spec, dom, 6, SeedPath(9001));
    CutoutRealization c = sample_cutouts(spec, dom, 6, SeedPath(9002));
    REQUIRE(a.cutouts().size() == b.cutouts().size());
    for (std::size_t i = 0; i < a.cutouts().size(); ++i) {
      CHECK(a.cutouts()[i].c[0] == b.cutouts()[i].c[0]);
      CHECK(a.cutouts()[i].s == b.cutouts()[i].s);
    }
    bool differs = a.cutouts().size() != c.cutouts().size();
    for (std::size_t i = 0; !differs && i < a.cutouts().size() && i < c.cutouts().size(); ++i)
      differs = a.cutouts()[i].c[0] != c.cutouts()[i].c[0];
    CHECK(differs);
    CHECK(a.alpha() == doctest::Approx(0.5));
    CHECK(a.depth() == 6);
    CHECK(a.shrink() == doctest::Approx(1.0));
  }

  TEST_CASE("every kept cutout reaches the domain") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    CutoutRealization real = sample_cutouts(spec, dom, 6, SeedPath(9003));
    for (const Cutout& cut : real.cutouts()) {
      CHECK(cut.s > 0.0);
      CHECK(cut.s <= 1.0);
      CHECK(dom.distance(cut.center(2)) <= cut.s / 2.0 + 1e-12);
    }
  }

  TEST_CASE("band counts follow the closed-form means") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    const int depth = 4, reps = 1000;
    std::vector<double> sums(static_cast<std::size_t>(depth), 0.0);
    for (int r = 0; r < reps; ++r) {
      CutoutRealization real = sample_cutouts(spec, dom, depth, SeedPath(41).child(r));
      REQUIRE(real.band_counts().size() == static_cast<std::size_t>(depth));
      for (int b = 0; b < depth; ++b)
        sums[static_cast<std::size_t>(b)] += static_cast<double>(real.band_counts()[b]);
    }
    for (int b = 0; b < depth; ++b) {
      double expected = expected_band_count(spec, dom, b);
      double se = std::sqrt(expected / reps);
      CHECK(std::fabs(sums[static_cast<std::size_t>(b)] / reps - expected) < 3.0 * se);
    }
  }

  TEST_CASE("point survival decays like the advertised power law") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    VecD x(0.3, -0.2);
    const int reps = 4000, n = 4;
    int survived = 0;
    for (int r = 0; r < reps; ++r)
      if (sample_first_cover_level(spec, dom, 8, SeedPath(88).child(r), x) > n) ++survived;
    double law = std::pow(2.0, -0.5 * n);
    double se = std::sqrt(law * (1.0 - law) / reps);
    CHECK(std::fabs(static_cast<double>(survived) / reps - law) < 3.0 * se);
  }

  TEST_CASE("streaming cover levels equal the materialized ones") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    VecD x(0.3, -0.2);
    for (int r = 0; r < 100; ++r) {
      CutoutRealization real = sample_cutouts(spec, dom, 8, SeedPath(77).child(r));
      CHECK(real.first_cover_level(x) == sample_first_cover_level(spec, dom, 8, SeedPath(77).child(r), x));
    }
  }

  TEST_CASE("coverage queries match a brute-force sweep over the cutouts") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    CutoutRealization real = sample_cutouts(spec, dom, 6, SeedPath(9004));
    Stream s(9005);
    for (int i = 0; i < 50; ++i) {
      VecD x = sample_in_ball(s, 2, VecD(0.0, 0.0), 0.95);
      for (int n : {2, 6}) {
        bool brute = false;
        for (const Cutout& cut : real.cutouts()) {
          if (cut.s >= std::pow(2.0, -n) && x.dist(cut.center(2)) <= cut.s / 2.0) brute = true;
        }
        CHECK(real.covered_at(x, n) == brute);
      }
      int level = real.first_cover_level(x);
      for (int n = 1; n <= 6; ++n) CHECK(real.covered_at(x, n) == (level <= n));
    }
  }

  TEST_CASE("density is the survival indicator times the growth factor") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    CutoutRealization real = sample_cutouts(spec, dom, 6, SeedPath(9006));
    auto ev = real.evaluator(4);
    CHECK(ev->dim() == 2);
    CHECK(ev->level() == 4);
    CHECK(ev->growth_bound() == doctest::Approx(std::pow(2.0, 0.5)));
    Stream s(9007);
    for (int i = 0; i < 200; ++i) {
      VecD x(s.next_in(-1.1, 1.1), s.next_in(-1.1, 1.1));
      double expected = 0.0;
      if (dom.contains(x) && !real.covered_at(x, 4)) expected = std::pow(2.0, 0.5 * 4);
      CHECK(real.density(x, 4) == doctest::Approx(expected));
      CHECK((*ev)(x) == doctest::Approx(expected));
      CHECK(evaluate_cutout_density(real, x, 4) == doctest::Approx(expected));
    }
  }

  TEST_CASE("serialization round-trips the realization") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    CutoutRealization real = sample_cutouts(spec, dom, 5, SeedPath(9008));
    CutoutRealization back = CutoutRealization::from_json(real.to_json());
    REQUIRE(back.cutouts().size() == real.cutouts().size());
    CHECK(back.alpha() == doctest::Approx(real.alpha()));
    CHECK(back.depth() == real.depth());
    Stream s(9009);
    for (int i = 0; i < 100; ++i) {
      VecD x(s.next_in(-1.0, 1.0), s.next_in(-1.0, 1.0));
      CHECK(back.density(x, 5) == real.density(x, 5));
    }
    // The generic wrapper sniffs the leading byte.
    Realization wrapped = Realization::deserialize(real.to_json());
    REQUIRE(wrapped.cutout() != nullptr);
    CHECK(wrapped.cutout()->cutouts().size() == real.cutouts().size());
  }

  TEST_CASE("inner approximations shrink shapes and scale the exponent") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    CutoutRealization real = sample_cutouts(spec, dom, 4, SeedPath(42));
    CutoutRealization inner = real.inner_approximation(0.3);
    CHECK(inner.alpha() == doctest::Approx(0.7 * real.alpha()));
    CHECK(inner.shrink() == doctest::Approx(std::sqrt(0.7)));
    CHECK(inner.cutouts().size() == real.cutouts().size());
    Stream s(9010);
    for (int i = 0; i < 300; ++i) {
      VecD x = sample_in_ball(s, 2, VecD(0.0, 0.0), 1.0);
      // Shrunken cutouts cover less, so survival only grows.
      if (real.density(x, 4) > 0.0) CHECK(inner.density(x, 4) > 0.0);
    }
  }

  TEST_CASE("expected point budgets abort oversized requests") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    SampleOptions opts;
    opts.max_expected_count = 100.0;
    CHECK_THROWS_AS(sample_cutouts(spec, dom, 8, SeedPath(1), opts), Error);
    try {
      sample_cutouts(spec, dom, 8, SeedPath(1), opts);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::resource);
    }
  }

  TEST_CASE("cover grids agree with per-point streaming") {
    IntensitySpec spec = half_ball_intensity(2);
    Domain dom = ball_domain(2);
    CutoutRealization real = sample_cutouts(spec, dom, 4, SeedPath(9011));
    CoverGrid grid = sample_cover_grid(spec, dom, 4, SeedPath(9011), 64);
    CHECK(grid.cells_per_axis == 64);
    CHECK(grid.depth == 4);
    Stream s(9012);
    for (int i = 0; i < 60; ++i) {
      int ix = static_cast<int>(s.next_below(64));
      int iy = static_cast<int>(s.next_below(64));
      VecD center(grid.origin[0] + (ix + 0.5) * grid.h, grid.origin[1] + (iy + 0.5) * grid.h);
      int expected = dom.contains(center) ? real.first_cover_level(center) : 0;
      CHECK(static_cast<int>(grid.level[grid.index(ix, iy)]) == expected);
    }
    // Bounding-box corners of the ball domain sit outside it.
    CHECK(static_cast<int>(grid.level[grid.index(0, 0)]) == 0);
    CHECK(static_cast<int>(grid.level[grid.index(63, 63)]) == 0);
  }
}
