#include <doctest.h>

#include <cmath>
#include <string>

#include "simart/error.hpp"
#include "simart/model.hpp"
#include "support.hpp"

using namespace simart;

namespace {

void expect_validation(const ModelSpec& spec, const char* fragment) {
  try {
    spec.validate();
    FAIL("expected a validation error containing: ", fragment);
  } catch (const Error& e) {
    CHECK(e.kind == ErrorKind::validation);
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("specs reject out-of-range parameters with clear messages") {
    ModelSpec perc = testsupport::percolation_model(2, 0.0, 4);
    expect_validation(perc, "p must lie in (0, 1]");
    perc.p = 1.5;
    expect_validation(perc, "p must lie in (0, 1]");
    perc.p = 0.5;
    perc.depth = 11;
    expect_validation(perc, "need depth * d <= 20");

    ModelSpec salem = testsupport::salem_model(0.6, 14);
    salem.d = 2;
    expect_validation(salem, "salem_line requires d = 1");
    salem.d = 1;
    salem.depth = 60;
    expect_validation(salem, "out of range [0, 59]");
    salem.depth = 14;
    salem.alpha0 = 0.0;
    expect_validation(salem, "alpha0 must lie in (0, 1]");

    ModelSpec casc;
    casc.kind = ModelSpec::Kind::cascade;
    casc.d = 2;
    casc.depth = 5;
    casc.law.atoms = {{0.0, 0.5}, {1.0, 0.5}};
    casc.law.bound = 1.0;
    expect_validation(casc, "mean must equal 1");

    ModelSpec cut = testsupport::ball_cutout_model(0.5, 4);
    cut.domain.d = 1;
    expect_validation(cut, "domain dimension mismatch");
    cut.domain.d = 2;
    cut.depth = 255;
    expect_validation(cut, "cutout depth out of range [0, 254]");
  }

  TEST_CASE("decay exponents follow the survival probabilities") {
    CHECK(testsupport::percolation_model(2, 0.7, 6).alpha() ==
          doctest::Approx(-std::log2(0.7)).epsilon(1e-12));
    CHECK(testsupport::percolation_model(2, 1.0, 6).alpha() == doctest::Approx(0.0));

    ModelSpec casc;
    casc.kind = ModelSpec::Kind::cascade;
    casc.d = 2;
    casc.depth = 5;
    casc.law.atoms = {{0.0, 0.4}, {5.0 / 3.0, 0.6}};
    casc.law.bound = 5.0 / 3.0;
    casc.validate();
    CHECK(casc.alpha() == doctest::Approx(-std::log2(0.6)).epsilon(1e-12));

    CHECK(testsupport::salem_model(0.6, 14).alpha() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(testsupport::ball_cutout_model(0.5, 6).alpha() == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("growth bounds match the one-step weight ceiling") {
    CHECK(testsupport::percolation_model(2, 0.7, 6).growth_bound() ==
          doctest::Approx(1.0 / 0.7));
    ModelSpec casc;
    casc.kind = ModelSpec::Kind::cascade;
    casc.d = 2;
    casc.depth = 5;
    casc.law.atoms = {{0.0, 0.4}, {5.0 / 3.0, 0.6}};
    casc.law.bound = 5.0 / 3.0;
    CHECK(casc.growth_bound() == doctest::Approx(5.0 / 3.0));
    CHECK(testsupport::salem_model(0.6, 14).growth_bound() == doctest::Approx(2.0));
    CHECK(testsupport::ball_cutout_model(0.5, 6).growth_bound() ==
          doctest::Approx(std::exp2(0.5)));
  }

  TEST_CASE("model specs round-trip through JSON") {
    ModelSpec cut = testsupport::ball_cutout_model(0.5, 6);
    ModelSpec perc = testsupport::percolation_model(2, 0.7, 6);
    ModelSpec salem = testsupport::salem_model(0.6, 12);
    ModelSpec casc;
    casc.kind = ModelSpec::Kind::cascade;
    casc.d = 2;
    casc.depth = 5;
    casc.law.atoms = {{0.0, 0.4}, {5.0 / 3.0, 0.6}};
    casc.law.bound = 5.0 / 3.0;

    for (const ModelSpec& spec : {cut, perc, salem, casc}) {
      std::string text = spec.to_json();
      ModelSpec back = ModelSpec::from_json(text);
      CHECK(back.kind == spec.kind);
      CHECK(back.d == spec.d);
      CHECK(back.depth == spec.depth);
      CHECK(back.alpha() == doctest::Approx(spec.alpha()).epsilon(1e-12));
      CHECK(back.growth_bound() == doctest::Approx(spec.growth_bound()).epsilon(1e-12));
      CHECK(back.to_json() == text);
    }
  }

  TEST_CASE("json parsing names unknown keys and kinds") {
    try {
      ModelSpec::from_json(R"({"kind":"percolation","d":2,"depth":4,"p":0.5,"bogus":1})");
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::validation);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(ModelSpec::from_json(R"({"kind":"mystery","d":2,"depth":4})"), Error);
    CHECK_THROWS_AS(ModelSpec::from_json("not json at all"), Error);
    CHECK_THROWS_AS(ModelSpec::from_json(R"({"kind":"percolation","d":2,"depth":4})"), Error);
  }

  TEST_CASE("family specs parse all three kinds") {
    FamilySpec plane = FamilySpec::from_json(
        R"({"id":"hline","kind":"plane","regime":"limit",
            "point":[0.0,0.2],"basis":[[1.0,0.0]]})");
    CHECK(plane.id == "hline");
    CHECK(plane.regime == RegimeTag::limit);
    REQUIRE(plane.plane() != nullptr);
    CHECK(plane.plane()->k() == 1);
    CHECK(plane.frostman_exponent() == doctest::Approx(1.0));
    CHECK(std::string(plane.kind_name()) == "plane");

    FamilySpec curve = FamilySpec::from_json(
        R"({"id":"circle","kind":"curve","regime":"growth",
            "coeffs":[-0.25,0,0,1,0,1],"clip_radius":1.5})");
    CHECK(curve.regime == RegimeTag::growth);
    REQUIRE(curve.curve() != nullptr);
    CHECK(curve.curve()->clip_radius == doctest::Approx(1.5));
    CHECK(curve.curve()->degree() == 2);

    FamilySpec ifs = FamilySpec::from_json(
        R"({"id":"cantor","kind":"ifs","d":1,
            "maps":[{"ratio":0.3333333333333333,"translate":[0.0]},
                    {"ratio":0.3333333333333333,"translate":[0.6666666666666666]}],
            "probs":"natural"})");
    REQUIRE(ifs.ifs() != nullptr);
    CHECK(ifs.ifs()->natural);
    CHECK(ifs.ifs()->sim_dim ==
          doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-9));
    CHECK(ifs.regime == RegimeTag::limit);  // the default

    try {
      FamilySpec::from_json(
          R"({"id":"x","kind":"plane","regime":"sideways",
              "point":[0.0,0.2],"basis":[[1.0,0.0]]})");
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("'limit' or 'growth'") != std::string::npos);
    }
  }

  TEST_CASE("realizations wrap both representations uniformly") {
    SeedPath seed(2026);
    for (int variant = 0; variant < 4; ++variant) {
      ModelSpec spec;
      switch (variant) {
        case 0: spec = testsupport::ball_cutout_model(0.5, 5); break;
        case 1: spec = testsupport::percolation_model(2, 0.7, 5); break;
        case 2:
          spec.kind = ModelSpec::Kind::cascade;
          spec.d = 2;
          spec.depth = 5;
          spec.law.atoms = {{0.0, 0.4}, {5.0 / 3.0, 0.6}};
          spec.law.bound = 5.0 / 3.0;
          break;
        default: spec = testsupport::salem_model(0.6, 10); break;
      }
      Realization real = Realization::make(spec, seed.child(variant));
      CHECK_FALSE(real.empty());
      CHECK(real.dim() == spec.d);
      CHECK(real.depth() == spec.depth);
      CHECK(real.alpha() == doctest::Approx(spec.alpha()).epsilon(1e-12));
      CHECK(real.growth_bound() == doctest::Approx(spec.growth_bound()).epsilon(1e-12));
      if (variant == 0) {
        CHECK(real.cutout() != nullptr);
        CHECK(real.support_box().contains(VecD(0.0, 0.0)));
      } else {
        CHECK(real.subdivision() != nullptr);
        CHECK(real.support_box().volume() == doctest::Approx(1.0));
      }

      Realization back = Realization::deserialize(real.serialize());
      CHECK(back.serialize() == real.serialize());
      Stream probe(3000 + variant);
      const Box box = real.support_box();
      for (int i = 0; i < 50; ++i) {
        VecD x = sample_in_box(probe, box);
        CHECK(back.density(x, spec.depth) == doctest::Approx(real.density(x, spec.depth)));
      }
      auto ev = real.evaluator(spec.depth);
      CHECK(ev->level() == spec.depth);
      CHECK(ev->growth_bound() == doctest::Approx(spec.growth_bound()));
    }
  }
}
