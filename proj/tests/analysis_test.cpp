#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "simart/analysis.hpp"
#include "simart/error.hpp"
#include "simart/fit.hpp"
#include "simart/model.hpp"
#include "support.hpp"

using namespace simart;

namespace {

// Occupied dyadic intervals of the middle-thirds set at level m, counted
// through interval endpoints that are themselves in the set: a dyadic cell
// meets the set iff a canonical witness point does, checked with exact
// ternary arithmetic on cylinder endpoints of width below the cell width.
std::uint64_t cantor_boxes(int m, int ternary_level) {
  // Cylinder endpoints at ternary level L enumerate all points with ternary
  // digits in {0,2} up to level L, each extended by zeros (left endpoint of a
  // cylinder, itself in the set).
  std::uint64_t count = 0;
  std::vector<bool> occupied(std::size_t(1) << m, false);
  std::uint64_t words = std::uint64_t(1) << ternary_level;
  for (std::uint64_t w = 0; w < words; ++w) {
    double x = 0.0, scale = 1.0;
    for (int j = 0; j < ternary_level; ++j) {
      scale /= 3.0;
      if ((w >> j) & 1) x += 2.0 * scale;
    }
    auto cell = static_cast<std::size_t>(std::floor(x * std::exp2(m)));
    if (cell >= occupied.size()) cell = occupied.size() - 1;
    occupied[cell] = true;
  }
  for (bool b : occupied)
    if (b) ++count;
  return count;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("uniform grids have integer box dimension") {
    std::vector<std::uint64_t> counts;
    for (int m = 0; m <= 8; ++m) counts.push_back(std::uint64_t(1) << (2 * m));
    DimensionFit fit = box_dimension(counts);
    CHECK(fit.kind == DimensionKind::box);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.slope_stderr == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit.level_lo == 0);
    CHECK(fit.level_hi == 8);
    REQUIRE(fit.per_level.size() == 9);
    CHECK(fit.per_level[3] == doctest::Approx(6.0));
  }

  TEST_CASE("middle-thirds box counts match the witness enumeration") {
    std::vector<std::uint64_t> pinned = {1, 2, 4, 6, 10, 16, 28, 42, 70, 102, 154, 240, 362};
    std::vector<std::uint64_t> counts;
    for (int m = 0; m <= 12; ++m) {
      // Width 3^-L below 2^-m guarantees every occupied dyadic cell holds a
      // witness endpoint.
      int L = static_cast<int>(std::ceil(m * std::log(2.0) / std::log(3.0))) + 2;
      counts.push_back(cantor_boxes(m, L));
    }
    for (std::size_t i = 0; i < pinned.size(); ++i) CHECK(counts[i] == pinned[i]);

    DimensionFit fit = box_dimension(counts, 3, 12);
    std::vector<double> xs, ys;
    for (int m = 3; m <= 12; ++m) {
      xs.push_back(m);
      ys.push_back(std::log2(static_cast<double>(counts[static_cast<std::size_t>(m)])));
    }
    LinearFit check = fit_line(xs, ys);
    CHECK(fit.slope == doctest::Approx(check.slope).epsilon(1e-9));
    CHECK(fit.slope_stderr == doctest::Approx(check.slope_stderr).epsilon(1e-9));
    CHECK(fit.slope > 0.58);
    CHECK(fit.slope < 0.68);
  }

  TEST_CASE("dimension fits need at least four populated levels") {
    std::vector<std::uint64_t> three = {1, 2, 4};
    CHECK_THROWS_AS(box_dimension(three), Error);
    std::vector<std::uint64_t> sparse = {1, 2, 0, 0, 0, 0};
    CHECK_THROWS_AS(box_dimension(sparse), Error);
  }

  TEST_CASE("tree cell counts are read off exactly") {
    Realization full =
        Realization::make(testsupport::percolation_model(2, 1.0, 6), SeedPath(1));
    std::vector<std::uint64_t> counts = occupied_cell_counts(full, 6);
    REQUIRE(counts.size() == 7);
    for (int m = 0; m <= 6; ++m) CHECK(counts[static_cast<std::size_t>(m)] ==
                                       std::uint64_t(1) << (2 * m));

    Realization perc =
        Realization::make(testsupport::percolation_model(2, 0.7, 7), SeedPath(2));
    std::vector<std::uint64_t> perc_counts = occupied_cell_counts(perc, 7);
    for (int m = 0; m <= 7; ++m)
      CHECK(perc_counts[static_cast<std::size_t>(m)] == perc.subdivision()->cell_count(m));

    Realization salem = Realization::make(testsupport::salem_model(0.6, 12), SeedPath(3));
    std::vector<std::uint64_t> salem_counts = occupied_cell_counts(salem, 12);
    SalemLineSpec spec = SalemLineSpec::make(0.6, 12);
    for (int m = 0; m <= 12; ++m)
      CHECK(salem_counts[static_cast<std::size_t>(m)] ==
            static_cast<std::uint64_t>(spec.cell_count[static_cast<std::size_t>(m)]));
  }

  TEST_CASE("cutout occupancy agrees with a direct lattice sweep") {
    Realization balls =
        Realization::make(testsupport::ball_cutout_model(0.5, 5), SeedPath(4));
    const int max_level = 6;
    std::vector<std::uint64_t> counts = occupied_cell_counts(balls, max_level);
    REQUIRE(counts.size() == static_cast<std::size_t>(max_level) + 1);

    const CutoutRealization& real = *balls.cutout();
    const Box box = balls.support_box();
    const int res = 1 << max_level;
    for (int m = 0; m <= max_level; ++m) {
      std::vector<bool> occ(std::size_t(1) << (2 * m), false);
      for (int iy = 0; iy < res; ++iy) {
        for (int ix = 0; ix < res; ++ix) {
          VecD x(box.lo[0] + (ix + 0.5) * (box.hi[0] - box.lo[0]) / res,
                 box.lo[1] + (iy + 0.5) * (box.hi[1] - box.lo[1]) / res);
          if (real.covered_at(x, 5) || !real.domain().contains(x)) continue;
          int cx = ix >> (max_level - m);
          int cy = iy >> (max_level - m);
          occ[(std::size_t(cy) << m) | std::size_t(cx)] = true;
        }
      }
      std::uint64_t direct = 0;
      for (bool b : occ)
        if (b) ++direct;
      CHECK(counts[static_cast<std::size_t>(m)] == direct);
    }
  }

  TEST_CASE("lattice occupancy stops at the cell budget") {
    Realization balls =
        Realization::make(testsupport::ball_cutout_model(0.5, 4), SeedPath(5));
    try {
      occupied_cell_counts(balls, 13);
      FAIL("expected a resource error");
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::resource);
    }
  }

  TEST_CASE("correlation dimension of flat and atomic masses") {
    std::vector<std::vector<double>> flat;
    for (int m = 0; m <= 6; ++m)
      flat.emplace_back(std::size_t(1) << m, std::exp2(static_cast<double>(-m)));
    DimensionFit lebesgue = correlation_dimension(flat);
    CHECK(lebesgue.kind == DimensionKind::correlation);
    CHECK(lebesgue.slope == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<std::vector<double>> atom(7, std::vector<double>{1.0});
    CHECK(correlation_dimension(atom).slope == doctest::Approx(0.0).epsilon(1e-12));

    // Masses are normalized per level, so a global rescaling changes nothing.
    std::vector<std::vector<double>> scaled = flat;
    for (auto& level : scaled)
      for (double& v : level) v *= 7.25;
    CHECK(correlation_dimension(scaled).slope == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("the two estimators agree on an exact-mass tree") {
    Realization salem = Realization::make(testsupport::salem_model(0.6, 14), SeedPath(6));
    const SubdivisionTree& tree = *salem.subdivision();
    std::vector<std::uint64_t> counts;
    std::vector<std::vector<double>> masses;
    for (int m = 0; m <= 14; ++m) {
      counts.push_back(tree.cell_count(m));
      std::vector<double> level;
      for (std::size_t i = 0; i < tree.level(m).index.size(); ++i)
        level.push_back(tree.level(m).beta[i] * std::exp2(static_cast<double>(-m)));
      masses.push_back(std::move(level));
    }
    DimensionFit box = box_dimension(counts, 4, 14);
    DimensionFit corr = correlation_dimension(masses, 4, 14);
    // Every surviving cell carries the same mass, so the participation sum is
    // exactly 1/count and the two statistics coincide level by level.
    for (int m = 4; m <= 14; ++m) {
      CHECK(corr.per_level[static_cast<std::size_t>(m)] ==
            doctest::Approx(std::log2(static_cast<double>(
                counts[static_cast<std::size_t>(m)]))).epsilon(1e-9));
    }
    CHECK(corr.slope == doctest::Approx(box.slope).epsilon(1e-9));
  }

  TEST_CASE("density rasters integrate to the level mass") {
    Realization perc =
        Realization::make(testsupport::percolation_model(2, 0.7, 5), SeedPath(7));
    Raster field = rasterize_density(perc, 5, 64);
    CHECK(field.d == 2);
    CHECK(field.shape[0] == 64);
    CHECK(field.total_mass() ==
          doctest::Approx(perc.subdivision()->total_mass(5)).epsilon(1e-9));
    for (int iy = 0; iy < 64; iy += 17) {
      for (int ix = 0; ix < 64; ix += 17) {
        VecD center(field.origin[0] + (ix + 0.5) * field.h,
                    field.origin[1] + (iy + 0.5) * field.h);
        CHECK(field.at(ix, iy) == doctest::Approx(perc.density(center, 5)));
      }
    }

    Realization balls =
        Realization::make(testsupport::ball_cutout_model(0.5, 4), SeedPath(8));
    Raster cut_field = rasterize_density(balls, 4, 128);
    double direct = 0.0;
    for (int iy = 0; iy < 128; ++iy)
      for (int ix = 0; ix < 128; ++ix) {
        VecD center(cut_field.origin[0] + (ix + 0.5) * cut_field.h,
                    cut_field.origin[1] + (iy + 0.5) * cut_field.h);
        direct += balls.density(center, 4) * cut_field.cell_volume();
      }
    CHECK(cut_field.total_mass() == doctest::Approx(direct).epsilon(1e-12));
  }

  TEST_CASE("a full tree never exceeds its thresholds") {
    ModelSpec spec = testsupport::percolation_model(2, 1.0, 5);
    FamilySpec fam = testsupport::line_family(VecD(0.0, 0.2), VecD(1.0, 0.0));
    TailAudit audit =
        increment_tail_audit(spec, fam, 3, {0.25, 0.5, 1.0}, 200, SeedPath(9));
    CHECK(audit.level == 3);
    CHECK(audit.replicates == 200);
    REQUIRE(audit.frequencies.size() == 3);
    for (double f : audit.frequencies) CHECK(f == 0.0);
    for (std::uint64_t c : audit.exceed_counts) CHECK(c == 0);
    CHECK_FALSE(audit.decay_fitted);
  }

  TEST_CASE("exceedance frequencies fall with the threshold") {
    ModelSpec spec = testsupport::percolation_model(2, 0.8, 6);
    FamilySpec fam = testsupport::line_family(VecD(0.0, 0.2), VecD(1.0, 0.0));
    TailAudit audit =
        increment_tail_audit(spec, fam, 3, {0.25, 0.5, 1.0, 2.0}, 600, SeedPath(10));
    REQUIRE(audit.frequencies.size() == 4);
    for (std::size_t i = 0; i + 1 < audit.frequencies.size(); ++i)
      CHECK(audit.frequencies[i] >= audit.frequencies[i + 1]);
    CHECK(audit.frequencies[0] > 0.0);
    CHECK(audit.exceed_counts[0] > 0);

    TailAudit again =
        increment_tail_audit(spec, fam, 3, {0.25, 0.5, 1.0, 2.0}, 600, SeedPath(10));
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(again.exceed_counts[i] == audit.exceed_counts[i]);
  }

  TEST_CASE("deep cutout thresholds are hit only by small kappas") {
    ModelSpec spec = testsupport::ball_cutout_model(0.5, 7);
    FamilySpec fam = testsupport::line_family(VecD(0.0, 0.2), VecD(1.0, 0.0));
    TailAudit audit = increment_tail_audit(spec, fam, 6, {0.25, 0.5, 1.0, 2.0}, 3000,
                                           SeedPath(2091));
    REQUIRE(audit.frequencies.size() == 4);
    for (std::size_t i = 0; i + 1 < audit.frequencies.size(); ++i)
      CHECK(audit.frequencies[i] >= audit.frequencies[i + 1]);
    CHECK(audit.frequencies[0] > 0.0);
    // At this depth the unit-kappa threshold is already out of reach.
    CHECK(audit.frequencies[2] == 0.0);
    if (audit.decay_fitted) CHECK(audit.decay_slope < 0.0);
  }

  TEST_CASE("tail audits refuse families at or below the decay exponent") {
    ModelSpec spec = testsupport::percolation_model(2, 0.25, 5);
    FamilySpec fam = testsupport::line_family(VecD(0.0, 0.2), VecD(1.0, 0.0));
    try {
      increment_tail_audit(spec, fam, 3, {0.5}, 10, SeedPath(11));
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::validation);
      CHECK(std::string(e.what()).find("s > alpha") != std::string::npos);
    }
  }

  TEST_CASE("reports serialize to json and csv") {
    std::vector<std::uint64_t> counts;
    for (int m = 0; m <= 5; ++m) counts.push_back(std::uint64_t(1) << m);
    DimensionFit fit = box_dimension(counts);
    std::string js = fit.to_json();
    CHECK(js.find("\"kind\"") != std::string::npos);
    CHECK(js.find("\"slope\"") != std::string::npos);
    std::string csv = fit.to_csv();
    CHECK(csv.find("level") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 6);

    ModelSpec spec = testsupport::percolation_model(2, 0.8, 4);
    FamilySpec fam = testsupport::line_family(VecD(0.0, 0.2), VecD(1.0, 0.0));
    TailAudit audit = increment_tail_audit(spec, fam, 2, {0.5, 1.0}, 50, SeedPath(12));
    std::string ajson = audit.to_json();
    CHECK(ajson.find("\"kappas\"") != std::string::npos);
    CHECK(ajson.find("\"frequencies\"") != std::string::npos);
    std::string acsv = audit.to_csv();
    CHECK(acsv.find("kappa") != std::string::npos);
    CHECK(std::count(acsv.begin(), acsv.end(), '\n') >= 3);
  }
}
