#include <doctest.h>

#include <cmath>
#include <vector>

#include "simart/error.hpp"
#include "simart/families.hpp"
#include "support.hpp"

using namespace simart;

namespace {

constexpr double kPi = 3.14159265358979323846;

CurveParam circle_curve(double cx, double cy, double r, double clip) {
  // (x-cx)^2 + (y-cy)^2 - r^2 in graded lex coefficients.
  CurveParam c;
  c.coeffs[0] = cx * cx + cy * cy - r * r;
  c.coeffs[1] = -2.0 * cx;
  c.coeffs[2] = -2.0 * cy;
  c.coeffs[3] = 1.0;
  c.coeffs[5] = 1.0;
  c.clip_radius = clip;
  return c;
}

}  // namespace

TEST_SUITE("families") {
  TEST_CASE("lines normalize their direction and expose points") {
    PlaneParam line = PlaneParam::line(VecD(1.0, 2.0), VecD(3.0, 4.0));
    line.validate();
    CHECK(line.k() == 1);
    CHECK(line.basis[0][0] == doctest::Approx(0.6));
    CHECK(line.basis[0][1] == doctest::Approx(0.8));
    VecD p = line.point_at(5.0);
    CHECK(p[0] == doctest::Approx(4.0));
    CHECK(p[1] == doctest::Approx(6.0));
    CHECK(line.frostman_exponent() == doctest::Approx(1.0));
    CHECK(line.frostman_constant() == doctest::Approx(2.0));
  }

  TEST_CASE("plane validation rejects bad bases") {
    PlaneParam too_many;
    too_many.basepoint = VecD(0.0, 0.0);
    too_many.basis = {VecD(1.0, 0.0), VecD(0.0, 1.0)};
    CHECK_THROWS_AS(too_many.validate(), Error);  // k must stay below d

    PlaneParam not_unit;
    not_unit.basepoint = VecD(0.0, 0.0);
    not_unit.basis = {VecD(2.0, 0.0)};
    CHECK_THROWS_AS(not_unit.validate(), Error);

    PlaneParam not_orthogonal;
    not_orthogonal.basepoint = VecD(0.0, 0.0, 0.0);
    not_orthogonal.basis = {VecD(1.0, 0.0, 0.0), VecD(std::sqrt(0.5), std::sqrt(0.5), 0.0)};
    CHECK_THROWS_AS(not_orthogonal.validate(), Error);

    PlaneParam zero_direction;
    zero_direction.basepoint = VecD(0.0, 0.0);
    CHECK_THROWS_AS(PlaneParam::line(zero_direction.basepoint, VecD(0.0, 0.0)), Error);
  }

  TEST_CASE("projectors are idempotent and symmetric") {
    PlaneParam line = PlaneParam::line(VecD(0.2, -0.4), VecD(1.0, 2.0));
    MatD pr = line.projector();
    MatD sq = pr.mul(pr);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CHECK(sq.at(i, j) == doctest::Approx(pr.at(i, j)).epsilon(1e-12));
        CHECK(pr.at(i, j) == doctest::Approx(pr.at(j, i)).epsilon(1e-12));
      }
    VecD dir = line.basis[0];
    VecD im = pr.mul(dir);
    CHECK(im.dist(dir) < 1e-12);
  }

  TEST_CASE("the plane metric separates angle and offset") {
    PlaneParam base = PlaneParam::line(VecD(0.0, 0.0), VecD(1.0, 0.0));
    CHECK(plane_metric(base, base) == doctest::Approx(0.0));

    double th = kPi / 6.0;
    PlaneParam tilted = PlaneParam::line(VecD(0.0, 0.0), VecD(std::cos(th), std::sin(th)));
    CHECK(plane_metric(base, tilted) == doctest::Approx(0.5).epsilon(1e-12));

    PlaneParam shifted = PlaneParam::line(VecD(0.0, 0.3), VecD(1.0, 0.0));
    CHECK(plane_metric(base, shifted) == doctest::Approx(0.3).epsilon(1e-12));

    // Shifting along the line itself does not move the measure class.
    PlaneParam slid = PlaneParam::line(VecD(2.0, 0.0), VecD(1.0, 0.0));
    CHECK(plane_metric(base, slid) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("tracing a circle recovers its length") {
    CurveParam circle = circle_curve(0.0, 0.0, 0.5, 1.0);
    circle.validate();
    CHECK(circle.degree() == 2);
    CurveTrace trace = trace_curve(circle, 0.01);
    REQUIRE(trace.components.size() == 1);
    const CurveComponent& comp = trace.components[0];
    CHECK(comp.closed);
    CHECK(comp.length() == doctest::Approx(kPi).epsilon(2e-4));
    for (std::size_t i = 0; i < comp.points.size(); ++i) {
      const CurvePoint& pt = comp.points[i];
      CHECK(std::fabs(circle.value(pt.position)) < 1e-9);
      CHECK(pt.tangent.norm() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(pt.grad_norm == doctest::Approx(circle.gradient(pt.position).norm()));
      const CurvePoint& nx = comp.points[(i + 1) % comp.points.size()];
      double gap = pt.position.dist(nx.position);
      CHECK(gap >= 0.5 * 0.01 - 1e-12);
      CHECK(gap <= 2.0 * 0.01 + 1e-12);
    }
  }

  TEST_CASE("tracing a parabola matches arclength quadrature") {
    // y = x^2 inside the unit ball; the arc leaves the ball where
    // x^2 + x^4 = 1, i.e. x = a with a^2 = (sqrt(5) - 1) / 2.
    CurveParam par;
    par.coeffs[2] = -1.0;  // -y
    par.coeffs[3] = 1.0;   // x^2
    par.clip_radius = 1.0;
    CurveTrace trace = trace_curve(par, 0.005);
    REQUIRE(trace.components.size() == 1);
    CHECK_FALSE(trace.components[0].closed);

    double a = std::sqrt((std::sqrt(5.0) - 1.0) / 2.0);
    const int steps = 20000;
    double quad = 0.0;
    for (int i = 0; i < steps; ++i) {
      double x = -a + (2.0 * a) * (i + 0.5) / steps;
      quad += std::sqrt(1.0 + 4.0 * x * x) * (2.0 * a) / steps;
    }
    CHECK(trace.total_length() == doctest::Approx(quad).epsilon(2e-4));
  }

  TEST_CASE("a chord is traced with its exact length") {
    // x = 0.3 inside the unit ball: a vertical chord of length 2 sqrt(1 - 0.09).
    CurveParam chord;
    chord.coeffs[0] = -0.3;
    chord.coeffs[1] = 1.0;
    chord.clip_radius = 1.0;
    CurveTrace trace = trace_curve(chord, 0.01);
    REQUIRE(trace.components.size() == 1);
    CHECK(trace.total_length() ==
          doctest::Approx(2.0 * std::sqrt(1.0 - 0.09)).epsilon(1e-3));
  }

  TEST_CASE("a curve missing the clip ball traces empty") {
    CurveParam far = circle_curve(0.0, 0.0, 2.0, 1.0);
    CurveTrace trace = trace_curve(far, 0.01);
    CHECK(trace.components.empty());
    CHECK(trace.total_length() == 0.0);
  }

  TEST_CASE("tracing through a vanishing gradient is refused") {
    // The cusp y^3 = x^2 has grad P = 0 at the origin, which lies on the curve.
    CurveParam cusp;
    cusp.coeffs[3] = -1.0;  // -x^2
    cusp.coeffs[9] = 1.0;   // y^3
    cusp.clip_radius = 1.0;
    try {
      trace_curve(cusp, 0.01);
      FAIL("expected a singularity error");
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::singularity);
      CHECK(std::string(e.what()).find("gradient below") != std::string::npos);
    }
  }

  TEST_CASE("curve validation rejects empty polynomials") {
    CurveParam zero;
    CHECK_THROWS_AS(zero.validate(), Error);

    CurveParam bad_clip = circle_curve(0.0, 0.0, 0.5, 0.0);
    CHECK_THROWS_AS(bad_clip.validate(), Error);
  }

  TEST_CASE("curve distance behaves like a metric lower bound") {
    CurveParam circle = circle_curve(0.0, 0.0, 0.5, 1.5);
    CurveParam par;
    par.coeffs[2] = -1.0;
    par.coeffs[3] = 1.0;
    par.clip_radius = 1.5;

    CHECK(curve_distance(circle, circle, 16) == doctest::Approx(0.0));
    double d4 = curve_distance(circle, par, 4);
    double d16 = curve_distance(circle, par, 16);
    double d64 = curve_distance(circle, par, 64);
    CHECK(d16 > 0.0);
    CHECK(d16 >= d4 - 1e-12);
    CHECK(d64 >= d16 - 1e-12);
    CHECK(d64 == doctest::Approx(0.541258).epsilon(1e-4));
  }

  TEST_CASE("similarity maps compose scaling, rotation, and translation") {
    SimilarityMap m;
    m.ratio = 0.5;
    m.angle = kPi / 2.0;
    m.translate = VecD(1.0, 0.0);
    VecD y = m.apply(VecD(1.0, 0.0), 2);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-12));

    SimilarityMap line_map;
    line_map.ratio = 1.0 / 3.0;
    line_map.translate = VecD::make1(2.0 / 3.0);
    VecD z = line_map.apply(VecD::make1(1.0), 1);
    CHECK(z[0] == doctest::Approx(1.0));
  }

  TEST_CASE("the middle-thirds system reports its exact invariants") {
    IFSParam cantor = testsupport::cantor_ifs();
    cantor.validate();
    CHECK(cantor.natural);
    CHECK(cantor.sim_dim == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-12));
    CHECK(cantor.probs[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cantor.barycenter()[0] == doctest::Approx(0.5).epsilon(1e-12));
    VecD center;
    double radius = 0.0;
    cantor.invariant_ball(&center, &radius);
    CHECK(center[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(radius == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cantor.strongly_separated());
  }

  TEST_CASE("touching first-level images are not strongly separated") {
    SimilarityMap left, right;
    left.ratio = 0.5;
    left.translate = VecD::make1(0.0);
    right.ratio = 0.5;
    right.translate = VecD::make1(0.5);
    IFSParam halves = IFSParam::make_natural(1, {left, right});
    CHECK(halves.sim_dim == doctest::Approx(1.0));
    CHECK_FALSE(halves.strongly_separated());
  }

  TEST_CASE("system validation rejects malformed maps") {
    SimilarityMap expanding;
    expanding.ratio = 1.0;
    expanding.translate = VecD::make1(0.0);
    CHECK_THROWS_AS(IFSParam::make_natural(1, {expanding, expanding}), Error);

    SimilarityMap a, b;
    a.ratio = 0.5;
    a.translate = VecD::make1(0.0);
    b.ratio = 0.25;
    b.translate = VecD::make1(0.75);
    CHECK_THROWS_AS(IFSParam::make(1, {a, b}, {0.6, 0.6}), Error);

    SimilarityMap rotated_line = a;
    rotated_line.angle = 0.2;
    CHECK_THROWS_AS(IFSParam::make_natural(1, {rotated_line, b}), Error);

    CHECK_THROWS_AS(IFSParam::make_natural(1, {}), Error);
  }

  TEST_CASE("similarity dimension solves the moment equation") {
    bool degenerate = false;
    CHECK(similarity_dimension({0.5, 0.5}, &degenerate) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(degenerate);

    double s = similarity_dimension({0.5, 0.25, 0.25}, &degenerate);
    double residual = std::pow(0.5, s) + 2.0 * std::pow(0.25, s) - 1.0;
    CHECK(std::fabs(residual) < 1e-12);
    CHECK(s > 1.0);
    CHECK_FALSE(degenerate);

    CHECK(similarity_dimension({1.0 / 3.0, 1.0 / 3.0}, &degenerate) ==
          doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-12));

    CHECK(similarity_dimension({0.5}, &degenerate) == doctest::Approx(0.0));
    CHECK(degenerate);
  }
}
