#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "simart/error.hpp"
#include "simart/fit.hpp"
#include "simart/geometry.hpp"
#include "simart/rng.hpp"

using namespace simart;

TEST_SUITE("geometry") {
  TEST_CASE("vector arithmetic and norms") {
    VecD a(1.0, 2.0), b(3.0, -1.0);
    CHECK((a + b)[0] == doctest::Approx(4.0));
    CHECK((a - b)[1] == doctest::Approx(3.0));
    CHECK((a * 2.0)[1] == doctest::Approx(4.0));
    CHECK((2.0 * a)[0] == doctest::Approx(2.0));
    CHECK(a.dot(b) == doctest::Approx(1.0));
    CHECK(VecD(3.0, 4.0).norm() == doctest::Approx(5.0));
    CHECK(a.dist(b) == doctest::Approx(std::sqrt(4.0 + 9.0)));
    CHECK(VecD::make1(0.5).d == 1);
    CHECK(VecD(1.0, 2.0, 3.0).d == 3);
  }

  TEST_CASE("boxes are half open and report exact volumes") {
    Box u = Box::unit(2);
    CHECK(u.contains(VecD(0.0, 0.0)));
    CHECK(u.contains(VecD(0.999, 0.999)));
    CHECK_FALSE(u.contains(VecD(1.0, 0.5)));
    CHECK_FALSE(u.contains(VecD(0.5, -0.001)));
    CHECK(u.volume() == doctest::Approx(1.0));
    CHECK(u.center()[0] == doctest::Approx(0.5));
    CHECK(u.extent()[1] == doctest::Approx(1.0));

    Box c = Box::centered(2, 0.5);
    CHECK(c.lo[0] == doctest::Approx(-0.5));
    CHECK(c.hi[1] == doctest::Approx(0.5));
    Box infl = c.inflated(0.25);
    CHECK(infl.lo[0] == doctest::Approx(-0.75));
    CHECK(infl.volume() == doctest::Approx(2.25));
  }

  TEST_CASE("segment clipping against a box") {
    Box u = Box::unit(2);
    double t0 = 0.0, t1 = 0.0;

    // Diagonal from (-1,-1) to (2,2) crosses the box over t in [1/3, 2/3].
    CHECK(clip_segment(VecD(-1.0, -1.0), VecD(2.0, 2.0), u, &t0, &t1));
    CHECK(t0 == doctest::Approx(1.0 / 3.0));
    CHECK(t1 == doctest::Approx(2.0 / 3.0));
    CHECK(clip_segment_length(VecD(-1.0, -1.0), VecD(2.0, 2.0), u) ==
          doctest::Approx(std::sqrt(2.0)));

    // Entirely outside.
    CHECK_FALSE(clip_segment(VecD(2.0, 2.0), VecD(3.0, 2.0), u, &t0, &t1));
    CHECK(clip_segment_length(VecD(2.0, 2.0), VecD(3.0, 2.0), u) == doctest::Approx(0.0));

    // Entirely inside.
    CHECK(clip_segment(VecD(0.25, 0.5), VecD(0.75, 0.5), u, &t0, &t1));
    CHECK(t0 == doctest::Approx(0.0));
    CHECK(t1 == doctest::Approx(1.0));
  }

  TEST_CASE("distance from a point to a segment") {
    VecD a(0.0, 0.0), b(1.0, 0.0);
    CHECK(segment_distance(VecD(0.5, 2.0), a, b) == doctest::Approx(2.0));
    CHECK(segment_distance(VecD(-3.0, 4.0), a, b) == doctest::Approx(5.0));
    CHECK(segment_distance(VecD(0.25, 0.0), a, b) == doctest::Approx(0.0));
  }

  TEST_CASE("box and ball samplers stay inside their regions") {
    Stream s(21);
    Box box(VecD(-1.0, 2.0), VecD(0.0, 5.0));
    for (int i = 0; i < 2000; ++i) CHECK(box.contains(sample_in_box(s, box)));
    VecD center(1.0, -1.0);
    for (int i = 0; i < 2000; ++i) {
      VecD p = sample_in_ball(s, 2, center, 0.75);
      CHECK(p.dist(center) <= 0.75 + 1e-12);
    }
    Stream s1(21), s2(21);
    VecD p1 = sample_in_ball(s1, 2, center, 0.75);
    VecD p2 = sample_in_ball(s2, 2, center, 0.75);
    CHECK(p1[0] == p2[0]);
    CHECK(p1[1] == p2[1]);
  }

  TEST_CASE("matrix identity, rotation, and symmetric eigenvalues") {
    MatD id = MatD::identity(2);
    CHECK(id.at(0, 0) == doctest::Approx(1.0));
    CHECK(id.at(0, 1) == doctest::Approx(0.0));

    double theta = 0.7;
    MatD r = rotation2(theta);
    CHECK(r.at(0, 0) == doctest::Approx(std::cos(theta)));
    CHECK(r.at(1, 0) == doctest::Approx(std::sin(theta)));
    // Columns orthonormal.
    CHECK(r.at(0, 0) * r.at(0, 1) + r.at(1, 0) * r.at(1, 1) == doctest::Approx(0.0));
    CHECK(r.at(0, 0) * r.at(0, 0) + r.at(1, 0) * r.at(1, 0) == doctest::Approx(1.0));

    MatD m(2);
    m.at(0, 0) = 2.0;
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 1.0;
    m.at(1, 1) = 2.0;
    auto ev = symmetric_eigenvalues(m);
    std::vector<double> lam(ev.begin(), ev.begin() + 2);
    std::sort(lam.begin(), lam.end());
    CHECK(lam[0] == doctest::Approx(1.0));
    CHECK(lam[1] == doctest::Approx(3.0));
    CHECK(symmetric_operator_norm(m) == doctest::Approx(3.0));
  }

  TEST_CASE("matrix inverse, determinant, and singular rejection") {
    MatD m(2);
    m.at(0, 0) = 2.0;
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 0.5;
    m.at(1, 1) = 3.0;
    CHECK(m.det() == doctest::Approx(5.5));
    MatD prod = m.mul(m.inverse());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(prod.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    VecD v = m.mul(VecD(1.0, -1.0));
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(-2.5));
    CHECK(m.transpose().at(0, 1) == doctest::Approx(0.5));
    CHECK(m.plus(m).at(1, 1) == doctest::Approx(6.0));
    CHECK(m.minus(m).at(0, 0) == doctest::Approx(0.0));

    MatD singular(2);
    singular.at(0, 0) = 1.0;
    singular.at(0, 1) = 2.0;
    singular.at(1, 0) = 2.0;
    singular.at(1, 1) = 4.0;
    CHECK_THROWS_AS(singular.inverse(), Error);
    try {
      singular.inverse();
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::singularity);
    }
  }

  TEST_CASE("least squares recovers an exact line") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 8; ++i) {
      xs.push_back(static_cast<double>(i));
      ys.push_back(3.0 * i - 2.0);
    }
    LinearFit fit = fit_line(xs, ys);
    CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.slope_stderr == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit.residual_rms == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit.count == 8);
  }

  TEST_CASE("median of odd and even sized samples") {
    CHECK(median({5.0, 1.0, 3.0}) == doctest::Approx(3.0));
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));
    CHECK(median({7.0}) == doctest::Approx(7.0));
  }
}
