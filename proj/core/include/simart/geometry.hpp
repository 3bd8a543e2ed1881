#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "simart/error.hpp"
#include "simart/rng.hpp"

namespace simart {

// Point in R^d for d in {1,2,3}. Unused coordinates stay zero so norms and
// dot products can ignore the dimension tag.
struct VecD {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int d = 2;

  VecD() = default;
  explicit VecD(int dim) : d(dim) {}
  VecD(double x, double y) : c{x, y, 0.0}, d(2) {}
  VecD(double x, double y, double z) : c{x, y, z}, d(3) {}

  static VecD make1(double x) {
    VecD v(1);
    v.c[0] = x;
    return v;
  }

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  VecD operator+(const VecD& o) const {
    VecD r(d);
    for (int i = 0; i < 3; ++i) r.c[i] = c[i] + o.c[i];
    return r;
  }
  VecD operator-(const VecD& o) const {
    VecD r(d);
    for (int i = 0; i < 3; ++i) r.c[i] = c[i] - o.c[i];
    return r;
  }
  VecD operator*(double t) const {
    VecD r(d);
    for (int i = 0; i < 3; ++i) r.c[i] = c[i] * t;
    return r;
  }

  double dot(const VecD& o) const {
    return c[0] * o.c[0] + c[1] * o.c[1] + c[2] * o.c[2];
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  double dist(const VecD& o) const { return (*this - o).norm(); }
  double dist2(const VecD& o) const { return (*this - o).norm2(); }
};

inline VecD operator*(double t, const VecD& v) { return v * t; }

// Axis-aligned box, half open: [lo, hi) in each axis.
struct Box {
  VecD lo;
  VecD hi;

  Box() = default;
  Box(const VecD& l, const VecD& h) : lo(l), hi(h) {}

  int dim() const { return lo.d; }

  static Box unit(int d) {
    Box b;
    b.lo = VecD(d);
    b.hi = VecD(d);
    for (int i = 0; i < d; ++i) b.hi[i] = 1.0;
    return b;
  }

  // Cube [-half, half)^d.
  static Box centered(int d, double half) {
    Box b;
    b.lo = VecD(d);
    b.hi = VecD(d);
    for (int i = 0; i < d; ++i) {
      b.lo[i] = -half;
      b.hi[i] = half;
    }
    return b;
  }

  bool contains(const VecD& p) const {
    for (int i = 0; i < dim(); ++i) {
      if (p[i] < lo[i] || p[i] >= hi[i]) return false;
    }
    return true;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }

  VecD center() const { return (lo + hi) * 0.5; }

  VecD extent() const { return hi - lo; }

  Box inflated(double margin) const {
    Box b = *this;
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] -= margin;
      b.hi[i] += margin;
    }
    return b;
  }
};

// Parameter interval of segment a + t(b-a), t in [0,1], inside the closed box.
// Returns false when the intersection is empty.
bool clip_segment(const VecD& a, const VecD& b, const Box& box, double* t0, double* t1);

// Length of the part of segment [a, b] inside the box.
double clip_segment_length(const VecD& a, const VecD& b, const Box& box);

// Distance from p to segment [a, b].
double segment_distance(const VecD& p, const VecD& a, const VecD& b);

VecD sample_in_box(Stream& stream, const Box& box);

// Uniform in the closed ball, by rejection from the bounding cube.
VecD sample_in_ball(Stream& stream, int d, const VecD& center, double radius);

// Dense symmetric d x d matrix, d <= 3.
struct MatD {
  std::array<std::array<double, 3>, 3> m{};
  int d = 2;

  MatD() = default;
  explicit MatD(int dim) : d(dim) {}

  static MatD identity(int dim) {
    MatD a(dim);
    for (int i = 0; i < dim; ++i) a.m[i][i] = 1.0;
    return a;
  }

  double& at(int i, int j) { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  double at(int i, int j) const { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

  MatD mul(const MatD& o) const;
  VecD mul(const VecD& v) const;
  MatD transpose() const;
  MatD plus(const MatD& o) const;
  MatD minus(const MatD& o) const;
  double det() const;
  // Inverse via adjugate; throws ErrorKind::singularity when |det| is tiny.
  MatD inverse() const;
};

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
std::array<double, 3> symmetric_eigenvalues(const MatD& a);

// Largest absolute eigenvalue of a symmetric matrix.
double symmetric_operator_norm(const MatD& a);

// Rotation by angle (radians) in the plane, embedded as a 2x2 MatD.
MatD rotation2(double angle);

}  // namespace simart
