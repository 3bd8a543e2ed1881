#include "simart/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace simart {

bool clip_segment(const VecD& a, const VecD& b, const Box& box, double* t0, double* t1) {
  require(a.d == b.d && a.d == box.dim(), "clip_segment: dimension mismatch");
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < a.d; ++i) {
    double delta = b[i] - a[i];
    if (delta == 0.0) {
      if (a[i] < box.lo[i] || a[i] > box.hi[i]) return false;
      continue;
    }
    double u = (box.lo[i] - a[i]) / delta;
    double v = (box.hi[i] - a[i]) / delta;
    if (u > v) std::swap(u, v);
    lo = std::max(lo, u);
    hi = std::min(hi, v);
    if (lo > hi) return false;
  }
  if (t0) *t0 = lo;
  if (t1) *t1 = hi;
  return true;
}

double clip_segment_length(const VecD& a, const VecD& b, const Box& box) {
  double t0, t1;
  if (!clip_segment(a, b, box, &t0, &t1)) return 0.0;
  return (t1 - t0) * a.dist(b);
}

double segment_distance(const VecD& p, const VecD& a, const VecD& b) {
  VecD ab = b - a;
  double len2 = ab.norm2();
  if (len2 == 0.0) return p.dist(a);
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return p.dist(a + ab * t);
}

VecD sample_in_box(Stream& stream, const Box& box) {
  VecD p(box.dim());
  for (int i = 0; i < box.dim(); ++i) p[i] = stream.next_in(box.lo[i], box.hi[i]);
  return p;
}

VecD sample_in_ball(Stream& stream, int d, const VecD& center, double radius) {
  require(d >= 1 && d <= 3, "sample_in_ball: dimension must be 1, 2 or 3");
  if (d == 1) {
    VecD p(1);
    p[0] = center[0] + stream.next_in(-radius, radius);
    return p;
  }
  for (;;) {
    VecD p(d);
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      p[i] = stream.next_in(-1.0, 1.0);
      r2 += p[i] * p[i];
    }
    if (r2 <= 1.0) {
      for (int i = 0; i < d; ++i) p[i] = center[i] + radius * p[i];
      return p;
    }
  }
}

MatD MatD::mul(const MatD& o) const {
  MatD r(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += at(i, k) * o.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

VecD MatD::mul(const VecD& v) const {
  VecD r(d);
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += at(i, k) * v[k];
    r[i] = s;
  }
  return r;
}

MatD MatD::transpose() const {
  MatD r(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r.at(i, j) = at(j, i);
  return r;
}

MatD MatD::plus(const MatD& o) const {
  MatD r(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r.at(i, j) = at(i, j) + o.at(i, j);
  return r;
}

MatD MatD::minus(const MatD& o) const {
  MatD r(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r.at(i, j) = at(i, j) - o.at(i, j);
  return r;
}

double MatD::det() const {
  if (d == 1) return at(0, 0);
  if (d == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
         at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
         at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
}

MatD MatD::inverse() const {
  double det_val = det();
  if (std::fabs(det_val) < 1e-300) {
    fail_singularity("MatD::inverse: matrix is singular");
  }
  MatD r(d);
  if (d == 1) {
    r.at(0, 0) = 1.0 / det_val;
    return r;
  }
  if (d == 2) {
    r.at(0, 0) = at(1, 1) / det_val;
    r.at(0, 1) = -at(0, 1) / det_val;
    r.at(1, 0) = -at(1, 0) / det_val;
    r.at(1, 1) = at(0, 0) / det_val;
    return r;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      r.at(j, i) = (at(i1, j1) * at(i2, j2) - at(i1, j2) * at(i2, j1)) / det_val;
    }
  }
  return r;
}

std::array<double, 3> symmetric_eigenvalues(const MatD& a) {
  MatD w = a;
  int n = a.d;
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += w.at(p, q) * w.at(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = w.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        double theta = (w.at(q, q) - w.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double wkp = w.at(k, p), wkq = w.at(k, q);
          w.at(k, p) = c * wkp - s * wkq;
          w.at(k, q) = s * wkp + c * wkq;
        }
        for (int k = 0; k < n; ++k) {
          double wpk = w.at(p, k), wqk = w.at(q, k);
          w.at(p, k) = c * wpk - s * wqk;
          w.at(q, k) = s * wpk + c * wqk;
        }
      }
    }
  }
  std::array<double, 3> ev{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = w.at(i, i);
  return ev;
}

double symmetric_operator_norm(const MatD& a) {
  auto ev = symmetric_eigenvalues(a);
  double r = 0.0;
  for (int i = 0; i < a.d; ++i) r = std::max(r, std::fabs(ev[static_cast<std::size_t>(i)]));
  return r;
}

MatD rotation2(double angle) {
  MatD r(2);
  double c = std::cos(angle), s = std::sin(angle);
  r.at(0, 0) = c;
  r.at(0, 1) = -s;
  r.at(1, 0) = s;
  r.at(1, 1) = c;
  return r;
}

}  // namespace simart
