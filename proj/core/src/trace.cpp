#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>
#include <vector>

#include "simart/error.hpp"
#include "simart/families.hpp"

namespace simart {

namespace {

std::string point_text(const VecD& p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%.12g, %.12g)", p[0], p[1]);
  return buf;
}

// Magnitude scale of the polynomial over the clip ball, for residual
// tolerances.
double poly_scale(const CurveParam& curve) {
  double scale = 1.0;
  double r = std::max(1.0, curve.clip_radius);
  double rp[5] = {1.0, r, r * r, r * r * r, r * r * r * r};
  static constexpr int kDegree[curve_coeff_count] = {0, 1, 1, 2, 2, 2, 3, 3,
                                                     3, 3, 4, 4, 4, 4, 4};
  for (int i = 0; i < curve_coeff_count; ++i)
    scale += std::fabs(curve.coeffs[static_cast<std::size_t>(i)]) * rp[kDegree[i]];
  return scale;
}

// Newton steps along the gradient until |P| is below tol.
bool correct(const CurveParam& curve, VecD* y, double tol) {
  for (int it = 0; it < 24; ++it) {
    double f = curve.value(*y);
    if (std::fabs(f) <= tol) return true;
    VecD g = curve.gradient(*y);
    double g2 = g.dot(g);
    if (g2 < 1e-24) return false;
    *y = *y - g * (f / g2);
  }
  return std::fabs(curve.value(*y)) <= 16.0 * tol;
}

// Unit tangent at x: the gradient rotated a quarter turn, sign-matched to the
// reference direction.
VecD tangent_at(const CurveParam& curve, const VecD& x, const VecD& reference,
                double* grad_norm) {
  VecD g = curve.gradient(x);
  double gn = g.norm();
  *grad_norm = gn;
  if (gn < 1e-6)
    fail_singularity("curve trace: gradient below 1e-6 at " + point_text(x));
  VecD t = VecD(-g[1], g[0]) * (1.0 / gn);
  if (t.dot(reference) < 0.0) t = t * -1.0;
  return t;
}

// Parameter of the segment a + t(b - a) crossing the circle of the given
// radius, preferring the larger root in [0, 1].
double boundary_crossing(const VecD& a, const VecD& b, double radius) {
  VecD u = b - a;
  double qa = u.dot(u);
  double qb = 2.0 * a.dot(u);
  double qc = a.dot(a) - radius * radius;
  double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0 || qa == 0.0) return 1.0;
  double root = (-qb + std::sqrt(disc)) / (2.0 * qa);
  return std::clamp(root, 0.0, 1.0);
}

struct Walk {
  std::vector<CurvePoint> points;  // excludes the start vertex
  bool closed = false;
};

Walk walk_from(const CurveParam& curve, const VecD& start, const VecD& first_dir, double step,
               double f_tol, int max_steps) {
  Walk out;
  VecD cur = start;
  VecD dir = first_dir;
  for (int n = 0;; ++n) {
    if (n >= max_steps) fail_resource("curve trace: vertex budget exceeded");
    double gn = 0.0;
    VecD t = tangent_at(curve, cur, dir, &gn);
    VecD z;
    bool accepted = false;
    double h = step;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      z = cur + t * h;
      if (correct(curve, &z, f_tol)) {
        double moved = z.dist(cur);
        accepted = moved >= 0.45 * step && moved <= 2.0 * step && (z - cur).dot(t) > 0.0;
      }
      h *= 0.5;
    }
    if (!accepted)
      fail_singularity("curve trace: continuation stalled near " + point_text(cur));

    if (z.norm() > curve.clip_radius) {
      double tc = boundary_crossing(cur, z, curve.clip_radius);
      VecD b = cur + (z - cur) * tc;
      if (b.dist(cur) < 0.45 * step && !out.points.empty()) out.points.pop_back();
      double bn = 0.0;
      VecD bt = tangent_at(curve, b, z - cur, &bn);
      out.points.push_back({b, bt, bn});
      return out;
    }

    if (n >= 2 && z.dist(start) < 0.75 * step && (start - cur).dot(z - cur) > 0.0) {
      out.closed = true;
      return out;
    }

    double zn = 0.0;
    VecD zt = tangent_at(curve, z, z - cur, &zn);
    out.points.push_back({z, zt, zn});
    dir = zt;
    cur = z;
  }
}

std::int64_t cell_key(const VecD& p, double cell) {
  auto fold = [cell](double v) {
    return static_cast<std::int64_t>(std::floor(v / cell));
  };
  return (fold(p[0]) << 32) ^ (fold(p[1]) & 0xffffffffll);
}

}  // namespace

CurveTrace trace_curve(const CurveParam& curve, double step) {
  curve.validate();
  double r = curve.clip_radius;
  require(std::isfinite(step) && step > 0.0 && step < r,
          "curve trace: step must lie in (0, clip_radius)");

  double f_tol = 1e-13 * poly_scale(curve);
  int cells = std::clamp(static_cast<int>(std::ceil(r / step)), 8, 2048);
  double node_h = 2.0 * r / cells;
  int nodes = cells + 1;

  std::vector<double> values(static_cast<std::size_t>(nodes) * nodes);
  auto node = [&](int i, int j) { return VecD(-r + i * node_h, -r + j * node_h); };
  for (int j = 0; j < nodes; ++j)
    for (int i = 0; i < nodes; ++i)
      values[static_cast<std::size_t>(j) * nodes + i] = curve.value(node(i, j));

  // Root of P on the segment [a, b]; P changes sign between the endpoints.
  auto edge_root = [&](VecD a, VecD b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    for (int it = 0; it < 60; ++it) {
      VecD mid = (a + b) * 0.5;
      double fm = curve.value(mid);
      if (fm == 0.0 || a.dist(b) < 1e-15 * r) return mid;
      if ((fa < 0.0) != (fm < 0.0)) {
        b = mid;
        fb = fm;
      } else {
        a = mid;
        fa = fm;
      }
    }
    return (a + b) * 0.5;
  };

  CurveTrace trace;
  std::unordered_set<std::int64_t> visited;
  int max_steps =
      static_cast<int>(std::ceil(12.6 * r / (0.4 * step))) + 64;

  auto try_seed = [&](const VecD& root) {
    if (root.norm() > r) return;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di)
        if (visited.count(cell_key(VecD(root[0] + di * step, root[1] + dj * step), step)))
          return;

    VecD seed = root;
    if (!correct(curve, &seed, f_tol)) return;
    if (seed.norm() > r) return;
    double gn = 0.0;
    VecD fwd_t = tangent_at(curve, seed, VecD(1.0, 0.0), &gn);

    Walk fwd = walk_from(curve, seed, fwd_t, step, f_tol, max_steps);
    CurveComponent comp;
    if (fwd.closed) {
      comp.closed = true;
      comp.points.push_back({seed, fwd_t, gn});
      comp.points.insert(comp.points.end(), fwd.points.begin(), fwd.points.end());
    } else {
      Walk bwd = walk_from(curve, seed, fwd_t * -1.0, step, f_tol, max_steps);
      comp.points.reserve(bwd.points.size() + 1 + fwd.points.size());
      for (auto it = bwd.points.rbegin(); it != bwd.points.rend(); ++it) {
        CurvePoint p = *it;
        p.tangent = p.tangent * -1.0;
        comp.points.push_back(p);
      }
      comp.points.push_back({seed, fwd_t, gn});
      comp.points.insert(comp.points.end(), fwd.points.begin(), fwd.points.end());
    }

    // Merge boundary vertices that landed closer than step/2 to a neighbor.
    auto squeeze = [&](std::vector<CurvePoint>& pts) {
      while (pts.size() >= 3 &&
             pts[pts.size() - 1].position.dist(pts[pts.size() - 2].position) < 0.45 * step)
        pts.erase(pts.end() - 2);
      while (pts.size() >= 3 && pts[0].position.dist(pts[1].position) < 0.45 * step)
        pts.erase(pts.begin() + 1);
    };
    if (!comp.closed) squeeze(comp.points);

    for (const CurvePoint& p : comp.points) visited.insert(cell_key(p.position, step));
    if (comp.points.size() >= 2 && comp.length() >= 0.5 * step)
      trace.components.push_back(std::move(comp));
  };

  for (int j = 0; j < nodes; ++j) {
    for (int i = 0; i < nodes; ++i) {
      double f0 = values[static_cast<std::size_t>(j) * nodes + i];
      if (i + 1 < nodes) {
        double f1 = values[static_cast<std::size_t>(j) * nodes + i + 1];
        if (f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0))
          try_seed(edge_root(node(i, j), node(i + 1, j), f0, f1));
      }
      if (j + 1 < nodes) {
        double f1 = values[static_cast<std::size_t>(j + 1) * nodes + i];
        if (f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0))
          try_seed(edge_root(node(i, j), node(i, j + 1), f0, f1));
      }
    }
  }
  return trace;
}

namespace {

// Integral of f against the polyline length measure, midpoint rule per
// segment.
template <typename F>
double trace_integral(const CurveTrace& trace, F&& f) {
  double total = 0.0;
  for (const CurveComponent& comp : trace.components) {
    std::size_t m = comp.points.size();
    if (m < 2) continue;
    std::size_t segments = comp.closed ? m : m - 1;
    for (std::size_t i = 0; i < segments; ++i) {
      const VecD& a = comp.points[i].position;
      const VecD& b = comp.points[(i + 1) % m].position;
      total += f((a + b) * 0.5) * a.dist(b);
    }
  }
  return total;
}

}  // namespace

double curve_distance(const CurveParam& a, const CurveParam& b, int probe_functions) {
  require(probe_functions >= 1, "curve_distance: need at least one probe");
  require(probe_functions <= 1 << 20, "curve_distance: probe budget too large");
  double r = std::max(a.clip_radius, b.clip_radius);

  CurveTrace ta = trace_curve(a, a.clip_radius / 512.0);
  CurveTrace tb = trace_curve(b, b.clip_radius / 512.0);

  auto margin = [r](const VecD& x) { return std::max(0.0, r - x.norm()); };

  // Probe k of the fixed dictionary; all probes are 1-Lipschitz and vanish on
  // the boundary of the clip ball.
  int remaining = probe_functions;
  double best = 0.0;
  auto apply = [&](auto&& f) {
    double va = trace_integral(ta, f);
    double vb = trace_integral(tb, f);
    best = std::max(best, std::fabs(va - vb));
    --remaining;
  };

  apply([&](const VecD& x) { return std::min(1.0, margin(x)); });
  if (remaining > 0)
    apply([&](const VecD& x) { return std::clamp(x[0], -margin(x), margin(x)); });
  if (remaining > 0)
    apply([&](const VecD& x) { return std::clamp(x[1], -margin(x), margin(x)); });

  for (int grid = 2; remaining > 0; grid *= 2) {
    double spacing = 2.0 * r / grid;
    for (int row = 0; row < grid && remaining > 0; ++row) {
      for (int col = 0; col < grid && remaining > 0; ++col) {
        VecD center(-r + (col + 0.5) * spacing, -r + (row + 0.5) * spacing);
        apply([&](const VecD& x) {
          return std::max(0.0, std::min(spacing - x.dist(center), margin(x)));
        });
      }
    }
  }
  return best;
}

}  // namespace simart
