#include "simart/snowflake.hpp"

#include <algorithm>
#include <cmath>

namespace simart {

namespace {

constexpr double kSide = 1.7320508075688772 / 2.0;  // sqrt(3)/2, triangle side
constexpr double kHeightFactor = 1.7320508075688772 / 6.0;  // bump height / edge length

struct P2 {
  double x, y;
};

// Base triangle, counterclockwise: apex up, circumradius 1/2.
constexpr P2 kV0{0.0, 0.5};
constexpr P2 kV1{-1.7320508075688772 / 4.0, -0.25};
constexpr P2 kV2{1.7320508075688772 / 4.0, -0.25};

inline double cross(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}

// Closed triangle membership, orientation independent.
inline bool in_triangle(const P2& a, const P2& b, const P2& c, double px, double py) {
  double s1 = cross(b.x - a.x, b.y - a.y, px - a.x, py - a.y);
  double s2 = cross(c.x - b.x, c.y - b.y, px - b.x, py - b.y);
  double s3 = cross(a.x - c.x, a.y - c.y, px - c.x, py - c.y);
  bool any_neg = s1 < 0.0 || s2 < 0.0 || s3 < 0.0;
  bool any_pos = s1 > 0.0 || s2 > 0.0 || s3 > 0.0;
  return !(any_neg && any_pos);
}

inline double seg_dist(double px, double py, const P2& a, const P2& b) {
  double abx = b.x - a.x, aby = b.y - a.y;
  double len2 = abx * abx + aby * aby;
  double t = ((px - a.x) * abx + (py - a.y) * aby) / len2;
  t = std::clamp(t, 0.0, 1.0);
  double dx = px - (a.x + t * abx), dy = py - (a.y + t * aby);
  return std::sqrt(dx * dx + dy * dy);
}

inline double triangle_dist(const P2& a, const P2& b, const P2& c, double px, double py) {
  if (in_triangle(a, b, c, px, py)) return 0.0;
  return std::min({seg_dist(px, py, a, b), seg_dist(px, py, b, c), seg_dist(px, py, c, a)});
}

// The bumps grown on directed edge p -> q sit on its right side, and all of
// them, at every generation, stay inside the isoceles triangle with base pq
// and apex at the first bump tip. That containment is what makes the prune in
// the two walkers below exact.
struct EdgeFrame {
  P2 p, q;     // endpoints
  P2 a, c;     // trisection points
  P2 apex;     // outward bump tip, also the enclosing triangle apex
};

inline EdgeFrame make_frame(const P2& p, const P2& q) {
  EdgeFrame f;
  f.p = p;
  f.q = q;
  double dx = q.x - p.x, dy = q.y - p.y;
  f.a = {p.x + dx / 3.0, p.y + dy / 3.0};
  f.c = {p.x + 2.0 * dx / 3.0, p.y + 2.0 * dy / 3.0};
  // Outward normal = right of the direction of travel.
  f.apex = {p.x + 0.5 * dx + dy * kHeightFactor, p.y + 0.5 * dy - dx * kHeightFactor};
  return f;
}

bool edge_region_contains(const P2& p, const P2& q, double px, double py, int depth) {
  if (depth == 0) return false;
  EdgeFrame f = make_frame(p, q);
  if (!in_triangle(f.p, f.apex, f.q, px, py)) return false;
  if (in_triangle(f.a, f.apex, f.c, px, py)) return true;
  return edge_region_contains(f.p, f.a, px, py, depth - 1) ||
         edge_region_contains(f.a, f.apex, px, py, depth - 1) ||
         edge_region_contains(f.apex, f.c, px, py, depth - 1) ||
         edge_region_contains(f.c, f.q, px, py, depth - 1);
}

// Distance to the final-generation boundary polyline of the edge.
void polyline_distance(const P2& p, const P2& q, double px, double py, int depth, double* best) {
  if (depth == 0) {
    *best = std::min(*best, seg_dist(px, py, p, q));
    return;
  }
  EdgeFrame f = make_frame(p, q);
  if (triangle_dist(f.p, f.apex, f.q, px, py) >= *best) return;
  polyline_distance(f.p, f.a, px, py, depth - 1, best);
  polyline_distance(f.a, f.apex, px, py, depth - 1, best);
  polyline_distance(f.apex, f.c, px, py, depth - 1, best);
  polyline_distance(f.c, f.q, px, py, depth - 1, best);
}

}  // namespace

bool snowflake_contains(const VecD& x, int depth) {
  require(depth >= 0, "snowflake_contains: depth must be non-negative");
  double px = x[0], py = x[1];
  // Cheap reject: the whole region lies in the circumball.
  if (px * px + py * py > 0.25000000000001) return false;
  if (in_triangle(kV0, kV1, kV2, px, py)) return true;
  return edge_region_contains(kV0, kV1, px, py, depth) ||
         edge_region_contains(kV1, kV2, px, py, depth) ||
         edge_region_contains(kV2, kV0, px, py, depth);
}

double snowflake_distance(const VecD& x, int depth) {
  require(depth >= 0, "snowflake_distance: depth must be non-negative");
  if (snowflake_contains(x, depth)) return 0.0;
  double px = x[0], py = x[1];
  double best = 1e300;
  polyline_distance(kV0, kV1, px, py, depth, &best);
  polyline_distance(kV1, kV2, px, py, depth, &best);
  polyline_distance(kV2, kV0, px, py, depth, &best);
  return best;
}

double snowflake_area(int depth) {
  require(depth >= 0, "snowflake_area: depth must be non-negative");
  double triangle = std::sqrt(3.0) / 4.0 * kSide * kSide;
  return triangle * (8.0 / 5.0 - (3.0 / 5.0) * std::pow(4.0 / 9.0, depth));
}

Box snowflake_bounding_box() {
  // Hexagonal hull: x extent from the two lower vertices, y extent from the
  // top vertex and the bottom bump tip.
  Box b;
  b.lo = VecD(-1.7320508075688772 / 4.0, -0.5);
  b.hi = VecD(1.7320508075688772 / 4.0, 0.5);
  return b;
}

}  // namespace simart
