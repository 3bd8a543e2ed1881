#include "simart/intersect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <utility>

#include "simart/error.hpp"
#include "simart/fit.hpp"

namespace simart {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VecD unit_direction(const PlaneParam& plane) {
  VecD u = plane.basis[0];
  double norm = u.norm();
  require(norm > 0.0, "mass_on_plane: direction must be nonzero");
  return u * (1.0 / norm);
}

// Parameter interval of the infinite line base + t * u inside the closed box.
// Returns false when the line misses the box.
bool clip_line_to_box(const VecD& base, const VecD& u, const Box& box, double* t_lo,
                      double* t_hi) {
  double lo = -kInf, hi = kInf;
  for (int i = 0; i < box.dim(); ++i) {
    if (std::fabs(u[i]) < 1e-300) {
      if (base[i] < box.lo[i] || base[i] > box.hi[i]) return false;
      continue;
    }
    double t0 = (box.lo[i] - base[i]) / u[i];
    double t1 = (box.hi[i] - base[i]) / u[i];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) return false;
  *t_lo = lo;
  *t_hi = hi;
  return true;
}

// Sum of beta * |line through cell| over the surviving level-n cells. Shared
// dyadic faces follow the half-open cell convention, so a line riding a cell
// boundary is counted once, exactly as the pointwise density sees it.
double exact_subdivision_line(const SubdivisionTree& tree, const PlaneParam& plane, int n) {
  int d = tree.dim();
  VecD u = unit_direction(plane);
  double t_lo = 0.0, t_hi = 0.0;
  if (!clip_line_to_box(plane.basepoint, u, Box::unit(d), &t_lo, &t_hi)) return 0.0;
  VecD a = plane.basepoint + u * t_lo;
  VecD b = plane.basepoint + u * t_hi;
  double seg_len = a.dist(b);
  if (seg_len <= 0.0) return 0.0;

  double h = std::ldexp(1.0, -n);
  const auto& lv = tree.level(n);
  Box cell{VecD(d), VecD(d)};
  double sum = 0.0;
  for (std::size_t ci = 0; ci < lv.index.size(); ++ci) {
    std::uint64_t idx = lv.index[ci];
    std::uint64_t coords[3] = {0, 0, 0};
    for (int j = 0; j < n; ++j) {
      std::uint64_t digit = (idx >> (d * j)) & ((1u << d) - 1u);
      for (int i = 0; i < d; ++i) coords[i] |= ((digit >> i) & 1u) << j;
    }
    for (int i = 0; i < d; ++i) {
      cell.lo[i] = static_cast<double>(coords[i]) * h;
      cell.hi[i] = cell.lo[i] + h;
    }
    double t0 = 0.0, t1 = 0.0;
    if (!clip_segment(a, b, cell, &t0, &t1)) continue;
    if (!(t1 > t0)) continue;
    VecD mid = a + (b - a) * (0.5 * (t0 + t1));
    if (!cell.contains(mid)) continue;
    sum += lv.beta[ci] * (t1 - t0) * seg_len;
  }
  return sum;
}

// Domain chord minus the union of the cutout chords, times the level scale.
double exact_cutout_line(const CutoutRealization& real, const PlaneParam& plane, int n) {
  int d = real.domain().d;
  VecD u = unit_direction(plane);
  const VecD& p = plane.basepoint;

  // Chord through the radius-1 domain ball.
  double pb = p.dot(u);
  double disc = pb * pb - (p.norm2() - 1.0);
  if (!(disc > 0.0)) return 0.0;
  double root = std::sqrt(disc);
  double chord_lo = -pb - root, chord_hi = -pb + root;

  // Cutouts live in bands of dyadic scale, stored band-major, so the set
  // active at level n is the prefix with s >= 2^-n.
  const auto& cuts = real.cutouts();
  double s_min = std::ldexp(1.0, -n);
  auto last = std::partition_point(cuts.begin(), cuts.end(),
                                   [&](const Cutout& cut) { return cut.s >= s_min; });

  std::vector<std::pair<double, double>> spans;
  VecD q(d);
  for (auto it = cuts.begin(); it != last; ++it) {
    for (int i = 0; i < d; ++i) q[i] = p[i] - it->c[i];
    double reach = 0.5 * it->s * real.shrink();
    double qb = q.dot(u);
    double qdisc = qb * qb - (q.norm2() - reach * reach);
    if (!(qdisc > 0.0)) continue;
    double qroot = std::sqrt(qdisc);
    double lo = std::max(-qb - qroot, chord_lo);
    double hi = std::min(-qb + qroot, chord_hi);
    if (hi > lo) spans.emplace_back(lo, hi);
  }

  std::sort(spans.begin(), spans.end());
  const double merge_tol = 1e-12 * 2.0;  // domain diameter 2
  double covered = 0.0;
  double cur_lo = 0.0, cur_hi = -kInf;
  bool open = false;
  for (const auto& [lo, hi] : spans) {
    if (open && lo <= cur_hi + merge_tol) {
      cur_hi = std::max(cur_hi, hi);
    } else {
      if (open) covered += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
      open = true;
    }
  }
  if (open) covered += cur_hi - cur_lo;

  double free_len = std::max(0.0, (chord_hi - chord_lo) - covered);
  return std::exp2(real.alpha() * n) * free_len;
}

double quadrature_plane(const Realization& realization, const PlaneParam& plane, int n,
                        double tol) {
  require(std::isfinite(tol) && tol > 0.0, "mass_on_plane: tol must be positive");
  auto density = realization.evaluator(n);
  Box box = density->support_box();
  int k = plane.k();
  if (k == 0) return (*density)(plane.basepoint);

  double step_cap = tol * std::ldexp(1.0, -n);
  constexpr double budget = 2147483648.0;  // 2^31 evaluations

  if (k == 1) {
    VecD u = unit_direction(plane);
    double t_lo = 0.0, t_hi = 0.0;
    if (!clip_line_to_box(plane.basepoint, u, box, &t_lo, &t_hi)) return 0.0;
    double len = t_hi - t_lo;
    double want = std::ceil(len / step_cap);
    if (!(want <= budget)) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "mass_on_plane: step underflow, tol %.3g at level %d needs %.3g midpoint "
                    "steps (budget 2^31)",
                    tol, n, want);
      fail_resource(buf);
    }
    std::int64_t m = std::max<std::int64_t>(1, static_cast<std::int64_t>(want));
    double h = len / static_cast<double>(m);
    double sum = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
      double t = t_lo + (static_cast<double>(i) + 0.5) * h;
      sum += (*density)(plane.basepoint + u * t);
    }
    return sum * h;
  }

  require(k == 2, "mass_on_plane: quadrature covers k in {0, 1, 2}");
  // Bounding parameter rectangle: coordinates of the box corners in the
  // orthonormal plane frame (the density vanishes outside the box anyway).
  double lo[2] = {kInf, kInf}, hi[2] = {-kInf, -kInf};
  int d = box.dim();
  for (int corner = 0; corner < (1 << d); ++corner) {
    VecD x(d);
    for (int i = 0; i < d; ++i) x[i] = ((corner >> i) & 1) ? box.hi[i] : box.lo[i];
    VecD rel = x - plane.basepoint;
    for (int j = 0; j < 2; ++j) {
      double c = rel.dot(plane.basis[j]);
      lo[j] = std::min(lo[j], c);
      hi[j] = std::max(hi[j], c);
    }
  }
  double want0 = std::ceil((hi[0] - lo[0]) / step_cap);
  double want1 = std::ceil((hi[1] - lo[1]) / step_cap);
  if (!(want0 * want1 <= budget)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "mass_on_plane: step underflow, tol %.3g at level %d needs %.3g x %.3g "
                  "midpoint cells (budget 2^31)",
                  tol, n, want0, want1);
    fail_resource(buf);
  }
  std::int64_t m0 = std::max<std::int64_t>(1, static_cast<std::int64_t>(want0));
  std::int64_t m1 = std::max<std::int64_t>(1, static_cast<std::int64_t>(want1));
  double h0 = (hi[0] - lo[0]) / static_cast<double>(m0);
  double h1 = (hi[1] - lo[1]) / static_cast<double>(m1);
  double sum = 0.0;
  for (std::int64_t i = 0; i < m0; ++i) {
    double s = lo[0] + (static_cast<double>(i) + 0.5) * h0;
    VecD row = plane.basepoint + plane.basis[0] * s;
    for (std::int64_t j = 0; j < m1; ++j) {
      double t = lo[1] + (static_cast<double>(j) + 0.5) * h1;
      sum += (*density)(row + plane.basis[1] * t);
    }
  }
  return sum * h0 * h1;
}

SimilarityMap compose(const SimilarityMap& outer, const SimilarityMap& inner, int d) {
  SimilarityMap w;
  w.ratio = outer.ratio * inner.ratio;
  w.angle = outer.angle + inner.angle;
  w.translate = outer.apply(inner.translate, d);
  return w;
}

void append_shortest(std::string& out, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

}  // namespace

const char* mass_method_name(MassMethod method) {
  switch (method) {
    case MassMethod::exact: return "exact";
    case MassMethod::quadrature: return "quadrature";
    case MassMethod::cylinder: return "cylinder";
  }
  return "quadrature";
}

bool exact_plane_supported(const Realization& realization, const PlaneParam& plane) {
  if (plane.k() != 1) return false;
  if (realization.empty() || plane.dim() != realization.dim()) return false;
  if (realization.subdivision()) return true;
  const CutoutRealization* real = realization.cutout();
  if (real->domain().kind != DomainKind::ball) return false;
  for (const Cutout& cut : real->cutouts()) {
    if (cut.kind != ShapeKind::ball) return false;
  }
  return true;
}

double mass_on_plane(const Realization& realization, const PlaneParam& plane, int n,
                     MassMethod method, double tol) {
  require(!realization.empty(), "mass_on_plane: empty realization");
  plane.validate();
  require(plane.dim() == realization.dim(), "mass_on_plane: plane dimension mismatch");
  require(n >= 0 && n <= realization.depth(), "mass_on_plane: level out of range [0, depth]");
  switch (method) {
    case MassMethod::exact:
      if (!exact_plane_supported(realization, plane)) {
        fail_unsupported(
            "mass_on_plane: the exact engine covers lines (k = 1) against dyadic subdivision "
            "models or all-ball cutouts in a ball domain");
      }
      if (const SubdivisionTree* tree = realization.subdivision()) {
        return exact_subdivision_line(*tree, plane, n);
      }
      return exact_cutout_line(*realization.cutout(), plane, n);
    case MassMethod::quadrature:
      return quadrature_plane(realization, plane, n, tol);
    case MassMethod::cylinder:
      break;
  }
  fail_validation("mass_on_plane: method must be exact or quadrature");
}

double mass_on_curve(const DensityEvaluator& density, const CurveParam& curve, double step,
                     bool weighted) {
  curve.validate();
  require(density.dim() == 2, "mass_on_curve: curves live in d = 2");
  require(std::isfinite(step) && step > 0.0, "mass_on_curve: step must be positive");

  CurveTrace trace = trace_curve(curve, step);
  double sum = 0.0;
  for (const CurveComponent& comp : trace.components) {
    std::size_t count = comp.points.size();
    if (count < 2) continue;
    std::size_t segments = comp.closed ? count : count - 1;
    for (std::size_t i = 0; i < segments; ++i) {
      const VecD& a = comp.points[i].position;
      const VecD& b = comp.points[(i + 1) % count].position;
      VecD mid = (a + b) * 0.5;
      double f = density(mid);
      if (f == 0.0) continue;
      if (weighted) {
        double g = curve.gradient(mid).norm();
        if (g < 1e-9) {
          fail_singularity("mass_on_curve: gradient below 1e-9 at a segment midpoint");
        }
        f /= g;
      }
      sum += f * a.dist(b);
    }
  }
  return sum;
}

double mass_on_ifs(const DensityEvaluator& density, const IFSParam& ifs, double diam_tol,
                   std::uint64_t leaf_budget) {
  ifs.validate();
  require(density.dim() == ifs.d, "mass_on_ifs: dimension mismatch");
  require(std::isfinite(diam_tol) && diam_tol >= 0.0,
          "mass_on_ifs: diam_tol must be nonnegative");
  if (diam_tol == 0.0) diam_tol = 0.25 * std::ldexp(1.0, -density.level());

  VecD center(ifs.d);
  double radius = 0.0;
  ifs.invariant_ball(&center, &radius);

  struct Node {
    SimilarityMap word;
    double prob;
  };
  SimilarityMap identity;
  identity.ratio = 1.0;
  identity.angle = 0.0;
  identity.translate = VecD(ifs.d);

  std::vector<Node> stack;
  stack.push_back({identity, 1.0});
  std::uint64_t leaves = 0;
  double sum = 0.0;
  std::size_t branch = ifs.maps.size();
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (2.0 * node.word.ratio * radius <= diam_tol) {
      if (++leaves > leaf_budget) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "mass_on_ifs: more than %llu cylinder leaves at diam_tol %.3g",
                      static_cast<unsigned long long>(leaf_budget), diam_tol);
        fail_resource(buf);
      }
      sum += node.prob * density(node.word.apply(center, ifs.d));
      continue;
    }
    // Push children in reverse so they pop in map order; the reduction order
    // is then a fixed depth-first traversal.
    for (std::size_t i = branch; i-- > 0;) {
      stack.push_back({compose(node.word, ifs.maps[i], ifs.d), node.prob * ifs.probs[i]});
    }
  }
  return sum;
}

double MassSequence::limit_value() const {
  require(!values.empty(), "mass sequence: empty");
  return values.back();
}

void MassSequence::validate() const {
  require(!values.empty(), "mass sequence: empty");
  require(increments.size() + 1 == values.size(),
          "mass sequence: needs one increment per consecutive pair");
  for (double v : values) {
    require(std::isfinite(v) && v >= 0.0, "mass sequence: values must be finite and nonnegative");
  }
  for (std::size_t m = 0; m + 1 < values.size(); ++m) {
    double expect = std::fabs(values[m + 1] - values[m]);
    double slack = 1e-12 * std::max(1.0, std::max(values[m], values[m + 1]));
    require(std::fabs(increments[m] - expect) <= slack,
            "mass sequence: increments inconsistent with values");
  }
}

namespace {

// Least-squares slope of ys against xs; fallback when fewer than two points.
double slope_or(const std::vector<double>& xs, const std::vector<double>& ys, double fallback) {
  if (xs.size() < 2) return fallback;
  return fit_line(xs, ys).slope;
}

}  // namespace

double family_mass(const Realization& realization, const FamilySpec& family, int n,
                   const MassOptions& options) {
  if (const PlaneParam* plane = family.plane()) {
    MassMethod method = exact_plane_supported(realization, *plane) ? MassMethod::exact
                                                                   : MassMethod::quadrature;
    return mass_on_plane(realization, *plane, n, method, options.plane_tol);
  }
  if (const CurveParam* curve = family.curve()) {
    auto density = realization.evaluator(n);
    return mass_on_curve(*density, *curve, options.curve_step, options.weighted);
  }
  auto density = realization.evaluator(n);
  return mass_on_ifs(*density, *family.ifs(), options.ifs_diam_tol, options.ifs_leaf_budget);
}

MassSequence mass_sequence(const Realization& realization, const FamilySpec& family, int n_max,
                           const MassOptions& options) {
  require(!realization.empty(), "mass_sequence: empty realization");
  family.validate();
  require(n_max >= 0 && n_max <= realization.depth(),
          "mass_sequence: n_max out of range [0, realization depth]");

  double s = family.frostman_exponent();
  double alpha = realization.alpha();
  if (family.regime == RegimeTag::limit && !(s > alpha)) {
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "mass_sequence: the limit regime requires s > alpha, but family '%s' has "
                  "exponent s = %.6g <= alpha = %.6g; declare regime \"growth\" to study the "
                  "growth rate instead",
                  family.id.c_str(), s, alpha);
    fail_validation(buf);
  }

  MassSequence seq;
  seq.family_id = family.id;
  seq.growth_regime = !(s > alpha);
  seq.values.reserve(static_cast<std::size_t>(n_max) + 1);

  if (const PlaneParam* plane = family.plane()) {
    bool exact = exact_plane_supported(realization, *plane);
    seq.method = exact ? MassMethod::exact : MassMethod::quadrature;
    for (int m = 0; m <= n_max; ++m) {
      seq.values.push_back(mass_on_plane(realization, *plane, m, seq.method, options.plane_tol));
    }
  } else if (const CurveParam* curve = family.curve()) {
    seq.method = MassMethod::quadrature;
    for (int m = 0; m <= n_max; ++m) {
      auto density = realization.evaluator(m);
      seq.values.push_back(mass_on_curve(*density, *curve, options.curve_step, options.weighted));
    }
  } else {
    seq.method = MassMethod::cylinder;
    for (int m = 0; m <= n_max; ++m) {
      auto density = realization.evaluator(m);
      seq.values.push_back(
          mass_on_ifs(*density, *family.ifs(), options.ifs_diam_tol, options.ifs_leaf_budget));
    }
  }

  seq.increments.reserve(static_cast<std::size_t>(n_max));
  for (std::size_t m = 0; m + 1 < seq.values.size(); ++m) {
    seq.increments.push_back(std::fabs(seq.values[m + 1] - seq.values[m]));
  }

  // Geometric-decay fit over the last half of the increments. Increments at
  // the rounding floor of the values are converged, not data.
  double scale = 0.0;
  for (double v : seq.values) scale = std::max(scale, v);
  double floor_inc = 1e-14 * std::max(1.0, scale);
  std::vector<double> xs, ys;
  for (std::size_t m = seq.increments.size() / 2; m < seq.increments.size(); ++m) {
    if (seq.increments[m] > floor_inc) {
      xs.push_back(static_cast<double>(m));
      ys.push_back(std::log2(seq.increments[m]));
    }
  }
  seq.decay_rate = slope_or(xs, ys, -kInf);

  if (seq.growth_regime) {
    xs.clear();
    ys.clear();
    for (std::size_t m = seq.values.size() / 2; m < seq.values.size(); ++m) {
      if (seq.values[m] > 0.0) {
        xs.push_back(static_cast<double>(m));
        ys.push_back(std::log2(seq.values[m]));
      }
    }
    seq.growth_rate = slope_or(xs, ys, 0.0);
  }
  return seq;
}

ProjectionProfile projection_profile(const Realization& realization, const PlaneParam& direction,
                                     int n, int grid_points, const MassOptions& options) {
  require(!realization.empty(), "projection_profile: empty realization");
  direction.validate();
  require(direction.k() == 1, "projection_profile: direction must be a line (k = 1)");
  int d = realization.dim();
  require(direction.dim() == d, "projection_profile: direction dimension mismatch");
  require(d >= 2, "projection_profile: fibers need d >= 2");
  require(n >= 0 && n <= realization.depth(),
          "projection_profile: level out of range [0, depth]");
  require(grid_points >= 2, "projection_profile: need at least 2 grid points");

  VecD u = unit_direction(direction);

  // Fiber frame: orthonormal complement of the direction.
  std::vector<VecD> fiber_basis;
  if (d == 2) {
    VecD v(2);
    v[0] = -u[1];
    v[1] = u[0];
    fiber_basis.push_back(v);
  } else {
    int least = 0;
    for (int i = 1; i < d; ++i) {
      if (std::fabs(u[i]) < std::fabs(u[least])) least = i;
    }
    VecD e(d);
    e[least] = 1.0;
    VecD v1 = e - u * e.dot(u);
    v1 = v1 * (1.0 / v1.norm());
    VecD v2(3);
    v2[0] = u[1] * v1[2] - u[2] * v1[1];
    v2[1] = u[2] * v1[0] - u[0] * v1[2];
    v2[2] = u[0] * v1[1] - u[1] * v1[0];
    fiber_basis.push_back(v1);
    fiber_basis.push_back(v2);
  }

  // Projected support: range of the box corners along the direction.
  Box box = realization.support_box();
  double lo = kInf, hi = -kInf;
  for (int corner = 0; corner < (1 << d); ++corner) {
    VecD x(d);
    for (int i = 0; i < d; ++i) x[i] = ((corner >> i) & 1) ? box.hi[i] : box.lo[i];
    double t = (x - direction.basepoint).dot(u);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }

  ProjectionProfile profile;
  profile.direction = direction;
  profile.level = n;
  profile.spacing = (hi - lo) / grid_points;
  profile.offsets.reserve(static_cast<std::size_t>(grid_points));
  profile.values.reserve(static_cast<std::size_t>(grid_points));

  PlaneParam fiber;
  fiber.basis = fiber_basis;
  fiber.basepoint = direction.basepoint;
  MassMethod method =
      exact_plane_supported(realization, fiber) ? MassMethod::exact : MassMethod::quadrature;
  double sum = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    double t = lo + (static_cast<double>(i) + 0.5) * profile.spacing;
    fiber.basepoint = direction.basepoint + u * t;
    double value = mass_on_plane(realization, fiber, n, method, options.plane_tol);
    profile.offsets.push_back(t);
    profile.values.push_back(value);
    sum += value;
  }
  profile.riemann_mass = sum * profile.spacing;

  if (const SubdivisionTree* tree = realization.subdivision()) {
    profile.reference_mass = tree->total_mass(n);
  } else {
    // Midpoint estimate of the total mass over the support box, at a
    // resolution bounded by a fixed evaluation budget.
    auto density = realization.evaluator(n);
    int per_axis_cap = d == 2 ? 2048 : 160;
    int per_axis = std::min(per_axis_cap, std::max(64, 4 << std::min(n, 24)));
    double cell = 1.0;
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) {
      cell *= (box.hi[i] - box.lo[i]) / per_axis;
      total *= per_axis;
    }
    double mass = 0.0;
    VecD x(d);
    for (std::int64_t flat = 0; flat < total; ++flat) {
      std::int64_t rest = flat;
      for (int i = 0; i < d; ++i) {
        std::int64_t c = rest % per_axis;
        rest /= per_axis;
        x[i] = box.lo[i] + (static_cast<double>(c) + 0.5) * (box.hi[i] - box.lo[i]) / per_axis;
      }
      mass += (*density)(x);
    }
    profile.reference_mass = mass * cell;
  }
  profile.mass_defect = std::fabs(profile.riemann_mass - profile.reference_mass);
  return profile;
}

HolderFit holder_fit(const std::vector<double>& params, const std::vector<double>& values,
                     const std::function<double(double, double)>& metric) {
  require(params.size() == values.size(), "holder_fit: params and values must pair up");
  require(params.size() >= 16, "holder_fit: need at least 16 samples");
  require(params.size() <= 65536, "holder_fit: more than 65536 samples");

  HolderFit fit;
  auto [vmin, vmax] = std::minmax_element(values.begin(), values.end());
  if (*vmin == *vmax) {
    fit.gamma = kInf;
    fit.flat = true;
    return fit;
  }

  // Peak oscillation per dyadic distance band: band j holds pairs at
  // distance in (2^-(j+1), 2^-j]. The regression abscissa is the realized
  // top distance of the band, which stays honest when the sample spacing
  // truncates a band.
  struct Band {
    double osc = 0.0;
    double dist = 0.0;
  };
  std::map<int, Band> bands;
  std::size_t count = params.size();
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = a + 1; b < count; ++b) {
      double dist = metric ? metric(params[a], params[b]) : std::fabs(params[a] - params[b]);
      if (!(dist > 0.0)) continue;
      int j = static_cast<int>(std::floor(-std::log2(dist)));
      double osc = std::fabs(values[a] - values[b]);
      Band& band = bands[j];
      band.osc = std::max(band.osc, osc);
      band.dist = std::max(band.dist, dist);
    }
  }

  std::vector<double> xs, ys;
  int j_lo = 0, j_hi = 0;
  for (const auto& [j, band] : bands) {
    if (band.osc <= 0.0) continue;
    if (xs.empty()) j_lo = j;
    j_hi = j;
    xs.push_back(std::log(band.dist));
    ys.push_back(std::log(band.osc));
  }
  if (xs.size() < 2) {
    fit.gamma = kInf;
    fit.flat = true;
    return fit;
  }
  LinearFit line = fit_line(xs, ys);
  fit.gamma = line.slope;
  fit.k_constant = std::exp(line.intercept);
  fit.scale_lo = j_lo;
  fit.scale_hi = j_hi;
  fit.residual = line.residual_rms;
  return fit;
}

std::string mass_csv_header() { return "replicate,family_id,n,Y,increment,method\n"; }

void append_mass_csv(std::string& out, std::uint64_t replicate, const MassSequence& sequence) {
  char head[48];
  for (std::size_t m = 0; m < sequence.values.size(); ++m) {
    std::snprintf(head, sizeof(head), "%llu,", static_cast<unsigned long long>(replicate));
    out += head;
    out += sequence.family_id;
    std::snprintf(head, sizeof(head), ",%zu,", m);
    out += head;
    append_shortest(out, sequence.values[m]);
    out += ',';
    if (m > 0) append_shortest(out, sequence.increments[m - 1]);
    out += ',';
    out += mass_method_name(sequence.method);
    out += '\n';
  }
}

}  // namespace simart
