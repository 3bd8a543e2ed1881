#include "simart/cutout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace simart {

namespace {

double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 3.141592653589793;
    default: return 4.0 * 3.141592653589793 / 3.0;
  }
}

}  // namespace

const char* shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::ball: return "ball";
    case ShapeKind::snowflake: return "snowflake";
    case ShapeKind::rotated_snowflake: return "rotated_snowflake";
  }
  return "ball";
}

ShapeKind shape_kind_from_name(const std::string& name) {
  if (name == "ball") return ShapeKind::ball;
  if (name == "snowflake") return ShapeKind::snowflake;
  if (name == "rotated_snowflake") return ShapeKind::rotated_snowflake;
  fail_validation("unknown shape kind: " + name);
}

double IntensitySpec::total_weight() const {
  double r = 0.0;
  for (const auto& a : atoms) r += a.weight;
  return r;
}

void IntensitySpec::validate(int d) const {
  require(d >= 1 && d <= 3, "intensity: dimension must be 1, 2 or 3");
  require(snowflake_depth >= 0 && snowflake_depth <= 16,
          "intensity: snowflake depth out of range [0, 16]");
  for (const auto& a : atoms) {
    require(std::isfinite(a.weight) && a.weight >= 0.0,
            "intensity: atom weights must be finite and non-negative");
    if (a.kind != ShapeKind::ball) {
      require(d == 2, "intensity: snowflake shapes exist in d = 2 only");
    }
  }
}

double shape_volume(ShapeKind kind, int d, int snowflake_depth) {
  if (kind == ShapeKind::ball) {
    return unit_ball_volume(d) * std::pow(0.5, d);
  }
  require(d == 2, "shape_volume: snowflake shapes exist in d = 2 only");
  return snowflake_area(snowflake_depth);
}

double alpha_of_intensity(const IntensitySpec& spec, int d) {
  spec.validate(d);
  double alpha = 0.0;
  for (const auto& a : spec.atoms) alpha += a.weight * shape_volume(a.kind, d, spec.snowflake_depth);
  return alpha;
}

void Domain::validate() const {
  require(d >= 1 && d <= 3, "domain: dimension must be 1, 2 or 3");
  if (kind == DomainKind::snowflake) {
    require(d == 2, "domain: snowflake domain exists in d = 2 only");
    require(snowflake_depth >= 0 && snowflake_depth <= 16,
            "domain: snowflake depth out of range [0, 16]");
  }
}

bool Domain::contains(const VecD& x) const {
  if (kind == DomainKind::ball) return x.norm2() <= 1.0;
  return snowflake_contains(x, snowflake_depth);
}

double Domain::distance(const VecD& x) const {
  if (kind == DomainKind::ball) return std::max(0.0, x.norm() - 1.0);
  return snowflake_distance(x, snowflake_depth);
}

double Domain::volume() const {
  if (kind == DomainKind::ball) return unit_ball_volume(d);
  return snowflake_area(snowflake_depth);
}

Box Domain::bounding_box() const {
  if (kind == DomainKind::ball) return Box::centered(d, 1.0);
  return snowflake_bounding_box();
}

namespace {

struct BandSetup {
  double s_lo = 0.0;
  double s_hi = 0.0;
  double inv_lo = 0.0;   // s_lo^-d
  double inv_hi = 0.0;   // s_hi^-d
  double lambda_bar = 0.0;
  Box draw_box;          // centers are drawn uniformly here, then thinned
  bool reject_to_ball = false;
  double ball_radius = 0.0;
};

BandSetup band_setup(const IntensitySpec& spec, const Domain& domain, int band) {
  BandSetup b;
  b.s_hi = std::pow(0.5, band);
  b.s_lo = 0.5 * b.s_hi;
  int d = domain.d;
  b.inv_lo = std::pow(b.s_lo, -d);
  b.inv_hi = std::pow(b.s_hi, -d);
  double scale_integral = (b.inv_lo - b.inv_hi) / d;

  double draw_volume;
  if (domain.kind == DomainKind::ball) {
    b.reject_to_ball = true;
    b.ball_radius = 1.0 + b.s_hi;
    b.draw_box = Box::centered(d, b.ball_radius);
    draw_volume = unit_ball_volume(d) * std::pow(b.ball_radius, d);
  } else {
    b.draw_box = domain.bounding_box().inflated(b.s_hi);
    draw_volume = b.draw_box.volume();
  }
  b.lambda_bar = spec.total_weight() * draw_volume * scale_integral;
  return b;
}

// Scale with density proportional to s^-(d+1) on [s_lo, s_hi).
inline double draw_scale(Stream& stream, const BandSetup& b, int d) {
  double u = stream.next_unit();
  double t = b.inv_lo - u * (b.inv_lo - b.inv_hi);
  if (d == 1) return 1.0 / t;
  if (d == 2) return 1.0 / std::sqrt(t);
  return 1.0 / std::cbrt(t);
}

// Center uniform on the dominating region of the band.
inline VecD draw_center(Stream& stream, const BandSetup& b, int d) {
  if (!b.reject_to_ball) return sample_in_box(stream, b.draw_box);
  for (;;) {
    VecD c(d);
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      c[i] = stream.next_in(-b.ball_radius, b.ball_radius);
      r2 += c[i] * c[i];
    }
    if (r2 <= b.ball_radius * b.ball_radius) return c;
  }
}

// Generates the band's cutouts in draw order and feeds the kept ones to emit.
// Returns false when emit stopped the scan. generated counts the post-thinning
// points (the quantity whose law is Poisson with the slab-intensity mean).
template <typename Emit>
bool sample_band(const IntensitySpec& spec, const Domain& domain, int band, Stream& stream,
                 std::uint64_t* generated, Emit&& emit) {
  BandSetup b = band_setup(spec, domain, band);
  int d = domain.d;
  double total_weight = spec.total_weight();
  bool ball_domain = domain.kind == DomainKind::ball;
  std::uint64_t count = poisson(stream, b.lambda_bar);

  for (std::uint64_t i = 0; i < count; ++i) {
    double s = draw_scale(stream, b, d);
    VecD c = draw_center(stream, b, d);

    // Thin the dominating draw down to the slab dist(c, domain) <= s.
    double dist = ball_domain ? std::max(0.0, c.norm() - 1.0) : domain.distance(c);
    if (dist > s) continue;
    ++*generated;

    Cutout cut;
    cut.c[0] = c[0];
    cut.c[1] = c[1];
    cut.c[2] = c[2];
    cut.s = s;
    cut.kind = spec.atoms.size() == 1 ? spec.atoms[0].kind : ShapeKind::ball;
    if (spec.atoms.size() > 1) {
      double pick = stream.next_unit() * total_weight;
      double acc = 0.0;
      for (const auto& a : spec.atoms) {
        acc += a.weight;
        if (pick < acc || &a == &spec.atoms.back()) {
          cut.kind = a.kind;
          break;
        }
      }
    }
    if (cut.kind == ShapeKind::rotated_snowflake) {
      cut.rot = stream.next_in(0.0, 2.0 * 3.141592653589793);
    }

    // Keep only shapes that can meet the domain: exact for balls, circumball
    // bound for snowflake shapes (keeps every intersecting shape).
    if (dist > 0.5 * s) continue;
    if (!emit(cut)) return false;
  }
  return true;
}

}  // namespace

double expected_band_count(const IntensitySpec& spec, const Domain& domain, int band) {
  spec.validate(domain.d);
  domain.validate();
  require(band >= 0, "expected_band_count: band must be non-negative");
  if (domain.kind != DomainKind::ball) {
    fail_unsupported("expected_band_count: closed form exists for ball domains only");
  }
  int d = domain.d;
  double s_hi = std::pow(0.5, band);
  double s_lo = 0.5 * s_hi;
  // integral over the band of s^-(d+1) * v_d (1+s)^d ds, binomial expansion.
  double sum = 0.0;
  double binom = 1.0;
  for (int j = 0; j < d; ++j) {
    // binom = C(d, j)
    sum += binom * (std::pow(s_lo, j - d) - std::pow(s_hi, j - d)) / (d - j);
    binom = binom * (d - j) / (j + 1);
  }
  sum += std::log(2.0);  // j = d term
  return spec.total_weight() * unit_ball_volume(d) * sum;
}

CutoutRealization sample_cutouts(const IntensitySpec& spec, const Domain& domain, int depth,
                                 const SeedPath& seed, const SampleOptions& options) {
  spec.validate(domain.d);
  domain.validate();
  require(depth >= 0 && depth <= 254, "sample_cutouts: depth out of range [0, 254]");

  double expected = 0.0;
  for (int k = 0; k < depth; ++k) expected += band_setup(spec, domain, k).lambda_bar;
  if (expected > options.max_expected_count) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "sample_cutouts: expected count %.3g exceeds cap %.3g",
                  expected, options.max_expected_count);
    fail_resource(buf);
  }

  CutoutRealization real;
  real.domain_ = domain;
  real.depth_ = depth;
  real.alpha_ = alpha_of_intensity(spec, domain.d);
  real.spec_snowflake_depth_ = spec.snowflake_depth;
  real.intensity_ = spec;
  real.seed_ = seed;
  real.band_counts_.assign(static_cast<std::size_t>(depth), 0);

  for (int k = 0; k < depth; ++k) {
    Stream stream = derive_stream(seed.child(static_cast<std::uint64_t>(k)));
    sample_band(spec, domain, k, stream, &real.band_counts_[static_cast<std::size_t>(k)],
                [&](const Cutout& cut) {
                  real.cutouts_.push_back(cut);
                  return true;
                });
  }
  return real;
}

int sample_first_cover_level(const IntensitySpec& spec, const Domain& domain, int depth,
                             const SeedPath& seed, const VecD& x) {
  spec.validate(domain.d);
  domain.validate();
  require(depth >= 0 && depth <= 254, "sample_first_cover_level: depth out of range");

  int snow_depth = spec.snowflake_depth;
  for (int k = 0; k < depth; ++k) {
    Stream stream = derive_stream(seed.child(static_cast<std::uint64_t>(k)));
    std::uint64_t generated = 0;
    bool covered = false;
    sample_band(spec, domain, k, stream, &generated, [&](const Cutout& cut) {
      double dx = x[0] - cut.c[0], dy = x[1] - cut.c[1], dz = x[2] - cut.c[2];
      double r2 = dx * dx + dy * dy + dz * dz;
      double reach = 0.5 * cut.s;
      if (r2 > reach * reach) return true;
      if (cut.kind == ShapeKind::ball) {
        covered = true;
        return false;
      }
      VecD local(domain.d);
      double inv = 1.0 / cut.s;
      local[0] = dx * inv;
      local[1] = dy * inv;
      if (cut.kind == ShapeKind::rotated_snowflake) {
        double cr = std::cos(-cut.rot), sr = std::sin(-cut.rot);
        double lx = local[0] * cr - local[1] * sr;
        double ly = local[0] * sr + local[1] * cr;
        local[0] = lx;
        local[1] = ly;
      }
      if (snowflake_contains(local, snow_depth)) {
        covered = true;
        return false;
      }
      return true;
    });
    if (covered) return k + 1;
  }
  return depth + 1;
}

CoverGrid sample_cover_grid(const IntensitySpec& spec, const Domain& domain, int depth,
                            const SeedPath& seed, int cells_per_axis,
                            const SampleOptions& options) {
  spec.validate(domain.d);
  domain.validate();
  require(domain.d <= 2, "sample_cover_grid: 1d and 2d only");
  require(depth >= 0 && depth <= 254, "sample_cover_grid: depth out of range");
  require(cells_per_axis >= 1 && cells_per_axis <= 16384, "sample_cover_grid: bad resolution");

  double expected = 0.0;
  for (int k = 0; k < depth; ++k) expected += band_setup(spec, domain, k).lambda_bar;
  if (expected > options.max_expected_count) {
    fail_resource("sample_cover_grid: expected count exceeds cap");
  }

  Box bbox = domain.bounding_box();
  CoverGrid grid;
  grid.d = domain.d;
  grid.cells_per_axis = cells_per_axis;
  grid.origin = bbox.lo;
  double extent = 0.0;
  for (int i = 0; i < domain.d; ++i) extent = std::max(extent, bbox.hi[i] - bbox.lo[i]);
  grid.h = extent / cells_per_axis;
  grid.depth = depth;
  int ny = domain.d == 2 ? cells_per_axis : 1;
  grid.level.assign(static_cast<std::size_t>(cells_per_axis) * static_cast<std::size_t>(ny),
                    static_cast<std::uint8_t>(depth + 1));

  // Mark centers outside the domain with 0 so survivor masks skip them.
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < cells_per_axis; ++ix) {
      VecD p(domain.d);
      p[0] = grid.origin[0] + (ix + 0.5) * grid.h;
      if (domain.d == 2) p[1] = grid.origin[1] + (iy + 0.5) * grid.h;
      if (!domain.contains(p)) grid.level[grid.index(ix, iy)] = 0;
    }
  }

  double ox = grid.origin[0];
  double oy = domain.d == 2 ? grid.origin[1] : 0.0;
  double inv_h = 1.0 / grid.h;
  int snow_depth = spec.snowflake_depth;

  for (int k = 0; k < depth; ++k) {
    Stream stream = derive_stream(seed.child(static_cast<std::uint64_t>(k)));
    std::uint64_t generated = 0;
    auto mark = static_cast<std::uint8_t>(k + 1);
    sample_band(spec, domain, k, stream, &generated, [&](const Cutout& cut) {
      double reach = 0.5 * cut.s;
      if (domain.d == 1) {
        int ix0 = std::max(0, static_cast<int>(std::ceil((cut.c[0] - reach - ox) * inv_h - 0.5)));
        int ix1 = std::min(cells_per_axis - 1,
                           static_cast<int>(std::floor((cut.c[0] + reach - ox) * inv_h - 0.5)));
        for (int ix = ix0; ix <= ix1; ++ix) {
          auto& lv = grid.level[static_cast<std::size_t>(ix)];
          if (lv > mark) lv = mark;
        }
        return true;
      }
      int iy0 = std::max(0, static_cast<int>(std::ceil((cut.c[1] - reach - oy) * inv_h - 0.5)));
      int iy1 = std::min(ny - 1,
                         static_cast<int>(std::floor((cut.c[1] + reach - oy) * inv_h - 0.5)));
      if (cut.kind == ShapeKind::ball) {
        double r2 = reach * reach;
        for (int iy = iy0; iy <= iy1; ++iy) {
          double dy = oy + (iy + 0.5) * grid.h - cut.c[1];
          double t = r2 - dy * dy;
          if (t < 0.0) continue;
          double hw = std::sqrt(t);
          int ix0 = std::max(0, static_cast<int>(std::ceil((cut.c[0] - hw - ox) * inv_h - 0.5)));
          int ix1 = std::min(cells_per_axis - 1,
                             static_cast<int>(std::floor((cut.c[0] + hw - ox) * inv_h - 0.5)));
          std::size_t base = static_cast<std::size_t>(iy) * static_cast<std::size_t>(cells_per_axis);
          for (int ix = ix0; ix <= ix1; ++ix) {
            auto& lv = grid.level[base + static_cast<std::size_t>(ix)];
            if (lv > mark) lv = mark;
          }
        }
        return true;
      }
      // Snowflake shapes: per-center membership over the bounding square.
      double cr = 1.0, sr = 0.0;
      if (cut.kind == ShapeKind::rotated_snowflake) {
        cr = std::cos(-cut.rot);
        sr = std::sin(-cut.rot);
      }
      double inv_s = 1.0 / cut.s;
      int ix0 = std::max(0, static_cast<int>(std::ceil((cut.c[0] - reach - ox) * inv_h - 0.5)));
      int ix1 = std::min(cells_per_axis - 1,
                         static_cast<int>(std::floor((cut.c[0] + reach - ox) * inv_h - 0.5)));
      for (int iy = iy0; iy <= iy1; ++iy) {
        double dy = oy + (iy + 0.5) * grid.h - cut.c[1];
        std::size_t base = static_cast<std::size_t>(iy) * static_cast<std::size_t>(cells_per_axis);
        for (int ix = ix0; ix <= ix1; ++ix) {
          auto& lv = grid.level[base + static_cast<std::size_t>(ix)];
          if (lv <= mark) continue;
          double dx = ox + (ix + 0.5) * grid.h - cut.c[0];
          VecD local(2);
          local[0] = (dx * cr - dy * sr) * inv_s;
          local[1] = (dx * sr + dy * cr) * inv_s;
          if (snowflake_contains(local, snow_depth)) lv = mark;
        }
      }
      return true;
    });
  }
  return grid;
}

bool CutoutRealization::cutout_covers(const Cutout& cut, const VecD& x) const {
  double dx = x[0] - cut.c[0], dy = x[1] - cut.c[1], dz = x[2] - cut.c[2];
  double r2 = dx * dx + dy * dy + dz * dz;
  double reach = 0.5 * cut.s * shrink_;
  if (r2 > reach * reach) return false;
  if (cut.kind == ShapeKind::ball) return true;
  double inv = 1.0 / (cut.s * shrink_);
  VecD local(2);
  local[0] = dx * inv;
  local[1] = dy * inv;
  if (cut.kind == ShapeKind::rotated_snowflake) {
    double cr = std::cos(-cut.rot), sr = std::sin(-cut.rot);
    double lx = local[0] * cr - local[1] * sr;
    double ly = local[0] * sr + local[1] * cr;
    local[0] = lx;
    local[1] = ly;
  }
  return snowflake_contains(local, spec_snowflake_depth_);
}

void CutoutRealization::build_index() const {
  index_.assign(static_cast<std::size_t>(depth_), BandIndex{});
  Box bbox = domain_.bounding_box();
  int d = domain_.d;

  // Count cutouts per band first so each band's arrays can be sized exactly.
  std::vector<std::vector<std::uint32_t>> by_band(static_cast<std::size_t>(depth_));
  for (std::uint32_t i = 0; i < cutouts_.size(); ++i) {
    double s = cutouts_[i].s;
    int band = static_cast<int>(std::floor(-std::log2(s)));
    band = std::clamp(band, 0, depth_ - 1);
    // Guard against log2 landing on a band edge: band k holds [2^-(k+1), 2^-k).
    while (band > 0 && s >= std::pow(0.5, band)) --band;
    while (band < depth_ - 1 && s < std::pow(0.5, band + 1)) ++band;
    by_band[static_cast<std::size_t>(band)].push_back(i);
  }

  for (int k = 0; k < depth_; ++k) {
    BandIndex& bi = index_[static_cast<std::size_t>(k)];
    double s_hi = std::pow(0.5, k);
    Box slab = bbox.inflated(s_hi);
    bi.origin = slab.lo;
    double extent = 0.0;
    for (int i = 0; i < d; ++i) extent = std::max(extent, slab.hi[i] - slab.lo[i]);
    double cell = s_hi;
    bi.cells_per_axis = std::max(1, static_cast<int>(std::ceil(extent / cell)));
    bi.inv_cell = 1.0 / cell;

    std::size_t cell_total = 1;
    for (int i = 0; i < d; ++i) cell_total *= static_cast<std::size_t>(bi.cells_per_axis);
    bi.offsets.assign(cell_total + 1, 0);

    auto cell_range = [&](const Cutout& cut, int axis, int* lo, int* hi_out) {
      double reach = 0.5 * cut.s * shrink_;
      *lo = std::clamp(static_cast<int>(std::floor((cut.c[axis] - reach - bi.origin[axis]) * bi.inv_cell)),
                       0, bi.cells_per_axis - 1);
      *hi_out = std::clamp(static_cast<int>(std::floor((cut.c[axis] + reach - bi.origin[axis]) * bi.inv_cell)),
                           0, bi.cells_per_axis - 1);
    };

    const auto& members = by_band[static_cast<std::size_t>(k)];
    auto visit_cells = [&](const Cutout& cut, auto&& fn) {
      int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
      for (int axis = 0; axis < d; ++axis) cell_range(cut, axis, &lo[axis], &hi[axis]);
      for (int z = lo[2]; z <= hi[2]; ++z)
        for (int y = lo[1]; y <= hi[1]; ++y)
          for (int x = lo[0]; x <= hi[0]; ++x) {
            std::size_t idx = static_cast<std::size_t>(x);
            if (d >= 2) idx += static_cast<std::size_t>(y) * static_cast<std::size_t>(bi.cells_per_axis);
            if (d == 3)
              idx += static_cast<std::size_t>(z) * static_cast<std::size_t>(bi.cells_per_axis) *
                     static_cast<std::size_t>(bi.cells_per_axis);
            fn(idx);
          }
    };

    for (std::uint32_t id : members) {
      visit_cells(cutouts_[id], [&](std::size_t idx) { ++bi.offsets[idx + 1]; });
    }
    for (std::size_t i = 1; i < bi.offsets.size(); ++i) bi.offsets[i] += bi.offsets[i - 1];
    bi.entries.assign(bi.offsets.back(), 0);
    std::vector<std::uint32_t> cursor(bi.offsets.begin(), bi.offsets.end() - 1);
    for (std::uint32_t id : members) {
      visit_cells(cutouts_[id], [&](std::size_t idx) { bi.entries[cursor[idx]++] = id; });
    }
  }
  index_built_ = true;
}

bool CutoutRealization::band_covers(int band, const VecD& x) const {
  const BandIndex& bi = index_[static_cast<std::size_t>(band)];
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int axis = 0; axis < domain_.d; ++axis) {
    int c = static_cast<int>(std::floor((x[axis] - bi.origin[axis]) * bi.inv_cell));
    if (c < 0 || c >= bi.cells_per_axis) return false;
    idx += static_cast<std::size_t>(c) * stride;
    stride *= static_cast<std::size_t>(bi.cells_per_axis);
  }
  for (std::uint32_t e = bi.offsets[idx]; e < bi.offsets[idx + 1]; ++e) {
    if (cutout_covers(cutouts_[bi.entries[e]], x)) return true;
  }
  return false;
}

bool CutoutRealization::covered_at(const VecD& x, int n) const {
  require(n >= 0 && n <= depth_, "covered_at: level out of range [0, depth]");
  if (!index_built_) build_index();
  for (int k = 0; k < n; ++k) {
    if (band_covers(k, x)) return true;
  }
  return false;
}

int CutoutRealization::first_cover_level(const VecD& x) const {
  if (!index_built_) build_index();
  for (int n = 1; n <= depth_; ++n) {
    if (band_covers(n - 1, x)) return n;
  }
  return depth_ + 1;
}

double CutoutRealization::density(const VecD& x, int n) const {
  require(n >= 0 && n <= depth_, "density: level out of range [0, depth]");
  if (!domain_.contains(x)) return 0.0;
  if (covered_at(x, n)) return 0.0;
  return std::exp2(alpha_ * n);
}

namespace {

class CutoutDensity final : public DensityEvaluator {
 public:
  CutoutDensity(const CutoutRealization* real, int n) : real_(real), n_(n) {}
  int dim() const override { return real_->domain().d; }
  int level() const override { return n_; }
  double growth_bound() const override { return std::exp2(real_->alpha()); }
  Box support_box() const override { return real_->domain().bounding_box(); }
  double operator()(const VecD& x) const override { return real_->density(x, n_); }
  const CutoutRealization* realization() const { return real_; }

 private:
  const CutoutRealization* real_;
  int n_;
};

}  // namespace

std::unique_ptr<DensityEvaluator> CutoutRealization::evaluator(int n) const {
  require(n >= 0 && n <= depth_, "evaluator: level out of range [0, depth]");
  return std::make_unique<CutoutDensity>(this, n);
}

CutoutRealization CutoutRealization::inner_approximation(double rho) const {
  require(rho > 0.0 && rho < 1.0, "inner_approximation: rho must lie in (0, 1)");
  for (const auto& cut : cutouts_) {
    if (cut.kind != ShapeKind::ball) {
      fail_unsupported("inner_approximation: ball shapes only");
    }
  }
  CutoutRealization out = *this;
  out.index_.clear();
  out.index_built_ = false;
  out.alpha_ = alpha_ * (1.0 - rho);
  out.shrink_ = shrink_ * std::pow(1.0 - rho, 1.0 / domain_.d);
  return out;
}

double evaluate_cutout_density(const CutoutRealization& realization, const VecD& x, int n) {
  return realization.density(x, n);
}

}  // namespace simart
