#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "simart/density.hpp"
#include "simart/geometry.hpp"
#include "simart/rng.hpp"
#include "simart/snowflake.hpp"

namespace simart {

// Cutout shapes are canonical diameter-1 regions centered at the origin and
// symmetric under point reflection; a cutout instance is c + s * R(rot) * shape,
// so it fits in the closed ball of radius s/2 around its center.
enum class ShapeKind : std::uint8_t {
  ball = 0,
  snowflake = 1,
  rotated_snowflake = 2,
};

const char* shape_kind_name(ShapeKind kind);
ShapeKind shape_kind_from_name(const std::string& name);

struct IntensityAtom {
  ShapeKind kind = ShapeKind::ball;
  double weight = 0.0;
};

// Atoms of the shape distribution together with their rate weights. The decay
// exponent of the survival law is alpha = sum of weight * volume(shape).
struct IntensitySpec {
  std::vector<IntensityAtom> atoms;
  int snowflake_depth = default_snowflake_depth;

  double total_weight() const;
  void validate(int d) const;
};

// Volume of the canonical diameter-1 shape.
double shape_volume(ShapeKind kind, int d, int snowflake_depth);

double alpha_of_intensity(const IntensitySpec& spec, int d);

enum class DomainKind : std::uint8_t {
  ball = 0,       // closed unit ball (radius 1)
  snowflake = 1,  // canonical diameter-1 region, d = 2 only
};

struct Domain {
  DomainKind kind = DomainKind::ball;
  int d = 2;
  int snowflake_depth = default_snowflake_depth;

  void validate() const;
  bool contains(const VecD& x) const;
  double distance(const VecD& x) const;  // 0 inside
  double volume() const;
  Box bounding_box() const;
};

struct Cutout {
  double c[3] = {0.0, 0.0, 0.0};
  double s = 0.0;    // sampled scale; also the level threshold
  double rot = 0.0;  // rotation angle, radians
  ShapeKind kind = ShapeKind::ball;

  VecD center(int d) const {
    VecD v(d);
    v.c = {c[0], c[1], c[2]};
    return v;
  }
};

struct SampleOptions {
  // Abort with a resource error when the expected number of generated points
  // across all bands exceeds this.
  double max_expected_count = 1e8;
};

class CutoutRealization;

CutoutRealization sample_cutouts(const IntensitySpec& spec, const Domain& domain, int depth,
                                 const SeedPath& seed, const SampleOptions& options = {});

// One realization of the cutout process: the kept shapes, the derived decay
// exponent, and enough bookkeeping to answer density queries quickly.
class CutoutRealization {
 public:
  const Domain& domain() const { return domain_; }
  int depth() const { return depth_; }
  double alpha() const { return alpha_; }
  const SeedPath& seed() const { return seed_; }
  const std::vector<Cutout>& cutouts() const { return cutouts_; }
  // Post-thinning count of generated points per scale band (before the
  // "shape meets the domain" filter); Poisson with the slab-intensity mean.
  const std::vector<std::uint64_t>& band_counts() const { return band_counts_; }
  // Geometry shrink factor applied to every shape; 1 for sampled
  // realizations, (1-rho)^(1/d) for inner approximations.
  double shrink() const { return shrink_; }
  int snowflake_depth() const { return spec_snowflake_depth_; }
  const IntensitySpec& intensity() const { return intensity_; }

  // True when x lies in a cutout whose threshold scale is >= 2^-n.
  bool covered_at(const VecD& x, int n) const;

  // Smallest n >= 1 such that x is covered at level n; depth+1 when x stays
  // uncovered through the full realization.
  int first_cover_level(const VecD& x) const;

  // Level-n density: 2^(alpha n) on the surviving part of the domain, else 0.
  double density(const VecD& x, int n) const;

  std::unique_ptr<DensityEvaluator> evaluator(int n) const;

  // Shrinks every shape about its center by (1-rho)^(1/d) and scales alpha by
  // (1-rho). Ball shapes only.
  CutoutRealization inner_approximation(double rho) const;

  std::string to_json() const;
  static CutoutRealization from_json(const std::string& text);

 private:
  friend CutoutRealization sample_cutouts(const IntensitySpec&, const Domain&, int,
                                          const SeedPath&, const SampleOptions&);

  void build_index() const;
  bool cutout_covers(const Cutout& cut, const VecD& x) const;
  bool band_covers(int band, const VecD& x) const;

  Domain domain_;
  int depth_ = 0;
  double alpha_ = 0.0;
  double shrink_ = 1.0;
  int spec_snowflake_depth_ = default_snowflake_depth;
  IntensitySpec intensity_;
  SeedPath seed_;
  std::vector<Cutout> cutouts_;
  std::vector<std::uint64_t> band_counts_;

  // Per-band uniform grids over the slab box, CSR layout, built on first
  // density query. A cutout is listed in every grid cell its bounding box
  // touches; band-k cells have edge 2^-k, so that is at most 2^d cells.
  struct BandIndex {
    int cells_per_axis = 0;
    double inv_cell = 0.0;
    VecD origin;
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> entries;
  };
  mutable std::vector<BandIndex> index_;
  mutable bool index_built_ = false;
};

double evaluate_cutout_density(const CutoutRealization& realization, const VecD& x, int n);

// Expected number of generated points in one scale band: the slab-intensity
// integral of the thinned process. Closed form for ball domains only.
double expected_band_count(const IntensitySpec& spec, const Domain& domain, int band);

// Streaming variant of sample_cutouts that only reports when the fixed point
// first gets covered, with the same per-band laws and stream discipline. Never
// materializes the realization; bands after the first covering one are skipped.
int sample_first_cover_level(const IntensitySpec& spec, const Domain& domain, int depth,
                             const SeedPath& seed, const VecD& x);

// First-cover levels on a uniform lattice of cell centers over the domain's
// bounding box, computed by streaming the cutouts through a rasterizer. Entry
// value depth+1 means the center survives the whole realization; entry value 0
// marks centers outside the domain. Lattice cell edge is the largest box
// extent / cells_per_axis.
struct CoverGrid {
  int d = 2;
  int cells_per_axis = 0;
  VecD origin;
  double h = 0.0;
  int depth = 0;
  std::vector<std::uint8_t> level;

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(cells_per_axis) +
           static_cast<std::size_t>(ix);
  }
};

CoverGrid sample_cover_grid(const IntensitySpec& spec, const Domain& domain, int depth,
                            const SeedPath& seed, int cells_per_axis,
                            const SampleOptions& options = {});

}  // namespace simart
