#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "simart/density.hpp"
#include "simart/geometry.hpp"
#include "simart/raster.hpp"
#include "simart/rng.hpp"

namespace simart {

// Discrete weight distribution for cascades: pairs (value, probability).
// Must have mean exactly 1 (within 1e-12) and support inside [0, bound].
struct WeightLaw {
  std::vector<std::pair<double, double>> atoms;
  double bound = 1.0;

  void validate() const;
  double mean() const;
};

enum class SubdivisionKind : std::uint8_t {
  percolation = 0,
  cascade = 1,
  salem_line = 2,
};

// Deterministic branching schedule of the dyadic selection construction on
// [0,1): N_j in {1,2} chosen greedily so that P_n = N_1...N_n tracks 2^(a0 n)
// within a factor of 2.
struct SalemLineSpec {
  double alpha0 = 1.0;
  int depth = 0;
  std::vector<int> branching;       // N_j, j = 1..depth
  std::vector<double> cell_count;   // P_n, n = 0..depth

  static SalemLineSpec make(double alpha0, int depth);
};

// Sparse dyadic weight tree on [0,1)^d. Cells are addressed by (level, index)
// where index packs the child digits root-first, d bits per level. Only cells
// with positive weight are stored; beta(cell) is the running product of the
// weights along the ancestor chain, so the level-n density is beta on each
// surviving cell and 0 elsewhere.
class SubdivisionTree {
 public:
  struct Level {
    std::vector<std::uint64_t> index;
    std::vector<double> weight;
    std::vector<double> beta;
    double mass = 0.0;  // sum of beta * 2^(-d n)
  };

  int dim() const { return d_; }
  int depth() const { return depth_; }
  double growth_bound() const { return growth_; }
  // Codimension of the surviving support: -log2 P(W > 0).
  double alpha() const { return alpha_; }
  SubdivisionKind kind() const { return kind_; }
  const SeedPath& seed() const { return seed_; }
  const Level& level(int n) const;
  std::size_t cell_count(int n) const { return level(n).index.size(); }
  double total_mass(int n) const { return level(n).mass; }
  bool extinct() const { return level(depth_).index.empty(); }

  // Branching schedule for salem_line trees; empty otherwise.
  const std::vector<int>& branching() const { return branching_; }

  // Dyadic cell index of x at the given level.
  std::uint64_t cell_index(const VecD& x, int n) const;

  // beta of the level-n cell containing x, 0 when the cell is dead.
  double beta_at(const VecD& x, int n) const;

  // Level-n density: beta_at for x in [0,1)^d, else 0.
  double density(const VecD& x, int n) const;

  // Mass at level n inside the level-m ancestor cell with the given index.
  double mass_in_cell(int m, std::uint64_t cell, int n) const;

  std::unique_ptr<DensityEvaluator> evaluator(int n) const;

  std::string serialize() const;
  static SubdivisionTree deserialize(const std::string& text);

  static SubdivisionTree percolation(int d, double p, int depth, const SeedPath& seed);
  static SubdivisionTree cascade(int d, const WeightLaw& law, int depth, const SeedPath& seed);
  static SubdivisionTree salem_line(double alpha0, int depth, const SeedPath& seed);

 private:
  void finish_level(Level& lv, int n);

  int d_ = 1;
  int depth_ = 0;
  double growth_ = 1.0;
  double alpha_ = 0.0;
  double param_ = 0.0;  // p or alpha0, for serialization
  SubdivisionKind kind_ = SubdivisionKind::percolation;
  SeedPath seed_;
  std::vector<Level> levels_;
  std::vector<int> branching_;
};

SubdivisionTree generate_percolation(int d, double p, int depth, const SeedPath& seed);
SubdivisionTree generate_cascade(int d, const WeightLaw& law, int depth, const SeedPath& seed);
SubdivisionTree generate_salem_line(double alpha0, int depth, const SeedPath& seed);

// Piecewise-constant raster of the level-n density on [0,1)^d. Resolution must
// be a power of two >= 2^n; every raster cell inside a surviving dyadic cell
// carries its beta, so the raster mass equals the tree mass exactly.
Raster density_field(const SubdivisionTree& tree, int n, int resolution);

}  // namespace simart
