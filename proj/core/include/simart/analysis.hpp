#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simart/intersect.hpp"
#include "simart/model.hpp"
#include "simart/raster.hpp"

namespace simart {

enum class DimensionKind : std::uint8_t { box, correlation };

// Log-log regression over dyadic levels: occupied-cell counts for the box
// estimator, inverse participation sums for the correlation estimator.
struct DimensionFit {
  DimensionKind kind = DimensionKind::box;
  int level_lo = 0;  // fit window, inclusive
  int level_hi = 0;
  std::vector<double> per_level;  // log2 count, or -log2 sum of squared masses
  double slope = 0.0;
  double slope_stderr = 0.0;

  std::string to_json() const;
  std::string to_csv() const;  // columns: level, statistic
};

// Slope of log2(occupied cells) against level over the window; the window
// defaults to every populated level. Needs at least 4 populated levels.
DimensionFit box_dimension(const std::vector<std::uint64_t>& counts_per_level,
                           int level_lo = -1, int level_hi = -1);

// Slope of -log2 sum(mass^2) against level, with each level's masses first
// normalized to total 1. Needs at least 4 levels with positive total mass.
DimensionFit correlation_dimension(const std::vector<std::vector<double>>& masses_per_level,
                                   int level_lo = -1, int level_hi = -1);

// Occupied dyadic cells of the realization's surviving set per level
// 0..max_level. Subdivision trees count their cells exactly; cutout sets are
// probed on a lattice of 2^max_level centers per axis (capped at 2^24 cells
// total, beyond that a resource error) and a cell counts as occupied when a
// surviving center lies in it.
std::vector<std::uint64_t> occupied_cell_counts(const Realization& realization, int max_level);

// Level-n density sampled at cell centers over the realization's support box,
// resolution cells per axis. Subdivision trees with 2^n dividing resolution
// come out exact; curved cutout boundaries are midpoint-sampled.
Raster rasterize_density(const Realization& realization, int n, int resolution);

// Empirical tail of the one-step increments |Y_{n+1} - Y_n| over fresh
// replicates, against the thresholds kappa * sqrt(Y_n).
struct TailAudit {
  int level = 0;
  std::uint64_t replicates = 0;
  std::vector<double> kappas;
  std::vector<std::uint64_t> exceed_counts;
  std::vector<double> frequencies;

  // Least-squares slope of log(frequency) against kappa^2 * 2^((s - alpha) n),
  // over the kappas with positive frequency; meaningful only when fitted.
  bool decay_fitted = false;
  double decay_slope = 0.0;

  std::string to_json() const;
  std::string to_csv() const;  // columns: kappa, exceed_count, frequency
};

// Draws `replicates` fresh realizations of the model (seeds seed.child(r)),
// computes Y_n and Y_{n+1} for the family, and tabulates threshold
// exceedances. The family must satisfy s > alpha.
TailAudit increment_tail_audit(const ModelSpec& model, const FamilySpec& family, int n,
                               const std::vector<double>& kappas, std::uint64_t replicates,
                               const SeedPath& seed, const MassOptions& options = {});

}  // namespace simart
