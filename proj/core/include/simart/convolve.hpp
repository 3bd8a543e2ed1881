#pragma once

#include <string>

#include "simart/geometry.hpp"
#include "simart/raster.hpp"

namespace simart {

// Density raster of muA * S#muB on the sumset box supp(A) + S supp(B).
struct ConvolutionGrid {
  int resolution = 0;   // requested cells per axis (power of two)
  MatD map;             // S
  Raster density;       // square cells; mass = density * h^d
  double mass_a = 0.0;
  double mass_b = 0.0;
  double sup_value = 0.0;
  Box support;          // bounding box of the positive cells
  // Set when the caller marks both fields as views of one realization and
  // S + I is within 1e-9 of singular, the excluded self-convolution set.
  bool near_excluded = false;

  std::string to_json() const;  // grid summary; the raster itself exports via write_raw
};

// Pushes field B forward through the invertible map S (mass-preserving, the
// |det S| Jacobian lands in the density), rebins both fields to the common
// output spacing, convolves, and normalizes the total mass to
// mass(A) * mass(B) exactly. d in {1, 2}; resolution a power of two.
ConvolutionGrid convolve(const Raster& a, const Raster& b, const MatD& S, int resolution,
                         bool same_realization = false);

// Largest axis-aligned box where the convolution density stays above
// threshold_fraction times its median positive value. empty = no cell passes.
struct IntervalReport {
  bool empty = true;
  Box box;
  double threshold = 0.0;  // absolute density cutoff applied
  double threshold_coarse = 0.0;  // cutoff of the second grid, when given

  std::string to_json() const;
};

IntervalReport sumset_interior(const ConvolutionGrid& grid, double threshold_fraction);

// Interior stable across depths: the box must clear each grid's own
// threshold on both grids (the coarse mask is looked up at the fine grid's
// cell centers).
IntervalReport sumset_interior(const ConvolutionGrid& fine, const ConvolutionGrid& coarse,
                               double threshold_fraction);

}  // namespace simart
