#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "simart/model.hpp"
#include "simart/raster.hpp"

namespace simart {

// mu_hat(k) = integral of e^(-2 pi i k.x) against the measure, as an exact
// sum of per-cell closed-form integrals of the piecewise-constant density.
// No sampling or transform truncation is involved.
std::complex<double> fourier_coefficient(const Raster& field, const std::vector<double>& k);

// Same transform straight off the surviving level-n cells of a tree.
std::complex<double> fourier_coefficient(const SubdivisionTree& tree, int n,
                                         const std::vector<double>& k);

// Dyadic-band peaks of |mu_hat| at integer frequencies and the decay-rate
// regression: band m collects frequencies with 2^m <= |k| < 2^(m+1), and
// sigma_hat is the decay exponent |mu_hat(k)| ~ |k|^-sigma over the bands
// below the top one (the top band aliases against the cell scale).
struct SpectrumReport {
  int level = 0;
  int k_max = 0;
  double mass = 0.0;               // |mu_hat(0)|, the total mass
  std::vector<double> band_peaks;  // index m = 0.. holds sup over 2^m <= |k| < 2^(m+1)
  double sigma_hat = 0.0;          // +infinity when every usable band is zero
  double sigma_stderr = 0.0;
  double fourier_dimension = 0.0;  // 2 * sigma_hat

  std::string to_json() const;
  std::string to_csv() const;  // columns: band, peak
};

// Band table for the level-n measure of the realization, d in {1, 2}. k_max
// must be a power of two, at least 32. Subdivision trees use exact cell
// transforms; cutout realizations are first rasterized at 2^(n+2) cells per
// axis (or k_max * 4, whichever is larger, capped at 2^12 per axis in d = 2).
SpectrumReport fourier_dimension_estimate(const Realization& realization, int n, int k_max);

}  // namespace simart
