#pragma once

#include "simart/geometry.hpp"

namespace simart {

// Pointwise view of one approximation level of a realized random measure:
// x -> density of the level-n measure with respect to Lebesgue. Implemented
// by the model classes; consumed by the generic quadrature and analysis code.
class DensityEvaluator {
 public:
  virtual ~DensityEvaluator() = default;

  virtual int dim() const = 0;
  virtual int level() const = 0;
  // C such that the level-(n+1) density never exceeds C times the level-n
  // density at any point.
  virtual double growth_bound() const = 0;
  // Box outside which the density vanishes.
  virtual Box support_box() const = 0;
  virtual double operator()(const VecD& x) const = 0;
};

}  // namespace simart
