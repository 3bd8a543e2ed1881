#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "simart/density.hpp"
#include "simart/families.hpp"
#include "simart/model.hpp"

namespace simart {

// Which engine produced a mass value.
enum class MassMethod : std::uint8_t { exact, quadrature, cylinder };

const char* mass_method_name(MassMethod method);

// Knobs shared by the batch drivers. Engines themselves take explicit
// tolerances; these are the defaults a sequence run plugs in per level.
struct MassOptions {
  double plane_tol = 1e-3;          // quadrature tolerance for plane slices
  double curve_step = 1e-3;         // polyline vertex spacing for curve slices
  double ifs_diam_tol = 0.0;        // 0 picks 2^-n / 4 at level n
  bool weighted = false;            // weight curve integrand by 1 / |grad P|
  std::uint64_t ifs_leaf_budget = 10'000'000;
};

// True when the exact interval engine covers this (realization, plane) pair:
// a line (k = 1) sliced through a dyadic subdivision tree, or through a ball
// domain whose cutouts are all balls.
bool exact_plane_supported(const Realization& realization, const PlaneParam& plane);

// Mass of the level-n measure on an affine plane, Y_n = integral of the
// level-n density over the plane with k-dimensional Hausdorff measure.
//
// exact: k = 1 lines only. Subdivision trees sum beta * |line through cell|
// over surviving level-n cells; ball cutouts subtract a sorted union of chord
// intervals from the domain chord. Ties on shared dyadic faces follow the
// half-open cell convention of the density itself.
//
// quadrature: composite midpoint rule with step at most tol * 2^-n per axis,
// over the line (k = 1), the plane patch inside the support box (k = 2), or
// the single base point (k = 0). Step counts beyond the 2^31 evaluation
// budget raise a resource error.
double mass_on_plane(const Realization& realization, const PlaneParam& plane, int n,
                     MassMethod method, double tol);

// Mass of the level held by `density` on the curve {P = 0}: midpoint rule
// along the traced polyline. weighted = true integrates density / |grad P|
// instead, the coarea weight. Propagates tracing errors.
double mass_on_curve(const DensityEvaluator& density, const CurveParam& curve, double step,
                     bool weighted = false);

// Mass of the level held by `density` against the self-similar measure of the
// IFS: cylinders are expanded while their image ball diameter exceeds
// diam_tol (0 picks 2^-level / 4), then each leaf contributes
// prob(word) * density(image center). More than leaf_budget leaves raise a
// resource error.
double mass_on_ifs(const DensityEvaluator& density, const IFSParam& ifs, double diam_tol = 0.0,
                   std::uint64_t leaf_budget = 10'000'000);

// The mass sequence Y_0..Y_n of one family against one realization, with the
// geometric-decay fit of its increments.
struct MassSequence {
  std::string family_id;
  std::vector<double> values;      // Y_m for m = 0..n_max
  std::vector<double> increments;  // |Y_{m+1} - Y_m|
  MassMethod method = MassMethod::quadrature;

  // Slope of log2 |Y_{m+1} - Y_m| against m over the last half of the levels;
  // -infinity when the tail increments vanish.
  double decay_rate = 0.0;
  // Families declared for the growth regime (exponent s <= alpha) also get
  // theta-hat, the slope of log2 Y_m over the last half of the levels.
  bool growth_regime = false;
  double growth_rate = 0.0;

  double limit_value() const;  // last value
  void validate() const;
};

// Y_n for one family at one level, dispatched to the right engine: planes go
// exact when supported and midpoint quadrature otherwise, curves to the trace
// quadrature, IFS measures to the cylinder recursion.
double family_mass(const Realization& realization, const FamilySpec& family, int n,
                   const MassOptions& options = {});

// Runs the right engine per level. Families declared "limit" must satisfy
// s > alpha (s the family Frostman exponent, alpha the model decay exponent);
// otherwise this refuses with a validation error instead of returning a
// divergent sequence. Declare the growth regime to study those pairs.
MassSequence mass_sequence(const Realization& realization, const FamilySpec& family, int n_max,
                           const MassOptions& options = {});

// Projection of the level-n measure onto a line direction: f_n(t) = mass on
// the fiber hyperplane crossing direction.point_at(t), sampled on an
// equispaced midpoint grid covering the projected support.
struct ProjectionProfile {
  PlaneParam direction;         // the line projected onto (k = 1)
  int level = 0;
  std::vector<double> offsets;  // fiber positions t along the direction
  std::vector<double> values;   // f_n(t)
  double spacing = 0.0;         // offset grid step
  double riemann_mass = 0.0;    // spacing * sum of values
  double reference_mass = 0.0;  // total mass of the level-n measure
  double mass_defect = 0.0;     // |riemann_mass - reference_mass|
};

ProjectionProfile projection_profile(const Realization& realization, const PlaneParam& direction,
                                     int n, int grid_points, const MassOptions& options = {});

// Least-squares Holder exponent fit from samples (t_i, value_i): the slope of
// log oscillation against log scale over dyadic distance bands. `metric`
// replaces |t - u| as the pairwise parameter distance when given.
struct HolderFit {
  double gamma = 0.0;       // exponent estimate; +infinity when flat
  double k_constant = 0.0;  // prefactor estimate
  int scale_lo = 0;         // coarsest dyadic band used (j of 2^-j)
  int scale_hi = 0;         // finest dyadic band used
  double residual = 0.0;    // rms residual of the log-log fit
  bool flat = false;        // all sample values identical
};

HolderFit holder_fit(const std::vector<double>& params, const std::vector<double>& values,
                     const std::function<double(double, double)>& metric = {});

// Batch CSV: header "replicate,family_id,n,Y,increment,method" and one row
// per level of a sequence (the level-0 row leaves the increment empty).
std::string mass_csv_header();
void append_mass_csv(std::string& out, std::uint64_t replicate, const MassSequence& sequence);

}  // namespace simart
