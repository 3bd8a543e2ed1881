#pragma once

#include <array>
#include <vector>

#include "simart/geometry.hpp"

namespace simart {

// Affine k-plane in R^d carrying k-dimensional Hausdorff measure. k = 0 is a
// point mass at the basepoint; k = 1 a line with length measure. The measure
// satisfies eta(B(x,r)) <= frostman_constant * r^k for every ball.
struct PlaneParam {
  VecD basepoint;
  std::vector<VecD> basis;  // k orthonormal vectors, k < d

  int dim() const { return basepoint.d; }
  int k() const { return static_cast<int>(basis.size()); }

  void validate() const;

  // Orthogonal projection onto the direction space.
  MatD projector() const;

  // basepoint + t * basis[0]; lines only.
  VecD point_at(double t) const;

  double frostman_exponent() const { return static_cast<double>(k()); }
  double frostman_constant() const;

  static PlaneParam line(const VecD& point, const VecD& direction);
};

// Operator-norm distance of the projections plus the distance between the
// basepoint components orthogonal to the respective planes.
double plane_metric(const PlaneParam& a, const PlaneParam& b);

inline constexpr int curve_coeff_count = 15;

// Zero set of a bivariate polynomial of degree <= 4, clipped to the ball of
// clip_radius about the origin, carrying length measure (optionally weighted
// by 1/|grad P|). Coefficients index the monomials x^a y^b in graded
// lexicographic order: 1, x, y, x^2, xy, y^2, x^3, ..., y^4.
struct CurveParam {
  std::array<double, curve_coeff_count> coeffs{};
  double clip_radius = 1.0;

  void validate() const;
  int degree() const;
  double value(const VecD& p) const;
  VecD gradient(const VecD& p) const;

  double frostman_exponent() const { return 1.0; }
  // Crofton bound: a degree-q curve meets any line at most q times, so its
  // length inside B(x,r) is at most pi * q * r.
  double frostman_constant() const;
};

struct CurvePoint {
  VecD position;
  VecD tangent;      // unit, oriented along the traversal
  double grad_norm;  // |grad P| at the vertex
};

struct CurveComponent {
  std::vector<CurvePoint> points;
  bool closed = false;

  // Polyline length, including the closing segment of a loop.
  double length() const;
};

struct CurveTrace {
  std::vector<CurveComponent> components;

  double total_length() const;
  std::size_t vertex_count() const;
};

// Polyline cover of {P = 0} within the clip ball, vertex spacing within
// [step/2, 2*step]. Components are located by sign changes on a grid and
// followed by predictor-corrector continuation. A traced point with
// |grad P| < 1e-6 raises a singularity error naming the point; a polynomial
// with no zero crossing gives an empty trace.
CurveTrace trace_curve(const CurveParam& curve, double step);

// Lower bound for the Lipschitz-test-function distance between the two curve
// length measures, using the first probe_functions entries of a fixed probe
// dictionary (plateau, clipped coordinates, then clipped cones on finer and
// finer grids). Monotone nondecreasing in probe_functions.
double curve_distance(const CurveParam& a, const CurveParam& b, int probe_functions);

// One contracting similarity x -> ratio * R(angle) x + translate.
struct SimilarityMap {
  double ratio = 0.5;
  double angle = 0.0;  // radians; must be 0 when d = 1
  VecD translate;

  VecD apply(const VecD& x, int d) const;
};

// Self-similar system with selection probabilities; the reference measure is
// the stationary measure of the chosen-branch process, so cylinder masses are
// exact products of the probabilities along the word.
struct IFSParam {
  int d = 1;
  std::vector<SimilarityMap> maps;
  std::vector<double> probs;
  bool natural = false;   // probs were derived as ratio^sim_dim
  double sim_dim = 0.0;   // solves sum ratio_i^s = 1
  double frostman_c = 0;  // declared Frostman constant; 0 when undeclared

  void validate() const;

  double frostman_exponent() const { return sim_dim; }

  // Fixed point of x -> sum p_i F_i(x); the mean of the reference measure.
  VecD barycenter() const;

  // Ball about the barycenter mapped into itself by every map; the attractor
  // and all cylinder images live inside it.
  void invariant_ball(VecD* center, double* radius) const;

  // Certified strong separation: the first-level images of the invariant
  // ball are pairwise disjoint.
  bool strongly_separated() const;

  static IFSParam make(int d, std::vector<SimilarityMap> maps, std::vector<double> probs);
  static IFSParam make_natural(int d, std::vector<SimilarityMap> maps);
};

// Positive root of sum ratio_i^s = 1, residual below 1e-12. A single-map
// system is degenerate: the root is s = 0, reported through the flag.
double similarity_dimension(const std::vector<double>& ratios, bool* degenerate = nullptr);

}  // namespace simart
