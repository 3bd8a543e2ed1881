#include "simart/families.hpp"

#include <algorithm>
#include <cmath>

#include "simart/error.hpp"

namespace simart {

void PlaneParam::validate() const {
  int d = dim();
  require(d >= 1 && d <= 3, "plane: ambient dimension must be 1, 2 or 3");
  require(k() < d, "plane: need k < d");
  for (int i = 0; i < k(); ++i) {
    require(basis[static_cast<std::size_t>(i)].d == d, "plane: basis dimension mismatch");
    for (int j = i; j < k(); ++j) {
      double target = i == j ? 1.0 : 0.0;
      double got = basis[static_cast<std::size_t>(i)].dot(basis[static_cast<std::size_t>(j)]);
      require(std::fabs(got - target) <= 1e-10, "plane: basis must be orthonormal to 1e-10");
    }
  }
}

MatD PlaneParam::projector() const {
  MatD p(dim());
  for (const VecD& b : basis) {
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j) p.at(i, j) += b[i] * b[j];
  }
  return p;
}

VecD PlaneParam::point_at(double t) const {
  require(k() == 1, "point_at: lines only");
  return basepoint + basis[0] * t;
}

double PlaneParam::frostman_constant() const {
  switch (k()) {
    case 0: return 1.0;
    case 1: return 2.0;
    default: return 3.14159265358979323846;
  }
}

PlaneParam PlaneParam::line(const VecD& point, const VecD& direction) {
  double len = direction.norm();
  require(len > 0.0, "line: zero direction");
  PlaneParam out;
  out.basepoint = point;
  out.basis = {direction * (1.0 / len)};
  out.validate();
  return out;
}

double plane_metric(const PlaneParam& a, const PlaneParam& b) {
  require(a.dim() == b.dim() && a.k() == b.k(),
          "plane_metric: parameters must share (d, k)");
  MatD pa = a.projector();
  MatD pb = b.projector();
  double proj_term = symmetric_operator_norm(pa.minus(pb));
  VecD qa = a.basepoint - pa.mul(a.basepoint);
  VecD qb = b.basepoint - pb.mul(b.basepoint);
  return proj_term + qa.dist(qb);
}

namespace {

// Monomial exponents in graded-lex order: 1, x, y, x^2, xy, y^2, ...
struct Monomial {
  int a;
  int b;
};

constexpr Monomial kMonomials[curve_coeff_count] = {
    {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1},
    {1, 2}, {0, 3}, {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4},
};

}  // namespace

void CurveParam::validate() const {
  require(std::isfinite(clip_radius) && clip_radius > 0.0,
          "curve: clip radius must be positive");
  bool any = false;
  for (int i = 1; i < curve_coeff_count; ++i) {
    require(std::isfinite(coeffs[static_cast<std::size_t>(i)]), "curve: coefficient not finite");
    if (coeffs[static_cast<std::size_t>(i)] != 0.0) any = true;
  }
  require(std::isfinite(coeffs[0]), "curve: coefficient not finite");
  require(any, "curve: polynomial must have a nonconstant term");
}

int CurveParam::degree() const {
  int deg = 0;
  for (int i = 0; i < curve_coeff_count; ++i) {
    if (coeffs[static_cast<std::size_t>(i)] != 0.0)
      deg = std::max(deg, kMonomials[i].a + kMonomials[i].b);
  }
  return deg;
}

double CurveParam::value(const VecD& p) const {
  double xp[5] = {1.0, p[0], p[0] * p[0], 0.0, 0.0};
  double yp[5] = {1.0, p[1], p[1] * p[1], 0.0, 0.0};
  xp[3] = xp[2] * xp[1];
  xp[4] = xp[2] * xp[2];
  yp[3] = yp[2] * yp[1];
  yp[4] = yp[2] * yp[2];
  double v = 0.0;
  for (int i = 0; i < curve_coeff_count; ++i) {
    double c = coeffs[static_cast<std::size_t>(i)];
    if (c != 0.0) v += c * xp[kMonomials[i].a] * yp[kMonomials[i].b];
  }
  return v;
}

VecD CurveParam::gradient(const VecD& p) const {
  double xp[5] = {1.0, p[0], p[0] * p[0], 0.0, 0.0};
  double yp[5] = {1.0, p[1], p[1] * p[1], 0.0, 0.0};
  xp[3] = xp[2] * xp[1];
  xp[4] = xp[2] * xp[2];
  yp[3] = yp[2] * yp[1];
  yp[4] = yp[2] * yp[2];
  double gx = 0.0;
  double gy = 0.0;
  for (int i = 0; i < curve_coeff_count; ++i) {
    double c = coeffs[static_cast<std::size_t>(i)];
    if (c == 0.0) continue;
    int a = kMonomials[i].a;
    int b = kMonomials[i].b;
    if (a > 0) gx += c * a * xp[a - 1] * yp[b];
    if (b > 0) gy += c * b * xp[a] * yp[b - 1];
  }
  return VecD(gx, gy);
}

double CurveParam::frostman_constant() const {
  return 3.14159265358979323846 * std::max(1, degree());
}

double CurveComponent::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    len += points[i - 1].position.dist(points[i].position);
  if (closed && points.size() >= 2)
    len += points.back().position.dist(points.front().position);
  return len;
}

double CurveTrace::total_length() const {
  double len = 0.0;
  for (const CurveComponent& c : components) len += c.length();
  return len;
}

std::size_t CurveTrace::vertex_count() const {
  std::size_t n = 0;
  for (const CurveComponent& c : components) n += c.points.size();
  return n;
}

VecD SimilarityMap::apply(const VecD& x, int d) const {
  if (d == 1) return VecD::make1(ratio * x[0] + translate[0]);
  double ca = std::cos(angle);
  double sa = std::sin(angle);
  VecD out(d);
  out[0] = ratio * (ca * x[0] - sa * x[1]) + translate[0];
  out[1] = ratio * (sa * x[0] + ca * x[1]) + translate[1];
  if (d == 3) out[2] = ratio * x[2] + translate[2];
  return out;
}

double similarity_dimension(const std::vector<double>& ratios, bool* degenerate) {
  require(!ratios.empty(), "similarity_dimension: empty ratio list");
  for (double r : ratios)
    require(std::isfinite(r) && r > 0.0 && r < 1.0,
            "similarity_dimension: ratios must lie in (0, 1)");
  if (degenerate) *degenerate = false;
  if (ratios.size() == 1) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  auto residual = [&](double s) {
    double total = 0.0;
    for (double r : ratios) total += std::pow(r, s);
    return total - 1.0;
  };
  double hi = 1.0;
  while (residual(hi) > 0.0) {
    hi *= 2.0;
    require(hi <= 65536.0, "similarity_dimension: failed to bracket the root");
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * (1.0 + hi)) break;
  }
  double s = 0.5 * (lo + hi);
  // Newton polish; the residual is strictly decreasing in s.
  for (int iter = 0; iter < 4; ++iter) {
    double f = residual(s);
    double df = 0.0;
    for (double r : ratios) df += std::pow(r, s) * std::log(r);
    if (df == 0.0) break;
    double next = s - f / df;
    if (next > 0.0 && std::isfinite(next)) s = next;
  }
  require(std::fabs(residual(s)) <= 1e-12, "similarity_dimension: root not converged");
  return s;
}

void IFSParam::validate() const {
  require(d == 1 || d == 2, "ifs: dimension must be 1 or 2");
  require(!maps.empty(), "ifs: no maps");
  require(probs.size() == maps.size(), "ifs: probs size must match maps");
  for (const SimilarityMap& f : maps) {
    require(std::isfinite(f.ratio) && f.ratio > 0.0 && f.ratio < 1.0,
            "ifs: ratios must lie in (0, 1)");
    require(f.translate.d == d, "ifs: translation dimension mismatch");
    if (d == 1) require(f.angle == 0.0, "ifs: rotations need d = 2");
  }
  double total = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p > 0.0, "ifs: probabilities must be positive");
    total += p;
  }
  require(std::fabs(total - 1.0) <= 1e-12, "ifs: probabilities must sum to 1");

  double res = 0.0;
  for (const SimilarityMap& f : maps) res += std::pow(f.ratio, sim_dim);
  if (maps.size() == 1) {
    require(sim_dim == 0.0, "ifs: single-map system must carry sim_dim = 0");
  } else {
    require(std::fabs(res - 1.0) <= 1e-12, "ifs: sim_dim does not solve the moment equation");
  }
  if (natural) {
    for (std::size_t i = 0; i < maps.size(); ++i) {
      require(std::fabs(probs[i] - std::pow(maps[i].ratio, sim_dim)) <= 1e-12,
              "ifs: natural weights must equal ratio^sim_dim");
    }
  }
  require(std::isfinite(frostman_c) && frostman_c >= 0.0,
          "ifs: Frostman constant must be nonnegative");
}

VecD IFSParam::barycenter() const {
  // Solve (I - sum p_i ratio_i R_i) c = sum p_i t_i; the matrix is a strict
  // contraction of the identity, hence invertible.
  MatD a = MatD::identity(d);
  VecD rhs(d);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const SimilarityMap& f = maps[i];
    double w = probs[i] * f.ratio;
    if (d == 1) {
      a.at(0, 0) -= w;
    } else {
      MatD r = rotation2(f.angle);
      for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 2; ++col) a.at(row, col) -= w * r.at(row, col);
    }
    rhs = rhs + f.translate * probs[i];
  }
  return a.inverse().mul(rhs);
}

void IFSParam::invariant_ball(VecD* center, double* radius) const {
  VecD c = barycenter();
  double r = 0.0;
  for (const SimilarityMap& f : maps) {
    double need = f.apply(c, d).dist(c) / (1.0 - f.ratio);
    r = std::max(r, need);
  }
  *center = c;
  *radius = r;
}

bool IFSParam::strongly_separated() const {
  VecD c(d);
  double r = 0.0;
  invariant_ball(&c, &r);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (std::size_t j = i + 1; j < maps.size(); ++j) {
      double gap = maps[i].apply(c, d).dist(maps[j].apply(c, d)) -
                   (maps[i].ratio + maps[j].ratio) * r;
      if (gap <= 1e-12 * (1.0 + r)) return false;
    }
  }
  return true;
}

IFSParam IFSParam::make(int d, std::vector<SimilarityMap> maps, std::vector<double> probs) {
  IFSParam out;
  out.d = d;
  out.maps = std::move(maps);
  out.probs = std::move(probs);
  std::vector<double> ratios;
  ratios.reserve(out.maps.size());
  for (const SimilarityMap& f : out.maps) ratios.push_back(f.ratio);
  require(!ratios.empty(), "ifs: no maps");
  for (double r : ratios)
    require(std::isfinite(r) && r > 0.0 && r < 1.0, "ifs: ratios must lie in (0, 1)");
  out.sim_dim = similarity_dimension(ratios);
  out.validate();
  return out;
}

IFSParam IFSParam::make_natural(int d, std::vector<SimilarityMap> maps) {
  std::vector<double> ratios;
  ratios.reserve(maps.size());
  for (const SimilarityMap& f : maps) ratios.push_back(f.ratio);
  require(!ratios.empty(), "ifs: no maps");
  for (double r : ratios)
    require(std::isfinite(r) && r > 0.0 && r < 1.0, "ifs: ratios must lie in (0, 1)");
  double s = similarity_dimension(ratios);
  std::vector<double> probs;
  probs.reserve(ratios.size());
  double total = 0.0;
  for (double r : ratios) {
    probs.push_back(std::pow(r, s));
    total += probs.back();
  }
  // Normalize away the 1e-12-scale residual so the probability sum is exact.
  for (double& p : probs) p /= total;
  IFSParam out;
  out.d = d;
  out.maps = std::move(maps);
  out.probs = std::move(probs);
  out.natural = true;
  out.sim_dim = s;
  out.validate();
  return out;
}

}  // namespace simart
