#include "simart/convolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>
#include <json.hpp>

#include "simart/error.hpp"
#include "simart/fit.hpp"

namespace simart {

namespace {

using nlohmann::json;
using Complex = std::complex<double>;

// FFTW's planner is not thread-safe; execution is.
std::mutex planner_mutex;

void fft_inplace(std::vector<Complex>& data, int d, int nx, int ny, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = d == 1 ? fftw_plan_dft_1d(nx, ptr, ptr, sign, FFTW_ESTIMATE)
                  : fftw_plan_dft_2d(ny, nx, ptr, ptr, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
}

// Bounding box of the image of a box under the linear map S.
Box map_box(const MatD& S, const Box& box, int d) {
  Box out{VecD(d), VecD(d)};
  bool first = true;
  for (int corner = 0; corner < (1 << d); ++corner) {
    VecD x(d);
    for (int i = 0; i < d; ++i) x[i] = (corner >> i) & 1 ? box.hi[i] : box.lo[i];
    VecD z = S.mul(x);
    for (int i = 0; i < d; ++i) {
      if (first || z[i] < out.lo[i]) out.lo[i] = z[i];
      if (first || z[i] > out.hi[i]) out.hi[i] = z[i];
    }
    first = false;
  }
  return out;
}

// Smallest singular value of S + I.
double min_singular_shifted(const MatD& S, int d) {
  if (d == 1) return std::fabs(S.at(0, 0) + 1.0);
  double a = S.at(0, 0) + 1.0, b = S.at(0, 1);
  double c = S.at(1, 0), e = S.at(1, 1) + 1.0;
  // Eigenvalues of M^T M for M = [[a, b], [c, e]].
  double g00 = a * a + c * c;
  double g01 = a * b + c * e;
  double g11 = b * b + e * e;
  double tr = g00 + g11;
  double disc = std::sqrt(std::max(0.0, (g00 - g11) * (g00 - g11) + 4.0 * g01 * g01));
  double lambda_min = 0.5 * (tr - disc);
  return std::sqrt(std::max(0.0, lambda_min));
}

// Accumulates the cell masses of a raster onto the padded transform grid.
// Offsets are taken from base_lo with spacing h; map is applied to centers
// when given.
void bin_masses(const Raster& field, const MatD* map, const VecD& base_lo, double h,
                int resolution, int pad, std::vector<Complex>& grid) {
  double cell_mass_scale = field.cell_volume();
  int d = field.d;
  int ny = d >= 2 ? field.shape[1] : 1;
  VecD x(d);
  for (int iy = 0; iy < ny; ++iy) {
    if (d >= 2) x[1] = field.origin[1] + (iy + 0.5) * field.h;
    std::size_t base = field.index(0, iy);
    for (int ix = 0; ix < field.shape[0]; ++ix) {
      double mass = field.v[base + static_cast<std::size_t>(ix)] * cell_mass_scale;
      if (mass == 0.0) continue;
      x[0] = field.origin[0] + (ix + 0.5) * field.h;
      VecD z = map ? map->mul(x) : x;
      std::size_t flat = 0;
      for (int i = d - 1; i >= 0; --i) {
        int c = static_cast<int>(std::floor((z[i] - base_lo[i]) / h));
        c = std::min(std::max(c, 0), resolution - 1);
        flat = flat * static_cast<std::size_t>(pad) + static_cast<std::size_t>(c);
      }
      grid[flat] += mass;
    }
  }
}

struct CellBox {
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
  bool valid() const { return x1 >= x0 && y1 >= y0; }
  long area() const { return long(x1 - x0 + 1) * long(y1 - y0 + 1); }
};

// Largest all-true axis-aligned rectangle, by the running-histogram method.
CellBox largest_rectangle(const std::vector<char>& mask, int nx, int ny) {
  CellBox best;
  std::vector<int> height(static_cast<std::size_t>(nx), 0);
  std::vector<int> stack;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      std::size_t at = static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) +
                       static_cast<std::size_t>(x);
      height[static_cast<std::size_t>(x)] = mask[at] ? height[static_cast<std::size_t>(x)] + 1 : 0;
    }
    stack.clear();
    for (int x = 0; x <= nx; ++x) {
      int h = x < nx ? height[static_cast<std::size_t>(x)] : 0;
      while (!stack.empty() && height[static_cast<std::size_t>(stack.back())] >= h) {
        int top = stack.back();
        stack.pop_back();
        int bar = height[static_cast<std::size_t>(top)];
        if (bar == 0) continue;
        int left = stack.empty() ? 0 : stack.back() + 1;
        CellBox cand{left, x - 1, y - bar + 1, y};
        if (!best.valid() || cand.area() > best.area()) best = cand;
      }
      stack.push_back(x);
    }
  }
  return best;
}

IntervalReport report_from_mask(const Raster& density, const std::vector<char>& mask,
                                double threshold, double threshold_coarse) {
  IntervalReport report;
  report.threshold = threshold;
  report.threshold_coarse = threshold_coarse;
  int nx = density.shape[0];
  int ny = density.d >= 2 ? density.shape[1] : 1;
  CellBox box = largest_rectangle(mask, nx, ny);
  if (!box.valid()) return report;
  report.empty = false;
  report.box = Box{VecD(density.d), VecD(density.d)};
  report.box.lo[0] = density.origin[0] + box.x0 * density.h;
  report.box.hi[0] = density.origin[0] + (box.x1 + 1) * density.h;
  if (density.d >= 2) {
    report.box.lo[1] = density.origin[1] + box.y0 * density.h;
    report.box.hi[1] = density.origin[1] + (box.y1 + 1) * density.h;
  }
  return report;
}

double positive_median(const Raster& density) {
  std::vector<double> positives;
  for (double v : density.v) {
    if (v > 0.0) positives.push_back(v);
  }
  if (positives.empty()) return 0.0;
  return median(std::move(positives));
}

json box_json(const Box& box, int d) {
  json lo = json::array(), hi = json::array();
  for (int i = 0; i < d; ++i) {
    lo.push_back(box.lo[i]);
    hi.push_back(box.hi[i]);
  }
  return json{{"lo", lo}, {"hi", hi}};
}

}  // namespace

ConvolutionGrid convolve(const Raster& a, const Raster& b, const MatD& S, int resolution,
                         bool same_realization) {
  int d = a.d;
  require(b.d == d, "convolve: field dimensions differ");
  require(d == 1 || d == 2, "convolve: needs d in {1, 2}");
  require(S.d == d, "convolve: map dimension mismatch");
  require(resolution >= 2 && (resolution & (resolution - 1)) == 0,
          "convolve: resolution must be a power of two >= 2");
  double det = S.det();
  if (std::fabs(det) == 0.0) fail_singularity("convolve: S is singular");
  int pad = 2 * resolution;
  std::int64_t padded = 1;
  for (int i = 0; i < d; ++i) padded *= pad;
  if (padded > (std::int64_t(1) << 22)) {
    fail_resource("convolve: transform grid beyond 2^22 cells");
  }

  ConvolutionGrid out;
  out.resolution = resolution;
  out.map = S;
  out.mass_a = a.total_mass();
  out.mass_b = b.total_mass();
  out.near_excluded = same_realization && min_singular_shifted(S, d) <= 1e-9;

  Box box_a = a.domain();
  Box box_sb = map_box(S, b.domain(), d);
  VecD out_lo(d);
  double extent = 0.0;
  for (int i = 0; i < d; ++i) {
    out_lo[i] = box_a.lo[i] + box_sb.lo[i];
    extent = std::max(extent, (box_a.hi[i] - box_a.lo[i]) + (box_sb.hi[i] - box_sb.lo[i]));
  }
  double h = extent / resolution;
  require(h > 0.0, "convolve: degenerate supports");

  std::vector<Complex> fa(static_cast<std::size_t>(padded), Complex{0.0, 0.0});
  std::vector<Complex> fb(static_cast<std::size_t>(padded), Complex{0.0, 0.0});
  bin_masses(a, nullptr, box_a.lo, h, resolution, pad, fa);
  bin_masses(b, &S, box_sb.lo, h, resolution, pad, fb);

  fft_inplace(fa, d, pad, pad, FFTW_FORWARD);
  fft_inplace(fb, d, pad, pad, FFTW_FORWARD);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  fft_inplace(fa, d, pad, pad, FFTW_BACKWARD);
  double inv_scale = 1.0 / static_cast<double>(padded);

  std::array<int, 3> shape{1, 1, 1};
  for (int i = 0; i < d; ++i) shape[static_cast<std::size_t>(i)] = resolution;
  out.density = Raster(d, shape, out_lo, h);
  int ny = d >= 2 ? resolution : 1;
  double raw_total = 0.0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      std::size_t src = static_cast<std::size_t>(iy) * static_cast<std::size_t>(pad) +
                        static_cast<std::size_t>(ix);
      double mass = fa[src].real() * inv_scale;
      if (mass < 0.0) mass = 0.0;  // transform noise on exact zeros
      out.density.at(ix, iy) = mass;
      raw_total += mass;
    }
  }

  double target = out.mass_a * out.mass_b;
  double cell_vol = out.density.cell_volume();
  double scale = raw_total > 0.0 ? target / (raw_total * cell_vol) : 0.0;
  Box support{out_lo, out_lo};
  bool any = false;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      double value = out.density.at(ix, iy) * scale;
      out.density.at(ix, iy) = value;
      if (value <= 0.0) continue;
      double x0 = out_lo[0] + ix * h;
      if (!any || x0 < support.lo[0]) support.lo[0] = x0;
      if (!any || x0 + h > support.hi[0]) support.hi[0] = x0 + h;
      if (d >= 2) {
        double y0 = out_lo[1] + iy * h;
        if (!any || y0 < support.lo[1]) support.lo[1] = y0;
        if (!any || y0 + h > support.hi[1]) support.hi[1] = y0 + h;
      }
      any = true;
    }
  }
  out.sup_value = out.density.max_value();
  out.support = support;
  return out;
}

std::string ConvolutionGrid::to_json() const {
  json j;
  j["resolution"] = resolution;
  json rows = json::array();
  for (int i = 0; i < map.d; ++i) {
    json row = json::array();
    for (int k = 0; k < map.d; ++k) row.push_back(map.at(i, k));
    rows.push_back(row);
  }
  j["map"] = rows;
  j["mass_a"] = mass_a;
  j["mass_b"] = mass_b;
  j["sup_value"] = sup_value;
  j["support"] = box_json(support, density.d);
  j["near_excluded"] = near_excluded;
  json grid;
  grid["d"] = density.d;
  grid["shape"] = std::vector<int>(density.shape.begin(), density.shape.begin() + density.d);
  json origin = json::array();
  for (int i = 0; i < density.d; ++i) origin.push_back(density.origin[i]);
  grid["origin"] = origin;
  grid["h"] = density.h;
  grid["total_mass"] = density.total_mass();
  j["grid"] = grid;
  return j.dump();
}

IntervalReport sumset_interior(const ConvolutionGrid& grid, double threshold_fraction) {
  require(threshold_fraction > 0.0, "sumset_interior: threshold fraction must be positive");
  double med = positive_median(grid.density);
  double threshold = threshold_fraction * med;
  std::vector<char> mask(grid.density.v.size());
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = med > 0.0 && grid.density.v[i] > threshold;
    any = any || mask[i];
  }
  if (!any) {
    IntervalReport report;
    report.threshold = threshold;
    return report;
  }
  return report_from_mask(grid.density, mask, threshold, 0.0);
}

IntervalReport sumset_interior(const ConvolutionGrid& fine, const ConvolutionGrid& coarse,
                               double threshold_fraction) {
  require(threshold_fraction > 0.0, "sumset_interior: threshold fraction must be positive");
  require(fine.density.d == coarse.density.d, "sumset_interior: grid dimensions differ");
  int d = fine.density.d;
  double med_fine = positive_median(fine.density);
  double med_coarse = positive_median(coarse.density);
  double thr_fine = threshold_fraction * med_fine;
  double thr_coarse = threshold_fraction * med_coarse;

  const Raster& cd = coarse.density;
  auto coarse_value = [&](const VecD& x) {
    int idx[2] = {0, 0};
    for (int i = 0; i < d; ++i) {
      int c = static_cast<int>(std::floor((x[i] - cd.origin[i]) / cd.h));
      if (c < 0 || c >= cd.shape[static_cast<std::size_t>(i)]) return 0.0;
      idx[i] = c;
    }
    return cd.at(idx[0], idx[1]);
  };

  const Raster& fd = fine.density;
  std::vector<char> mask(fd.v.size(), 0);
  bool usable = med_fine > 0.0 && med_coarse > 0.0;
  int ny = d >= 2 ? fd.shape[1] : 1;
  VecD x(d);
  for (int iy = 0; iy < ny && usable; ++iy) {
    if (d >= 2) x[1] = fd.origin[1] + (iy + 0.5) * fd.h;
    for (int ix = 0; ix < fd.shape[0]; ++ix) {
      if (fd.at(ix, iy) <= thr_fine) continue;
      x[0] = fd.origin[0] + (ix + 0.5) * fd.h;
      if (coarse_value(x) <= thr_coarse) continue;
      mask[fd.index(ix, iy)] = 1;
    }
  }
  return report_from_mask(fd, mask, thr_fine, thr_coarse);
}

std::string IntervalReport::to_json() const {
  json j;
  j["empty"] = empty;
  j["threshold"] = threshold;
  j["threshold_coarse"] = threshold_coarse;
  if (!empty) j["box"] = box_json(box, box.lo.d);
  return j.dump();
}

}  // namespace simart
