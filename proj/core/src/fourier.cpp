#include "simart/fourier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "simart/analysis.hpp"
#include "simart/error.hpp"
#include "simart/fit.hpp"

namespace simart {

namespace {

using nlohmann::json;
using Complex = std::complex<double>;

constexpr double two_pi = 6.283185307179586476925286766559;

// Integral of e^(-2 pi i k x) over [a, a + w].
Complex axis_factor(double k, double a, double w) {
  if (k == 0.0) return {w, 0.0};
  double t = two_pi * k;
  Complex lo = std::polar(1.0, -t * a);
  Complex hi = std::polar(1.0, -t * (a + w));
  return (hi - lo) / Complex(0.0, -t);
}

// Per-axis factor table over a uniform grid of cell lows a0 + c*h, c < count.
std::vector<Complex> factor_table(double k, double a0, double h, int count) {
  std::vector<Complex> table(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    table[static_cast<std::size_t>(c)] = axis_factor(k, a0 + c * h, h);
  }
  return table;
}

// Level-n cells of a tree with per-axis coordinate compression: factor tables
// are built over the distinct lattice coordinates only, so sparse deep levels
// never allocate the full 2^n lattice.
struct TreeCells {
  int d = 1;
  double w = 1.0;
  std::vector<double> beta;
  std::vector<std::uint32_t> pos;       // d entries per cell, indices into uniq
  std::vector<std::uint64_t> uniq[3];   // sorted distinct lattice coordinates

  TreeCells(const SubdivisionTree& tree, int n) {
    d = tree.dim();
    w = std::ldexp(1.0, -n);
    const auto& lv = tree.level(n);
    beta = lv.beta;
    std::vector<std::uint64_t> raw(lv.index.size() * static_cast<std::size_t>(d));
    for (std::size_t ci = 0; ci < lv.index.size(); ++ci) {
      std::uint64_t idx = lv.index[ci];
      std::uint64_t coords[3] = {0, 0, 0};
      for (int j = 0; j < n; ++j) {
        std::uint64_t digit = (idx >> (d * j)) & ((1u << d) - 1u);
        for (int i = 0; i < d; ++i) coords[i] |= ((digit >> i) & 1u) << j;
      }
      for (int i = 0; i < d; ++i) {
        raw[ci * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = coords[i];
      }
    }
    for (int i = 0; i < d; ++i) {
      auto& u = uniq[i];
      for (std::size_t ci = 0; ci < beta.size(); ++ci) {
        u.push_back(raw[ci * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)]);
      }
      std::sort(u.begin(), u.end());
      u.erase(std::unique(u.begin(), u.end()), u.end());
    }
    pos.resize(raw.size());
    for (std::size_t ci = 0; ci < beta.size(); ++ci) {
      for (int i = 0; i < d; ++i) {
        std::size_t at = ci * static_cast<std::size_t>(d) + static_cast<std::size_t>(i);
        pos[at] = static_cast<std::uint32_t>(
            std::lower_bound(uniq[i].begin(), uniq[i].end(), raw[at]) - uniq[i].begin());
      }
    }
  }

  std::vector<Complex> table(int axis, double k) const {
    std::vector<Complex> t(uniq[axis].size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = axis_factor(k, static_cast<double>(uniq[axis][i]) * w, w);
    }
    return t;
  }

  Complex transform(const std::vector<Complex>* tables) const {
    Complex sum{0.0, 0.0};
    for (std::size_t ci = 0; ci < beta.size(); ++ci) {
      Complex term{beta[ci], 0.0};
      for (int i = 0; i < d; ++i) {
        term *= tables[i][pos[ci * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)]];
      }
      sum += term;
    }
    return sum;
  }
};

void append_shortest(std::string& out, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

SpectrumReport finish_report(int n, int k_max, double mass, std::vector<double> peaks) {
  SpectrumReport report;
  report.level = n;
  report.k_max = k_max;
  report.mass = mass;
  report.band_peaks = std::move(peaks);

  // Regress over all bands but the top one; zero peaks carry no log.
  std::vector<double> xs, ys;
  for (std::size_t m = 0; m + 1 < report.band_peaks.size(); ++m) {
    if (report.band_peaks[m] <= 0.0) continue;
    xs.push_back(static_cast<double>(m));
    ys.push_back(std::log2(report.band_peaks[m]));
  }
  if (xs.size() >= 2) {
    LinearFit fit = fit_line(xs, ys);
    report.sigma_hat = -fit.slope;
    report.sigma_stderr = fit.slope_stderr;
  } else {
    report.sigma_hat = std::numeric_limits<double>::infinity();
    report.sigma_stderr = 0.0;
  }
  report.fourier_dimension = 2.0 * report.sigma_hat;
  return report;
}

}  // namespace

std::complex<double> fourier_coefficient(const Raster& field, const std::vector<double>& k) {
  require(static_cast<int>(k.size()) == field.d,
          "fourier_coefficient: frequency dimension mismatch");
  std::vector<Complex> tables[3];
  for (int i = 0; i < field.d; ++i) {
    tables[i] = factor_table(k[static_cast<std::size_t>(i)], field.origin[i], field.h,
                             field.shape[static_cast<std::size_t>(i)]);
  }
  Complex sum{0.0, 0.0};
  int nz = field.d == 3 ? field.shape[2] : 1;
  int ny = field.d >= 2 ? field.shape[1] : 1;
  for (int iz = 0; iz < nz; ++iz) {
    Complex fz = field.d == 3 ? tables[2][static_cast<std::size_t>(iz)] : Complex{1.0, 0.0};
    for (int iy = 0; iy < ny; ++iy) {
      Complex fyz = field.d >= 2 ? tables[1][static_cast<std::size_t>(iy)] * fz : fz;
      Complex row{0.0, 0.0};
      std::size_t base = field.index(0, iy, iz);
      for (int ix = 0; ix < field.shape[0]; ++ix) {
        row += field.v[base + static_cast<std::size_t>(ix)] *
               tables[0][static_cast<std::size_t>(ix)];
      }
      sum += row * fyz;
    }
  }
  return sum;
}

std::complex<double> fourier_coefficient(const SubdivisionTree& tree, int n,
                                         const std::vector<double>& k) {
  require(static_cast<int>(k.size()) == tree.dim(),
          "fourier_coefficient: frequency dimension mismatch");
  require(n >= 0 && n <= tree.depth(), "fourier_coefficient: level out of range");
  TreeCells cells(tree, n);
  std::vector<Complex> tables[3];
  for (int i = 0; i < cells.d; ++i) {
    tables[i] = cells.table(i, k[static_cast<std::size_t>(i)]);
  }
  return cells.transform(tables);
}

SpectrumReport fourier_dimension_estimate(const Realization& realization, int n, int k_max) {
  require(!realization.empty(), "fourier_dimension_estimate: empty realization");
  int d = realization.dim();
  require(d == 1 || d == 2, "fourier_dimension_estimate: needs d in {1, 2}");
  require(k_max >= 32 && (k_max & (k_max - 1)) == 0,
          "fourier_dimension_estimate: k_max must be a power of two >= 32");
  require(n >= 0 && n <= realization.depth(),
          "fourier_dimension_estimate: level out of range");

  int bands = 0;
  while ((1 << (bands + 1)) <= k_max) ++bands;  // bands m = 0 .. log2(k_max) - 1
  std::vector<double> peaks(static_cast<std::size_t>(bands), 0.0);

  auto band_of = [&](double norm_sq) {
    int m = static_cast<int>(std::floor(0.5 * std::log2(norm_sq)));
    return static_cast<std::size_t>(std::min(std::max(m, 0), bands - 1));
  };

  double mass = 0.0;

  if (const SubdivisionTree* tree = realization.subdivision()) {
    TreeCells cells(*tree, n);
    std::vector<Complex> tables[3];
    tables[0] = cells.table(0, 0.0);
    if (d == 2) tables[1] = cells.table(1, 0.0);
    mass = std::abs(cells.transform(tables));

    if (d == 1) {
      for (int k1 = 1; k1 < k_max; ++k1) {
        tables[0] = cells.table(0, k1);
        std::size_t m = band_of(double(k1) * k1);
        peaks[m] = std::max(peaks[m], std::abs(cells.transform(tables)));
      }
    } else {
      std::vector<std::vector<Complex>> ytab(static_cast<std::size_t>(2 * k_max - 1));
      for (int k2 = -(k_max - 1); k2 < k_max; ++k2) {
        ytab[static_cast<std::size_t>(k2 + k_max - 1)] = cells.table(1, k2);
      }
      for (int k1 = 0; k1 < k_max; ++k1) {
        tables[0] = cells.table(0, k1);
        int lo2 = k1 == 0 ? 1 : -(k_max - 1);
        for (int k2 = lo2; k2 < k_max; ++k2) {
          double norm_sq = double(k1) * k1 + double(k2) * k2;
          if (norm_sq >= double(k_max) * k_max) continue;
          tables[1] = ytab[static_cast<std::size_t>(k2 + k_max - 1)];
          std::size_t m = band_of(norm_sq);
          peaks[m] = std::max(peaks[m], std::abs(cells.transform(tables)));
        }
      }
    }
    return finish_report(n, k_max, mass, std::move(peaks));
  }

  // Cutout realizations: rasterize fine enough that the piecewise-constant
  // stand-in resolves both the level cells and the probed frequencies.
  int cap = d == 1 ? (1 << 20) : (1 << 12);
  int res = std::max(1 << std::min(n + 2, 20), 4 * k_max);
  res = std::min(res, cap);
  Raster field = rasterize_density(realization, n, res);
  mass = std::abs(fourier_coefficient(field, std::vector<double>(d, 0.0)));

  if (d == 1) {
    for (int k1 = 1; k1 < k_max; ++k1) {
      double v = std::abs(fourier_coefficient(field, {double(k1)}));
      std::size_t m = band_of(double(k1) * k1);
      peaks[m] = std::max(peaks[m], v);
    }
    return finish_report(n, k_max, mass, std::move(peaks));
  }

  // d = 2: row partial sums per horizontal frequency, reused across k2.
  int nx = field.shape[0], ny = field.shape[1];
  std::vector<std::vector<Complex>> ytab(static_cast<std::size_t>(2 * k_max - 1));
  for (int k2 = -(k_max - 1); k2 < k_max; ++k2) {
    ytab[static_cast<std::size_t>(k2 + k_max - 1)] =
        factor_table(k2, field.origin[1], field.h, ny);
  }
  std::vector<Complex> row_sum(static_cast<std::size_t>(ny));
  for (int k1 = 0; k1 < k_max; ++k1) {
    std::vector<Complex> tx = factor_table(k1, field.origin[0], field.h, nx);
    for (int iy = 0; iy < ny; ++iy) {
      Complex row{0.0, 0.0};
      std::size_t base = field.index(0, iy);
      for (int ix = 0; ix < nx; ++ix) {
        row += field.v[base + static_cast<std::size_t>(ix)] * tx[static_cast<std::size_t>(ix)];
      }
      row_sum[static_cast<std::size_t>(iy)] = row;
    }
    int lo2 = k1 == 0 ? 1 : -(k_max - 1);
    for (int k2 = lo2; k2 < k_max; ++k2) {
      double norm_sq = double(k1) * k1 + double(k2) * k2;
      if (norm_sq >= double(k_max) * k_max) continue;
      const auto& ty = ytab[static_cast<std::size_t>(k2 + k_max - 1)];
      Complex sum{0.0, 0.0};
      for (int iy = 0; iy < ny; ++iy) {
        sum += row_sum[static_cast<std::size_t>(iy)] * ty[static_cast<std::size_t>(iy)];
      }
      peaks[band_of(norm_sq)] = std::max(peaks[band_of(norm_sq)], std::abs(sum));
    }
  }
  return finish_report(n, k_max, mass, std::move(peaks));
}

std::string SpectrumReport::to_json() const {
  json j;
  j["level"] = level;
  j["k_max"] = k_max;
  j["mass"] = mass;
  j["band_peaks"] = band_peaks;
  j["sigma_hat"] = sigma_hat;
  j["sigma_stderr"] = sigma_stderr;
  j["fourier_dimension"] = fourier_dimension;
  return j.dump();
}

std::string SpectrumReport::to_csv() const {
  std::string out = "band,peak\n";
  char head[16];
  for (std::size_t m = 0; m < band_peaks.size(); ++m) {
    std::snprintf(head, sizeof(head), "%zu,", m);
    out += head;
    append_shortest(out, band_peaks[m]);
    out += '\n';
  }
  return out;
}

}  // namespace simart
