#include "simart/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "simart/error.hpp"
#include "simart/fit.hpp"

namespace simart {

namespace {

using nlohmann::json;

void append_shortest(std::string& out, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

// Resolves a fit window over the levels where `usable` holds, defaulting to
// the full first..last usable range, and checks it is solid and long enough.
void resolve_window(const std::vector<bool>& usable, int* level_lo, int* level_hi,
                    const char* what) {
  int first = -1, last = -1;
  for (std::size_t m = 0; m < usable.size(); ++m) {
    if (usable[m]) {
      if (first < 0) first = static_cast<int>(m);
      last = static_cast<int>(m);
    }
  }
  if (*level_lo < 0) *level_lo = first;
  if (*level_hi < 0) *level_hi = last;
  require(first >= 0, std::string(what) + ": no populated levels");
  require(*level_lo >= 0 && *level_lo <= *level_hi &&
              *level_hi < static_cast<int>(usable.size()),
          std::string(what) + ": bad fit window");
  for (int m = *level_lo; m <= *level_hi; ++m) {
    require(usable[static_cast<std::size_t>(m)],
            std::string(what) + ": level without data inside the fit window");
  }
  require(*level_hi - *level_lo + 1 >= 4, std::string(what) + ": needs at least 4 levels");
}

DimensionFit finish_dimension_fit(DimensionKind kind, int level_lo, int level_hi,
                                  std::vector<double> stats) {
  DimensionFit fit;
  fit.kind = kind;
  fit.level_lo = level_lo;
  fit.level_hi = level_hi;
  fit.per_level = std::move(stats);
  std::vector<double> xs, ys;
  for (int m = level_lo; m <= level_hi; ++m) {
    xs.push_back(static_cast<double>(m));
    ys.push_back(fit.per_level[static_cast<std::size_t>(m - level_lo)]);
  }
  LinearFit line = fit_line(xs, ys);
  fit.slope = line.slope;
  fit.slope_stderr = line.slope_stderr;
  require(std::isfinite(fit.slope), "dimension fit: slope not finite");
  return fit;
}

}  // namespace

DimensionFit box_dimension(const std::vector<std::uint64_t>& counts_per_level, int level_lo,
                           int level_hi) {
  std::vector<bool> usable(counts_per_level.size());
  for (std::size_t m = 0; m < counts_per_level.size(); ++m) usable[m] = counts_per_level[m] > 0;
  resolve_window(usable, &level_lo, &level_hi, "box_dimension");
  std::vector<double> stats;
  for (int m = level_lo; m <= level_hi; ++m) {
    stats.push_back(std::log2(static_cast<double>(counts_per_level[static_cast<std::size_t>(m)])));
  }
  return finish_dimension_fit(DimensionKind::box, level_lo, level_hi, std::move(stats));
}

DimensionFit correlation_dimension(const std::vector<std::vector<double>>& masses_per_level,
                                   int level_lo, int level_hi) {
  std::vector<bool> usable(masses_per_level.size());
  std::vector<double> stat_by_level(masses_per_level.size(), 0.0);
  for (std::size_t m = 0; m < masses_per_level.size(); ++m) {
    double total = 0.0;
    for (double v : masses_per_level[m]) {
      require(std::isfinite(v) && v >= 0.0,
              "correlation_dimension: masses must be finite and nonnegative");
      total += v;
    }
    if (total <= 0.0) continue;
    double sq = 0.0;
    for (double v : masses_per_level[m]) {
      double p = v / total;
      sq += p * p;
    }
    usable[m] = true;
    stat_by_level[m] = -std::log2(sq);
  }
  resolve_window(usable, &level_lo, &level_hi, "correlation_dimension");
  std::vector<double> stats(stat_by_level.begin() + level_lo,
                            stat_by_level.begin() + level_hi + 1);
  return finish_dimension_fit(DimensionKind::correlation, level_lo, level_hi, std::move(stats));
}

std::string DimensionFit::to_json() const {
  json j;
  j["kind"] = kind == DimensionKind::box ? "box" : "correlation";
  j["level_lo"] = level_lo;
  j["level_hi"] = level_hi;
  j["per_level"] = per_level;
  j["slope"] = slope;
  j["slope_stderr"] = slope_stderr;
  return j.dump();
}

std::string DimensionFit::to_csv() const {
  std::string out = "level,statistic\n";
  char head[32];
  for (std::size_t i = 0; i < per_level.size(); ++i) {
    std::snprintf(head, sizeof(head), "%d,", level_lo + static_cast<int>(i));
    out += head;
    append_shortest(out, per_level[i]);
    out += '\n';
  }
  return out;
}

std::vector<std::uint64_t> occupied_cell_counts(const Realization& realization, int max_level) {
  require(!realization.empty(), "occupied_cell_counts: empty realization");
  require(max_level >= 0, "occupied_cell_counts: max_level must be nonnegative");

  if (const SubdivisionTree* tree = realization.subdivision()) {
    require(max_level <= tree->depth(), "occupied_cell_counts: max_level beyond tree depth");
    std::vector<std::uint64_t> counts;
    for (int m = 0; m <= max_level; ++m) {
      counts.push_back(tree->level(m).index.size());
    }
    return counts;
  }

  const CutoutRealization& real = *realization.cutout();
  int d = real.domain().d;
  require(d * max_level <= 24, "occupied_cell_counts: lattice beyond 2^24 cells");
  int res = 1 << max_level;

  // Morton keys of the lattice cells whose centers survive every level.
  std::vector<std::uint64_t> keys;
  Box bbox = real.domain().bounding_box();
  if (d <= 2 && real.shrink() == 1.0) {
    CoverGrid grid = sample_cover_grid(real.intensity(), real.domain(), real.depth(),
                                       real.seed(), res);
    auto survivor = static_cast<std::uint8_t>(grid.depth + 1);
    int ny = d == 2 ? res : 1;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < res; ++ix) {
        if (grid.level[grid.index(ix, iy)] != survivor) continue;
        std::uint64_t key = 0;
        for (int j = 0; j < max_level; ++j) {
          std::uint64_t digit = (static_cast<std::uint64_t>(ix) >> j) & 1u;
          if (d == 2) digit |= ((static_cast<std::uint64_t>(iy) >> j) & 1u) << 1;
          key |= digit << (d * j);
        }
        keys.push_back(key);
      }
    }
  } else {
    double extent = 0.0;
    for (int i = 0; i < d; ++i) extent = std::max(extent, bbox.hi[i] - bbox.lo[i]);
    double h = extent / res;
    std::int64_t total = 1;
    for (int i = 0; i < d; ++i) total *= res;
    VecD x(d);
    for (std::int64_t flat = 0; flat < total; ++flat) {
      std::int64_t rest = flat;
      std::uint64_t key = 0;
      for (int i = 0; i < d; ++i) {
        std::int64_t c = rest % res;
        rest /= res;
        x[i] = bbox.lo[i] + (static_cast<double>(c) + 0.5) * h;
        for (int j = 0; j < max_level; ++j) {
          key |= ((static_cast<std::uint64_t>(c) >> j) & 1u) << (d * j + i);
        }
      }
      if (!real.domain().contains(x)) continue;
      if (real.first_cover_level(x) != real.depth() + 1) continue;
      keys.push_back(key);
    }
  }

  std::sort(keys.begin(), keys.end());
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_level) + 1, 0);
  for (int m = 0; m <= max_level; ++m) {
    int shift = d * (max_level - m);
    std::uint64_t distinct = 0;
    std::uint64_t prev = 0;
    bool first = true;
    for (std::uint64_t key : keys) {
      std::uint64_t coarse = key >> shift;
      if (first || coarse != prev) {
        ++distinct;
        prev = coarse;
        first = false;
      }
    }
    counts[static_cast<std::size_t>(m)] = distinct;
  }
  return counts;
}

Raster rasterize_density(const Realization& realization, int n, int resolution) {
  require(!realization.empty(), "rasterize_density: empty realization");
  require(resolution >= 1 && (resolution & (resolution - 1)) == 0,
          "rasterize_density: resolution must be a power of two");
  require(n >= 0 && n <= realization.depth(), "rasterize_density: level out of range");

  if (const SubdivisionTree* tree = realization.subdivision()) {
    require(resolution >= (1 << n), "rasterize_density: resolution below the cell scale");
    return density_field(*tree, n, resolution);
  }

  int d = realization.dim();
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= resolution;
  require(total <= (std::int64_t(1) << 26), "rasterize_density: lattice beyond 2^26 cells");

  Box box = realization.support_box();
  double extent = 0.0;
  for (int i = 0; i < d; ++i) extent = std::max(extent, box.hi[i] - box.lo[i]);
  double h = extent / resolution;
  std::array<int, 3> shape{1, 1, 1};
  for (int i = 0; i < d; ++i) shape[static_cast<std::size_t>(i)] = resolution;
  Raster out(d, shape, box.lo, h);

  auto density = realization.evaluator(n);
  VecD x(d);
  std::int64_t flat = 0;
  int nz = d == 3 ? resolution : 1;
  int ny = d >= 2 ? resolution : 1;
  for (int iz = 0; iz < nz; ++iz) {
    if (d == 3) x[2] = box.lo[2] + (iz + 0.5) * h;
    for (int iy = 0; iy < ny; ++iy) {
      if (d >= 2) x[1] = box.lo[1] + (iy + 0.5) * h;
      for (int ix = 0; ix < resolution; ++ix) {
        x[0] = box.lo[0] + (ix + 0.5) * h;
        out.v[static_cast<std::size_t>(flat++)] = (*density)(x);
      }
    }
  }
  return out;
}

TailAudit increment_tail_audit(const ModelSpec& model, const FamilySpec& family, int n,
                               const std::vector<double>& kappas, std::uint64_t replicates,
                               const SeedPath& seed, const MassOptions& options) {
  model.validate();
  family.validate();
  require(n >= 0 && n + 1 <= model.depth,
          "increment_tail_audit: needs model depth at least n + 1");
  require(!kappas.empty(), "increment_tail_audit: needs at least one kappa");
  for (double kappa : kappas) {
    require(std::isfinite(kappa) && kappa > 0.0,
            "increment_tail_audit: kappas must be positive");
  }
  require(replicates >= 1, "increment_tail_audit: needs at least one replicate");
  double s = family.frostman_exponent();
  double alpha = model.alpha();
  if (!(s > alpha)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "increment_tail_audit: requires s > alpha, got family exponent s = %.6g <= "
                  "alpha = %.6g",
                  s, alpha);
    fail_validation(buf);
  }

  TailAudit audit;
  audit.level = n;
  audit.replicates = replicates;
  audit.kappas = kappas;
  std::sort(audit.kappas.begin(), audit.kappas.end());
  audit.exceed_counts.assign(audit.kappas.size(), 0);

  for (std::uint64_t r = 0; r < replicates; ++r) {
    Realization real = Realization::make(model, seed.child(r));
    double y_n = family_mass(real, family, n, options);
    double y_next = family_mass(real, family, n + 1, options);
    double increment = std::fabs(y_next - y_n);
    double root = std::sqrt(y_n);
    for (std::size_t i = 0; i < audit.kappas.size(); ++i) {
      if (increment > audit.kappas[i] * root) ++audit.exceed_counts[i];
    }
  }

  audit.frequencies.reserve(audit.kappas.size());
  for (std::uint64_t count : audit.exceed_counts) {
    audit.frequencies.push_back(static_cast<double>(count) / static_cast<double>(replicates));
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < audit.kappas.size(); ++i) {
    if (audit.frequencies[i] <= 0.0) continue;
    xs.push_back(audit.kappas[i] * audit.kappas[i] * std::exp2((s - alpha) * n));
    ys.push_back(std::log(audit.frequencies[i]));
  }
  if (xs.size() >= 2) {
    audit.decay_fitted = true;
    audit.decay_slope = fit_line(xs, ys).slope;
  }
  return audit;
}

std::string TailAudit::to_json() const {
  json j;
  j["level"] = level;
  j["replicates"] = replicates;
  j["kappas"] = kappas;
  j["exceed_counts"] = exceed_counts;
  j["frequencies"] = frequencies;
  j["decay_fitted"] = decay_fitted;
  j["decay_slope"] = decay_slope;
  return j.dump();
}

std::string TailAudit::to_csv() const {
  std::string out = "kappa,exceed_count,frequency\n";
  char buf[32];
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    append_shortest(out, kappas[i]);
    std::snprintf(buf, sizeof(buf), ",%llu,",
                  static_cast<unsigned long long>(exceed_counts[i]));
    out += buf;
    append_shortest(out, frequencies[i]);
    out += '\n';
  }
  return out;
}

}  // namespace simart
