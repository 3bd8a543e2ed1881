#include "simart/subdivision.hpp"

#include <algorithm>
#include <cmath>

#include "simart/error.hpp"

namespace simart {

double WeightLaw::mean() const {
  double m = 0.0;
  for (const auto& [value, prob] : atoms) m += value * prob;
  return m;
}

void WeightLaw::validate() const {
  require(!atoms.empty(), "weight law: no atoms");
  require(std::isfinite(bound) && bound > 0.0, "weight law: bound must be positive");
  double total_prob = 0.0;
  for (const auto& [value, prob] : atoms) {
    require(std::isfinite(value) && value >= 0.0 && value <= bound,
            "weight law: values must lie in [0, bound]");
    require(std::isfinite(prob) && prob >= 0.0 && prob <= 1.0,
            "weight law: probabilities must lie in [0, 1]");
    total_prob += prob;
  }
  require(std::fabs(total_prob - 1.0) <= 1e-12, "weight law: probabilities must sum to 1");
  require(std::fabs(mean() - 1.0) <= 1e-12, "weight law: mean must equal 1");
}

SalemLineSpec SalemLineSpec::make(double alpha0, int depth) {
  require(alpha0 > 0.0 && alpha0 <= 1.0, "salem line: alpha0 must lie in (0, 1]");
  require(depth >= 0 && depth <= 59, "salem line: depth out of range [0, 59]");
  SalemLineSpec spec;
  spec.alpha0 = alpha0;
  spec.depth = depth;
  spec.cell_count.push_back(1.0);
  double p = 1.0;
  for (int j = 1; j <= depth; ++j) {
    int n_j = 2.0 * p <= std::exp2(alpha0 * j) ? 2 : 1;
    p *= n_j;
    spec.branching.push_back(n_j);
    spec.cell_count.push_back(p);
  }
  return spec;
}

const SubdivisionTree::Level& SubdivisionTree::level(int n) const {
  require(n >= 0 && n <= depth_, "subdivision: level out of range [0, depth]");
  return levels_[static_cast<std::size_t>(n)];
}

std::uint64_t SubdivisionTree::cell_index(const VecD& x, int n) const {
  require(n >= 0 && n <= depth_, "cell_index: level out of range [0, depth]");
  std::uint64_t coords[3] = {0, 0, 0};
  double scale = std::exp2(n);
  std::uint64_t limit = (std::uint64_t{1} << n) - 1;
  for (int i = 0; i < d_; ++i) {
    double t = std::floor(x[i] * scale);
    if (!(t > 0.0)) t = 0.0;
    coords[i] = t >= static_cast<double>(limit) ? limit : static_cast<std::uint64_t>(t);
  }
  std::uint64_t idx = 0;
  for (int j = n - 1; j >= 0; --j) {
    std::uint64_t digit = 0;
    for (int i = 0; i < d_; ++i) digit |= ((coords[i] >> j) & 1u) << i;
    idx = (idx << d_) | digit;
  }
  return idx;
}

double SubdivisionTree::beta_at(const VecD& x, int n) const {
  const Level& lv = level(n);
  std::uint64_t idx = cell_index(x, n);
  auto it = std::lower_bound(lv.index.begin(), lv.index.end(), idx);
  if (it == lv.index.end() || *it != idx) return 0.0;
  return lv.beta[static_cast<std::size_t>(it - lv.index.begin())];
}

double SubdivisionTree::density(const VecD& x, int n) const {
  for (int i = 0; i < d_; ++i) {
    if (x[i] < 0.0 || x[i] >= 1.0) return 0.0;
  }
  return beta_at(x, n);
}

double SubdivisionTree::mass_in_cell(int m, std::uint64_t cell, int n) const {
  require(m >= 0 && m <= n, "mass_in_cell: need 0 <= m <= n");
  const Level& lv = level(n);
  int shift = d_ * (n - m);
  std::uint64_t lo = cell << shift;
  std::uint64_t hi = (cell + 1) << shift;
  auto first = std::lower_bound(lv.index.begin(), lv.index.end(), lo);
  auto last = std::lower_bound(first, lv.index.end(), hi);
  double mass = 0.0;
  double cell_vol = std::exp2(-static_cast<double>(d_) * n);
  for (auto it = first; it != last; ++it) {
    mass += lv.beta[static_cast<std::size_t>(it - lv.index.begin())] * cell_vol;
  }
  return mass;
}

namespace {

class SubdivisionDensity final : public DensityEvaluator {
 public:
  SubdivisionDensity(const SubdivisionTree* tree, int n) : tree_(tree), n_(n) {}
  int dim() const override { return tree_->dim(); }
  int level() const override { return n_; }
  double growth_bound() const override { return tree_->growth_bound(); }
  Box support_box() const override { return Box::unit(tree_->dim()); }
  double operator()(const VecD& x) const override { return tree_->density(x, n_); }

 private:
  const SubdivisionTree* tree_;
  int n_;
};

}  // namespace

std::unique_ptr<DensityEvaluator> SubdivisionTree::evaluator(int n) const {
  require(n >= 0 && n <= depth_, "evaluator: level out of range [0, depth]");
  return std::make_unique<SubdivisionDensity>(this, n);
}

void SubdivisionTree::finish_level(Level& lv, int n) {
  double cell_vol = std::exp2(-static_cast<double>(d_) * n);
  lv.mass = 0.0;
  for (double b : lv.beta) lv.mass += b * cell_vol;
}

SubdivisionTree SubdivisionTree::percolation(int d, double p, int depth, const SeedPath& seed) {
  require(d >= 1 && d <= 3, "percolation: dimension must be 1, 2 or 3");
  require(p > 0.0 && p <= 1.0, "percolation: p must lie in (0, 1]");
  require(depth >= 0 && depth * d <= 20, "percolation: need depth * d <= 20");

  SubdivisionTree tree;
  tree.d_ = d;
  tree.depth_ = depth;
  tree.growth_ = 1.0 / p;
  tree.alpha_ = -std::log2(p);
  tree.param_ = p;
  tree.kind_ = SubdivisionKind::percolation;
  tree.seed_ = seed;
  tree.levels_.resize(static_cast<std::size_t>(depth) + 1);

  Level& root = tree.levels_[0];
  root.index = {0};
  root.weight = {1.0};
  root.beta = {1.0};
  root.mass = 1.0;

  std::vector<std::uint64_t> parent_keys = {seed.key()};
  std::vector<std::uint64_t> child_keys;
  int fan = 1 << d;
  double inv_p = 1.0 / p;

  for (int n = 1; n <= depth; ++n) {
    const Level& prev = tree.levels_[static_cast<std::size_t>(n - 1)];
    Level& cur = tree.levels_[static_cast<std::size_t>(n)];
    child_keys.clear();
    for (std::size_t i = 0; i < prev.index.size(); ++i) {
      for (int digit = 0; digit < fan; ++digit) {
        std::uint64_t key = SeedPath::fold_key(parent_keys[i], static_cast<std::uint64_t>(digit));
        Stream stream(key);
        if (stream.next_unit() < p) {
          cur.index.push_back((prev.index[i] << d) | static_cast<std::uint64_t>(digit));
          cur.weight.push_back(inv_p);
          cur.beta.push_back(prev.beta[i] * inv_p);
          child_keys.push_back(key);
        }
      }
    }
    tree.finish_level(cur, n);
    parent_keys.swap(child_keys);
  }
  return tree;
}

SubdivisionTree SubdivisionTree::cascade(int d, const WeightLaw& law, int depth,
                                         const SeedPath& seed) {
  require(d >= 1 && d <= 3, "cascade: dimension must be 1, 2 or 3");
  require(depth >= 0 && depth * d <= 20, "cascade: need depth * d <= 20");
  law.validate();

  // Atoms sorted by value descending; the cumulative-probability pick then
  // reproduces percolation exactly for the {1/p, 0} law under the same seed.
  std::vector<std::pair<double, double>> atoms = law.atoms;
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  double surviving_prob = 0.0;
  for (const auto& [value, prob] : atoms) {
    if (value > 0.0) surviving_prob += prob;
  }

  SubdivisionTree tree;
  tree.d_ = d;
  tree.depth_ = depth;
  tree.growth_ = law.bound;
  tree.alpha_ = surviving_prob > 0.0 ? -std::log2(surviving_prob) : std::exp2(60);
  tree.param_ = 0.0;
  tree.kind_ = SubdivisionKind::cascade;
  tree.seed_ = seed;
  tree.levels_.resize(static_cast<std::size_t>(depth) + 1);

  Level& root = tree.levels_[0];
  root.index = {0};
  root.weight = {1.0};
  root.beta = {1.0};
  root.mass = 1.0;

  std::vector<std::uint64_t> parent_keys = {seed.key()};
  std::vector<std::uint64_t> child_keys;
  int fan = 1 << d;

  for (int n = 1; n <= depth; ++n) {
    const Level& prev = tree.levels_[static_cast<std::size_t>(n - 1)];
    Level& cur = tree.levels_[static_cast<std::size_t>(n)];
    child_keys.clear();
    for (std::size_t i = 0; i < prev.index.size(); ++i) {
      for (int digit = 0; digit < fan; ++digit) {
        std::uint64_t key = SeedPath::fold_key(parent_keys[i], static_cast<std::uint64_t>(digit));
        Stream stream(key);
        double u = stream.next_unit();
        double acc = 0.0;
        double w = atoms.back().first;
        for (const auto& [value, prob] : atoms) {
          acc += prob;
          if (u < acc) {
            w = value;
            break;
          }
        }
        if (w > 0.0) {
          cur.index.push_back((prev.index[i] << d) | static_cast<std::uint64_t>(digit));
          cur.weight.push_back(w);
          cur.beta.push_back(prev.beta[i] * w);
          child_keys.push_back(key);
        }
      }
    }
    tree.finish_level(cur, n);
    parent_keys.swap(child_keys);
  }
  return tree;
}

SubdivisionTree SubdivisionTree::salem_line(double alpha0, int depth, const SeedPath& seed) {
  SalemLineSpec spec = SalemLineSpec::make(alpha0, depth);

  SubdivisionTree tree;
  tree.d_ = 1;
  tree.depth_ = depth;
  tree.growth_ = 2.0;
  tree.alpha_ = 1.0 - alpha0;
  tree.param_ = alpha0;
  tree.kind_ = SubdivisionKind::salem_line;
  tree.seed_ = seed;
  tree.branching_ = spec.branching;
  tree.levels_.resize(static_cast<std::size_t>(depth) + 1);

  Level& root = tree.levels_[0];
  root.index = {0};
  root.weight = {1.0};
  root.beta = {1.0};
  root.mass = 1.0;

  std::vector<std::uint64_t> parent_keys = {seed.key()};
  std::vector<std::uint64_t> child_keys;

  for (int n = 1; n <= depth; ++n) {
    const Level& prev = tree.levels_[static_cast<std::size_t>(n - 1)];
    Level& cur = tree.levels_[static_cast<std::size_t>(n)];
    child_keys.clear();
    int n_j = spec.branching[static_cast<std::size_t>(n - 1)];
    for (std::size_t i = 0; i < prev.index.size(); ++i) {
      if (n_j == 2) {
        for (int digit = 0; digit < 2; ++digit) {
          cur.index.push_back((prev.index[i] << 1) | static_cast<std::uint64_t>(digit));
          cur.weight.push_back(1.0);
          cur.beta.push_back(prev.beta[i]);
          child_keys.push_back(
              SeedPath::fold_key(parent_keys[i], static_cast<std::uint64_t>(digit)));
        }
      } else {
        Stream stream(parent_keys[i]);
        auto digit = stream.next_below(2);
        cur.index.push_back((prev.index[i] << 1) | digit);
        cur.weight.push_back(2.0);
        cur.beta.push_back(prev.beta[i] * 2.0);
        child_keys.push_back(SeedPath::fold_key(parent_keys[i], digit));
      }
    }
    tree.finish_level(cur, n);
    parent_keys.swap(child_keys);
  }
  return tree;
}

SubdivisionTree generate_percolation(int d, double p, int depth, const SeedPath& seed) {
  return SubdivisionTree::percolation(d, p, depth, seed);
}

SubdivisionTree generate_cascade(int d, const WeightLaw& law, int depth, const SeedPath& seed) {
  return SubdivisionTree::cascade(d, law, depth, seed);
}

SubdivisionTree generate_salem_line(double alpha0, int depth, const SeedPath& seed) {
  return SubdivisionTree::salem_line(alpha0, depth, seed);
}

Raster density_field(const SubdivisionTree& tree, int n, int resolution) {
  require(n >= 0 && n <= tree.depth(), "density_field: level out of range [0, depth]");
  require(resolution >= 1 && (resolution & (resolution - 1)) == 0,
          "density_field: resolution must be a power of two");
  require(resolution >= (1 << n), "density_field: resolution must be at least 2^n");

  int d = tree.dim();
  std::array<int, 3> shape{1, 1, 1};
  for (int i = 0; i < d; ++i) shape[static_cast<std::size_t>(i)] = resolution;
  Raster out(d, shape, VecD(d), 1.0 / resolution);

  int sub = resolution >> n;  // raster cells per tree cell per axis
  const auto& lv = tree.level(n);
  for (std::size_t ci = 0; ci < lv.index.size(); ++ci) {
    std::uint64_t idx = lv.index[ci];
    // Unpack the digit path back into per-axis coordinates.
    std::uint64_t coords[3] = {0, 0, 0};
    for (int j = 0; j < n; ++j) {
      std::uint64_t digit = (idx >> (d * j)) & ((1u << d) - 1u);
      for (int i = 0; i < d; ++i) coords[i] |= ((digit >> i) & 1u) << j;
    }
    double b = lv.beta[ci];
    int x0 = static_cast<int>(coords[0]) * sub;
    int y0 = d >= 2 ? static_cast<int>(coords[1]) * sub : 0;
    int z0 = d == 3 ? static_cast<int>(coords[2]) * sub : 0;
    int ylim = d >= 2 ? sub : 1;
    int zlim = d == 3 ? sub : 1;
    for (int dz = 0; dz < zlim; ++dz)
      for (int dy = 0; dy < ylim; ++dy)
        for (int dx = 0; dx < sub; ++dx) out.at(x0 + dx, y0 + dy, z0 + dz) = b;
  }
  return out;
}

}  // namespace simart
