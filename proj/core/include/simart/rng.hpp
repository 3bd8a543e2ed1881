#pragma once

#include <cstdint>
#include <vector>

namespace simart {

// 64-bit finalizer with full avalanche; the basis of every random quantity in
// the library.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Hierarchical seed: a root value plus the ordered list of child indices that
// was folded in on the way down. Equal paths give equal streams; folding in a
// child index returns a new path and never mutates the parent, so sibling
// subtrees can be generated in any order.
struct SeedPath {
  std::uint64_t root = 0;
  std::vector<std::uint64_t> path;

  SeedPath() = default;
  explicit SeedPath(std::uint64_t r) : root(r) {}

  SeedPath child(std::uint64_t index) const {
    SeedPath out = *this;
    out.path.push_back(index);
    return out;
  }

  // Collapses root and path into the stream key.
  std::uint64_t key() const {
    std::uint64_t k = mix64(root + 0x9e3779b97f4a7c15ull);
    for (std::uint64_t e : path) k = fold_key(k, e);
    return k;
  }

  static std::uint64_t fold_key(std::uint64_t k, std::uint64_t element) {
    return mix64(k ^ mix64(element + 0xd1b54a32d192ed03ull));
  }
};

inline SeedPath fold_in(const SeedPath& seed, std::uint64_t index) {
  return seed.child(index);
}

// Counter-based generator: output i is a hash of (key, i), so a stream is
// random access and two streams with distinct keys are unrelated.
class Stream {
 public:
  Stream() : key_(mix64(0x9e3779b97f4a7c15ull)) {}
  explicit Stream(std::uint64_t key) : key_(key) {}
  explicit Stream(const SeedPath& seed) : key_(seed.key()) {}

  std::uint64_t next_u64() {
    return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ull);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform in {0, ..., bound-1}, exactly unbiased (Lemire's method).
  std::uint64_t next_below(std::uint64_t bound);

  bool next_bool(double prob_true) { return next_unit() < prob_true; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline Stream derive_stream(const SeedPath& seed) { return Stream(seed); }

// Poisson count with the given mean. Product-of-uniforms inversion for small
// means, Hormann's transformed rejection (PTRS) above 30.
std::uint64_t poisson(Stream& stream, double mean);

}  // namespace simart
