#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "simart/rng.hpp"
#include "simart/sha256.hpp"
#include "support.hpp"

using namespace simart;

TEST_SUITE("rng") {
  TEST_CASE("mix64 is deterministic and sensitive to single-bit flips") {
    CHECK(mix64(12345) == mix64(12345));
    CHECK(mix64(12345) != mix64(12346));

    // Avalanche: flipping one input bit should flip about half of the 64
    // output bits on average.
    Stream stream(7);
    double total = 0.0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
      std::uint64_t x = stream.next_u64();
      int bit = static_cast<int>(stream.next_below(64));
      std::uint64_t diff = mix64(x) ^ mix64(x ^ (1ull << bit));
      total += static_cast<double>(__builtin_popcountll(diff));
    }
    double mean = total / trials;
    CHECK(mean > 30.5);
    CHECK(mean < 33.5);
  }

  TEST_CASE("streams with equal keys agree and distinct keys decorrelate") {
    Stream a(42), b(42), c(43);
    double xor_bits = 0.0;
    for (int i = 0; i < 4096; ++i) {
      std::uint64_t va = a.next_u64();
      CHECK(va == b.next_u64());
      xor_bits += static_cast<double>(__builtin_popcountll(va ^ c.next_u64()));
    }
    double mean = xor_bits / 4096;
    CHECK(mean > 30.0);
    CHECK(mean < 34.0);
  }

  TEST_CASE("stream counter advances once per draw") {
    Stream s(5);
    CHECK(s.counter() == 0);
    s.next_u64();
    s.next_unit();
    CHECK(s.counter() == 2);
  }

  TEST_CASE("next_unit stays in the half-open unit interval") {
    Stream s(9);
    for (int i = 0; i < 100000; ++i) {
      double u = s.next_unit();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("next_below respects the bound and is roughly uniform") {
    Stream s(11);
    CHECK(s.next_below(1) == 0);
    std::vector<std::uint64_t> counts(10, 0);
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
      std::uint64_t v = s.next_below(10);
      REQUIRE(v < 10);
      ++counts[v];
    }
    for (std::uint64_t c : counts) {
      // 3 sigma of Binomial(1e5, 0.1) is about 285.
      CHECK(std::fabs(static_cast<double>(c) - trials / 10.0) < 400.0);
    }
  }

  TEST_CASE("next_in covers the requested range") {
    Stream s(13);
    for (int i = 0; i < 1000; ++i) {
      double v = s.next_in(-2.0, 3.0);
      CHECK(v >= -2.0);
      CHECK(v < 3.0);
    }
  }

  TEST_CASE("seed paths fold children into distinct order-sensitive keys") {
    SeedPath root(100);
    CHECK(root.child(1).key() == root.child(1).key());
    CHECK(root.child(1).key() != root.child(2).key());
    CHECK(root.child(1).child(2).key() != root.child(2).child(1).key());
    CHECK(SeedPath(100).key() != SeedPath(101).key());
    CHECK(fold_in(root, 5).key() == root.child(5).key());

    // Many siblings, no key collisions.
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 10000; ++i) keys.insert(root.child(i).key());
    CHECK(keys.size() == 10000);
  }

  TEST_CASE("poisson matches its first two moments") {
    Stream s(1234);
    const int n = 200000;
    const double mean = 4.0;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = static_cast<double>(poisson(s, mean));
      sum += x;
      sum_sq += x * x;
    }
    double emp_mean = sum / n;
    double emp_var = sum_sq / n - emp_mean * emp_mean;
    // 3 sigma windows from the exact Poisson moments.
    CHECK(std::fabs(emp_mean - mean) < 3.0 * std::sqrt(mean / n));
    double central4 = mean + 3.0 * mean * mean;
    CHECK(std::fabs(emp_var - mean) < 3.0 * std::sqrt((central4 - mean * mean) / n));
  }

  TEST_CASE("poisson holds up at large means") {
    Stream s(77);
    const int n = 50000;
    const double mean = 300.0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(poisson(s, mean));
    CHECK(std::fabs(sum / n - mean) < 3.0 * std::sqrt(mean / n));
  }

  TEST_CASE("poisson draws are reproducible per stream key") {
    Stream a(555), b(555);
    for (int i = 0; i < 100; ++i) CHECK(poisson(a, 2.5) == poisson(b, 2.5));
  }
}

TEST_SUITE("hash") {
  TEST_CASE("sha256 matches the reference vectors") {
    CHECK(sha256_hex(std::string()) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex(std::string("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex(std::string(
              "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  }

  TEST_CASE("incremental hashing agrees with one-shot hashing") {
    std::string payload;
    Stream s(31);
    for (int i = 0; i < 10000; ++i) payload.push_back(static_cast<char>(s.next_below(256)));
    Sha256 hasher;
    hasher.update(payload.data(), 1);
    hasher.update(payload.data() + 1, 999);
    hasher.update(payload.data() + 1000, payload.size() - 1000);
    CHECK(hasher.hex_digest() == sha256_hex(payload));
  }

  TEST_CASE("file hashing matches the in-memory digest") {
    auto dir = testsupport::fresh_dir("hash");
    auto path = dir / "payload.bin";
    std::string payload = "simart file hash check\n";
    testsupport::write_text(path, payload);
    CHECK(sha256_file_hex(path.string()) == sha256_hex(payload));
  }
}
