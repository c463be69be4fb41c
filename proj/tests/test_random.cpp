#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "lapspec/parallel.hpp"
#include "lapspec/random.hpp"

using namespace lapspec;

TEST_CASE("philox4x32-10 known answers") {
  using C = std::array<std::uint32_t, 4>;
  using K = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("identical seed and stream give identical draws") {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
}

TEST_CASE("derived stream ids do not collide on a small box") {
  std::set<std::uint64_t> ids;
  for (std::uint64_t kind = 1; kind <= 6; ++kind)
    for (std::uint64_t a = 0; a < 50; ++a)
      for (std::uint64_t b = 0; b < 50; ++b) ids.insert(derive_stream_id(kind, a, b));
  CHECK(ids.size() == 6 * 50 * 50);
}

TEST_CASE("distribution moments") {
  RandomStream rng(1, 1);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, se = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    se += rng.exponential();
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
  CHECK(std::abs(se / n - 1.0) < 4 / std::sqrt(n));
}

TEST_CASE("poisson mean and variance, small and chunked means") {
  for (double mean : {0.0, 0.3, 2.0, 47.5, 120.0}) {
    RandomStream rng(3, static_cast<std::uint64_t>(mean * 10));
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n, v = s2 / n - m * m;
    CHECK(std::abs(m - mean) <= 4 * std::sqrt(std::max(mean, 1e-12) / n) + 1e-12);
    if (mean > 0) CHECK(std::abs(v - mean) <= 0.05 * mean + 0.01);
  }
}

TEST_CASE("index is uniform on its range") {
  RandomStream rng(5, 5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = rng.index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 4 * std::sqrt(10000.0));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}
