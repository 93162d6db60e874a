#include <doctest.h>

#include <set>

#include "nklon/rng.hpp"

using namespace nklon;

TEST_CASE("splitmix64 streams are deterministic") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("bounded draws stay in range and cover small ranges") {
  SplitMix64 rng(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = rng.bounded(6);
    CHECK(v < 6);
    seen.insert(v);
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("next_double lies in [0,1)") {
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("substreams differ from each other and from the base stream") {
  SplitMix64 base(99);
  SplitMix64 s0 = substream(99, 0);
  SplitMix64 s1 = substream(99, 1);
  int equal01 = 0, equal0b = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t v0 = s0.next(), v1 = s1.next(), vb = base.next();
    if (v0 == v1) ++equal01;
    if (v0 == vb) ++equal0b;
  }
  CHECK(equal01 == 0);
  CHECK(equal0b == 0);
}
