#include <doctest.h>

#include <cmath>

#include "metacure/numkit/rng.hpp"

using metacure::numkit::Rng;

TEST_CASE("identical seeds give identical sequences") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
  }
}

TEST_CASE("streams differ by purpose and ids") {
  Rng a = Rng::stream(7, "collect", 0, 0);
  Rng b = Rng::stream(7, "collect", 1, 0);
  Rng c = Rng::stream(7, "train", 0, 0);
  const double va = a.uniform(), vb = b.uniform(), vc = c.uniform();
  CHECK(va != vb);
  CHECK(va != vc);

  Rng a2 = Rng::stream(7, "collect", 0, 0);
  CHECK(a2.uniform() == va);
}

TEST_CASE("uniform stays in range") {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-2.0, 5.0);
    CHECK(u >= -2.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("normal moments are close to standard") {
  Rng r(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("index covers the range and respects bounds") {
  Rng r(5);
  bool seen[7] = {};
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = r.index(7);
    CHECK(k < 7);
    seen[k] = true;
  }
  for (bool s : seen) CHECK(s);
}
