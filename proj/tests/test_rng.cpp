#include <doctest.h>

#include <cmath>

#include "shrinkreg/rng.hpp"

using namespace shrinkreg;

TEST_CASE("substream keys separate domains and indices") {
  const auto a = rng::substream_key(1, rng::StreamDomain::kReplication, 0);
  const auto b = rng::substream_key(1, rng::StreamDomain::kReplication, 1);
  const auto c = rng::substream_key(1, rng::StreamDomain::kDesign, 0);
  const auto d = rng::substream_key(2, rng::StreamDomain::kReplication, 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a != d);
}

TEST_CASE("streams are reproducible") {
  rng::NormalStream s1(42, rng::StreamDomain::kReplication, 7);
  rng::NormalStream s2(42, rng::StreamDomain::kReplication, 7);
  for (int i = 0; i < 100; ++i) CHECK(s1.normal() == s2.normal());
}

TEST_CASE("uniform stays in [0, 1)") {
  rng::NormalStream s(3, rng::StreamDomain::kHoldout, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments look Gaussian") {
  rng::NormalStream s(11, rng::StreamDomain::kReplication, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
    sum3 += z * z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double skew = sum3 / n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
  CHECK(std::abs(skew) < 0.05);
}
