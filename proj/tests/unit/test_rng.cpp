#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dynrcm/rng.hpp"
#include "dynrcm/stats.hpp"

using namespace dynrcm;

TEST_CASE("derive_seed is deterministic and separates siblings") {
  const RandomSeed s{12345, {7}};
  CHECK(derive_seed(s, 3) == derive_seed(s, 3));
  CHECK(derive_seed(s, 3).key() == derive_seed(s, 3).key());
  CHECK(derive_seed(s, {1, 2}) == derive_seed(derive_seed(s, 1), 2));
  CHECK(derive_seed(s, 0).key() != derive_seed(s, 1).key());
  CHECK(derive_seed(s, {0, 1}).key() != derive_seed(s, {1, 0}).key());
}

TEST_CASE("derive(s, 0) and derive(s, 1) never collide over 10^6 random masters") {
  Stream masters(0xABCDEF);
  std::size_t collisions = 0;
  for (int i = 0; i < 1000000; ++i) {
    const RandomSeed s{masters(), {}};
    collisions += derive_seed(s, 0).key() == derive_seed(s, 1).key() ? 1 : 0;
  }
  CHECK(collisions == 0);
}

TEST_CASE("sibling keys are distinct over a dense index range") {
  const RandomSeed s{99, {}};
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 200000; ++i) keys.insert(derive_seed(s, i).key());
  CHECK(keys.size() == 200000);
}

TEST_CASE("streams replay identically") {
  Stream a(derive_seed(RandomSeed{5, {}}, 2));
  Stream b(derive_seed(RandomSeed{5, {}}, 2));
  for (int i = 0; i < 1000; ++i) REQUIRE(a() == b());
  CHECK(a.counter() == 1000);
}

TEST_CASE("sibling streams are uncorrelated") {
  const RandomSeed s{2024, {}};
  Stream a(derive_seed(s, 0));
  Stream b(derive_seed(s, 1));
  const int n = 200000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform();
    const double y = b.uniform();
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  // Standard error of a null correlation is 1/sqrt(n).
  CHECK(std::abs(corr) < 5.0 / std::sqrt(n));
}

TEST_CASE("uniform, exponential and below have the right ranges and means") {
  Stream rng(77);
  const int n = 200000;
  std::vector<double> u(n);
  std::vector<double> e(n);
  std::vector<std::size_t> cells(7, 0);
  for (int i = 0; i < n; ++i) {
    u[i] = rng.uniform();
    REQUIRE(u[i] >= 0.0);
    REQUIRE(u[i] < 1.0);
    const double o = rng.uniform_open();
    REQUIRE(o > 0.0);
    REQUIRE(o < 1.0);
    e[i] = rng.exponential(2.0);
    REQUIRE(e[i] > 0.0);
    const auto k = rng.below(7);
    REQUIRE(k < 7);
    ++cells[k];
  }
  const Summary su = summarize(u);
  const Summary se = summarize(e);
  CHECK(std::abs(su.mean - 0.5) < 4 * su.standard_error);
  CHECK(std::abs(se.mean - 0.5) < 4 * se.standard_error);
  CHECK(chi_square_uniform(cells).p_value > 1e-4);
}
