#include <doctest.h>

#include "terrafollow/rng.hpp"

#include <cmath>
#include <initializer_list>

using terrafollow::Rng;

TEST_CASE("rng determinism and stream independence") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng root(42);
  Rng f1 = root.fork(1, 2);
  Rng f2 = root.fork(1, 3);
  Rng f1_again = root.fork(1, 2);
  CHECK(f1.next_u64() == f1_again.next_u64());
  CHECK(f1.next_u64() != f2.next_u64());
}

TEST_CASE("gaussian moments") {
  Rng rng(7);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("poisson moments, small and chunked rates") {
  Rng rng(11);
  for (double lambda : {3.0, 40.0, 700.0}) {
    const int n = lambda > 100 ? 2000 : 20000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(lambda));
    double mean = sum / n;
    double se = std::sqrt(lambda / n);
    CHECK(std::abs(mean - lambda) < 4.0 * se);
  }
  CHECK(Rng(1).poisson(0.0) == 0);
}

TEST_CASE("uniform range") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform(2.0, 3.0);
    CHECK(u >= 2.0);
    CHECK(u < 3.0);
  }
}
