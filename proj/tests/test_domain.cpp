#include <doctest.h>

#include "mflab/simulate.hpp"
#include "oracles.hpp"

using namespace mflab;

TEST_CASE("domain membership and geometry") {
  Domain box = Domain::box({0.0, -1.0}, {1.0, 1.0});
  CHECK(box.contains(std::vector<double>{0.5, 0.0}));
  CHECK(box.contains(std::vector<double>{0.0, -1.0}));
  CHECK(!box.contains(std::vector<double>{1.1, 0.0}));
  CHECK(box.diameter() == doctest::Approx(std::sqrt(5.0)));
  CHECK(box.centroid() == Vec{0.5, 0.0});

  Domain sim = Domain::simplex(3);
  CHECK(sim.contains(std::vector<double>{0.2, 0.3, 0.5}));
  CHECK(!sim.contains(std::vector<double>{0.2, 0.3, 0.6}));
  CHECK(!sim.contains(std::vector<double>{-0.1, 0.6, 0.5}));
  CHECK(sim.centroid() == Vec{1.0 / 3, 1.0 / 3, 1.0 / 3});

  CHECK_THROWS_AS(Domain::box({1.0}, {1.0}), ModelError);  // lo < hi required
}

TEST_CASE("grid points embed into their domain") {
  Domain box = Domain::box({0.0}, {1.0});
  GridPoint g(box, 10, {3});
  CHECK(g.embed() == Vec{0.3});
  CHECK_THROWS_AS(GridPoint(box, 10, {11}), ModelError);
  CHECK_THROWS_AS(GridPoint(box, 10, {-1}), ModelError);

  Domain sim = Domain::simplex(3);
  GridPoint s(sim, 4, {2, 1, 1});
  CHECK(s.embed() == Vec{0.5, 0.25, 0.25});
  CHECK_THROWS_AS(GridPoint(sim, 4, {2, 1, 2}), ModelError);  // sums to 5
}

TEST_CASE("round_to_grid box: nearest, ties toward lo") {
  Domain box = Domain::box({0.0}, {1.0});
  CHECK(round_to_grid(box, 10, std::vector<double>{0.26}).coords == std::vector<long long>{3});
  CHECK(round_to_grid(box, 10, std::vector<double>{0.25}).coords == std::vector<long long>{2});
  CHECK(round_to_grid(box, 10, std::vector<double>{0.3}).coords == std::vector<long long>{3});
  CHECK(round_to_grid(box, 10, std::vector<double>{1.0}).coords == std::vector<long long>{10});
  CHECK(round_to_grid(box, 10, std::vector<double>{0.0}).coords == std::vector<long long>{0});
}

TEST_CASE("round_to_grid simplex matches the largest-remainder oracle") {
  Domain sim = Domain::simplex(3);
  const Vec third{1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(round_to_grid(sim, 4, third).coords == std::vector<long long>{2, 1, 1});
  CHECK(round_to_grid(sim, 4, third).coords == oracle::largest_remainder(third, 4));

  RngStream rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    Vec y = sim.sample_uniform(rng);
    const long long N = 1 + static_cast<long long>(rng.uniform() * 50);
    auto got = round_to_grid(sim, N, y);
    CHECK(got.coords == oracle::largest_remainder(y, N));
    // l1 distance bound d/N
    const Vec e = got.embed();
    double l1 = 0.0;
    for (int i = 0; i < 3; ++i) l1 += std::abs(e[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]);
    CHECK(l1 <= 3.0 / static_cast<double>(N) + 1e-12);
  }
}

TEST_CASE("round_to_grid is the identity on grid points") {
  Domain box = Domain::box({0.0}, {1.0});
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const long long N = 1 + static_cast<long long>(rng.uniform() * 100);
    const auto k = static_cast<long long>(rng.uniform() * static_cast<double>(N + 1));
    GridPoint g(box, N, {std::min(k, N)});
    CHECK(round_to_grid(box, N, g.embed()).coords == g.coords);
  }
  Domain sim = Domain::simplex(2);
  GridPoint s(sim, 7, {3, 4});
  CHECK(round_to_grid(sim, 7, s.embed()).coords == s.coords);
}
