#include <doctest.h>

#include "mflab/wasserstein.hpp"

using namespace mflab;

namespace {

PointCloudMeasure cloud1d(std::vector<double> xs, Vec weights = {}) {
  Domain dom = Domain::box({-10.0}, {10.0});
  std::vector<Vec> pts;
  for (double x : xs) pts.push_back({x});
  if (weights.empty()) return PointCloudMeasure::equal_weight(dom, std::move(pts));
  return PointCloudMeasure(dom, std::move(pts), std::move(weights));
}

PointCloudMeasure random_cloud(const Domain& dom, std::size_t n, RngStream& rng) {
  std::vector<Vec> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(dom.sample_uniform(rng));
  return PointCloudMeasure::equal_weight(dom, std::move(pts));
}

}  // namespace

TEST_CASE("w1 between diracs is the point distance") {
  CHECK(w1(cloud1d({0.0}), cloud1d({0.5})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w1(cloud1d({0.3}), cloud1d({0.3})) == 0.0);
}

TEST_CASE("quantile coupling: uniform{0,1} vs dirac(0.5)") {
  CHECK(w1(cloud1d({0.0, 1.0}), cloud1d({0.5})) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("weighted 1-D quantile distance") {
  // 0.75 mass at 0, 0.25 at 1 vs dirac at 0: W1 = 0.25
  auto mu = cloud1d({0.0, 1.0}, {0.75, 0.25});
  CHECK(w1(mu, cloud1d({0.0})) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("bruteforce examples") {
  CHECK(w1_bruteforce(cloud1d({1.0}), cloud1d({4.0})) == 3.0);
  Domain dom = Domain::box({0.0, 0.0}, {1.0, 1.0});
  std::vector<Vec> a{{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}};
  auto mu = PointCloudMeasure::equal_weight(dom, a);
  std::vector<Vec> b{{0.5, 0.0}, {1.0, 0.0}, {0.0, 0.0}};  // cyclic shift
  auto nu = PointCloudMeasure::equal_weight(dom, b);
  CHECK(w1_bruteforce(mu, mu) == 0.0);
  CHECK(w1_bruteforce(mu, nu) == 0.0);  // same multiset
}

TEST_CASE("assignment equals permutation brute force on random instances") {
  RngStream rng(2024);
  for (int d = 1; d <= 3; ++d) {
    Domain dom = d == 1 ? Domain::box({-1.0}, {1.0})
                        : Domain::box(Vec(static_cast<std::size_t>(d), -1.0),
                                      Vec(static_cast<std::size_t>(d), 1.0));
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 6);  // 2..7
      auto mu = random_cloud(dom, n, rng);
      auto nu = random_cloud(dom, n, rng);
      CHECK(std::abs(w1_assignment(mu, nu) - w1_bruteforce(mu, nu)) <= 1e-12);
    }
  }
}

TEST_CASE("1-D quantile equals assignment on equal-weight clouds") {
  RngStream rng(31);
  Domain dom = Domain::box({-5.0}, {5.0});
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 7);
    auto mu = random_cloud(dom, n, rng);
    auto nu = random_cloud(dom, n, rng);
    CHECK(std::abs(w1_quantile_1d(mu, nu) - w1_assignment(mu, nu)) <= 1e-12);
  }
}

TEST_CASE("w1 is a metric on equal clouds") {
  RngStream rng(404);
  Domain dom = Domain::box({0.0, 0.0}, {1.0, 1.0});
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_cloud(dom, 12, rng);
    auto b = random_cloud(dom, 12, rng);
    auto c = random_cloud(dom, 12, rng);
    const double ab = w1_assignment(a, b), ba = w1_assignment(b, a);
    CHECK(std::abs(ab - ba) <= 1e-12);                 // symmetry
    CHECK(w1_assignment(a, a) == 0.0);                 // identity
    CHECK(ab > 0.0);                                   // distinct random clouds
    const double ac = w1_assignment(a, c), cb = w1_assignment(c, b);
    CHECK(ab <= ac + cb + 1e-9);                       // triangle
  }
}

TEST_CASE("resampled route is deterministic and sane") {
  RngStream rng(7);
  Domain dom = Domain::box({0.0, 0.0}, {1.0, 1.0});
  auto mu = random_cloud(dom, 300, rng);
  auto nu = random_cloud(dom, 211, rng);  // unequal sizes force resampling
  W1Options opts;
  opts.resample_n = 128;
  opts.seed = 5;
  const double a = w1(mu, nu, opts);
  const double b = w1(mu, nu, opts);
  CHECK(a == b);
  CHECK(a > 0.0);
  CHECK(a < dom.diameter());
  // identical measures stay at zero through the shared-offset resampling
  CHECK(w1(mu, mu, opts) == 0.0);
}

TEST_CASE("errors: dimension mismatch and cap") {
  Domain d1 = Domain::box({0.0}, {1.0});
  Domain d2 = Domain::box({0.0, 0.0}, {1.0, 1.0});
  RngStream rng(1);
  auto a = random_cloud(d1, 4, rng);
  auto b = random_cloud(d2, 4, rng);
  CHECK_THROWS_AS(w1(a, b), ModelError);
  W1Options opts;
  opts.resample_n = 4096;
  CHECK_THROWS_AS(w1(b, b, opts), ModelError);
  CHECK_THROWS_AS(w1_bruteforce(random_cloud(d1, 9, rng), random_cloud(d1, 9, rng)), ModelError);
}

TEST_CASE("systematic resampling preserves equal-weight clouds exactly") {
  RngStream rng(88);
  Domain dom = Domain::box({0.0, 0.0}, {1.0, 1.0});
  auto mu = random_cloud(dom, 64, rng);
  RngStream s(9);
  auto r = systematic_resample(mu, 64, s);
  REQUIRE(r.size() == mu.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    CHECK(dist2(r.point(i), mu.point(i)) == 0.0);
}
