#include <doctest.h>

#include "mflab/simulate.hpp"
#include "oracles.hpp"

using namespace mflab;

namespace {

CtModel zoo_ct(const std::string& name, std::map<std::string, double> params = {}) {
  return std::get<CtModel>(make_zoo_model({name, std::move(params)}));
}

DtModel zoo_dt(const std::string& name, std::map<std::string, double> params = {}) {
  return std::get<DtModel>(make_zoo_model({name, std::move(params)}));
}

}  // namespace

TEST_CASE("simulate_ct: zero horizon returns the start") {
  auto sis = zoo_ct("sis");
  GridPoint y0 = round_to_grid(sis.domain(), 100, std::vector<double>{0.5});
  RngStream rng(1);
  auto res = simulate_ct(sis, 100, y0, 0.0, rng);
  CHECK(res.events == 0);
  CHECK(res.state.coords == y0.coords);
}

TEST_CASE("simulate_ct: from all-susceptible the first event is the forced infection") {
  auto sis = zoo_ct("sis", {{"beta", 2}, {"gamma", 1}, {"lambda0", 0.01}});
  GridPoint zero(sis.domain(), 100, {0});
  RngStream rng(42);
  auto res = simulate_ct(sis, 100, zero, 1e9, rng, {}, /*max_events=*/1);
  CHECK(res.events == 1);
  CHECK(res.state.coords == std::vector<long long>{1});  // 0.01
}

TEST_CASE("simulate_ct: determinism and grid closure") {
  auto hopf = zoo_ct("hopf");
  GridPoint y0 = round_to_grid(hopf.domain(), 200, hopf.domain().centroid());
  std::vector<double> times{1, 2, 3, 4, 5};
  RngStream a(7), b(7), c(8);
  auto ra = simulate_ct(hopf, 200, y0, 5.0, a, times);
  auto rb = simulate_ct(hopf, 200, y0, 5.0, b, times);
  auto rc = simulate_ct(hopf, 200, y0, 5.0, c, times);
  CHECK(ra.state.coords == rb.state.coords);
  CHECK(ra.events == rb.events);
  CHECK(ra.state.coords != rc.state.coords);  // different stream, different path
  for (const GridPoint& g : ra.samples) CHECK(hopf.domain().contains(g.embed(), 1e-12));
}

TEST_CASE("simulate_ct: frozen chain reports instead of erroring") {
  Domain dom = Domain::box({0.0}, {1.0});
  std::vector<Jump> jumps;
  jumps.push_back({{1}, RateExpr::parse("0", 1)});
  CtModel dead(dom, std::move(jumps), "dead");
  GridPoint y0(dom, 10, {5});
  RngStream rng(3);
  auto res = simulate_ct(dead, 10, y0, 5.0, rng, {1.0, 2.0});
  CHECK(res.frozen);
  CHECK(res.events == 0);
  CHECK(res.samples.size() == 2);
  CHECK(res.state.coords == y0.coords);
}

TEST_CASE("simulate_ct: sis endpoint mean near the oracle fixed point") {
  auto sis = zoo_ct("sis", {{"beta", 2}, {"gamma", 1}, {"lambda0", 0.01}});
  const double mstar = oracle::kSisFixedPoint;
  const long long N = 1000;
  GridPoint y0 = round_to_grid(sis.domain(), N, std::vector<double>{mstar});
  const int R = 200;
  Vec ends(R);
  RngSpec spec{1234};
  for (int r = 0; r < R; ++r) {
    RngStream s = spec.stream(static_cast<std::uint64_t>(r));
    ends[static_cast<std::size_t>(r)] = simulate_ct(sis, N, y0, 50.0, s).state.embed()[0];
  }
  double mean = 0.0;
  for (double e : ends) mean += e;
  mean /= R;
  double var = 0.0;
  for (double e : ends) var += mflab::sq(e - mean);
  var /= (R - 1);
  const double se = std::sqrt(var / R);
  CHECK(std::abs(mean - mstar) <= 3.0 * se + 1e-6);
}

TEST_CASE("two-state toy chain matches the birth-death balance oracle") {
  // states {0, 1/N}: constant up/down rates, boundary censoring makes it a
  // two-state chain; stationary mass at 1/N is u/(u+v)
  const double up = 0.3, down = 0.7;
  Domain dom = Domain::box({0.0}, {0.1});  // N=10 -> grid {0, 0.1}? no: hi=0.1, N=10 -> kmax=1
  std::vector<Jump> jumps;
  jumps.push_back({{1}, RateExpr::parse("0.3", 1)});
  jumps.push_back({{-1}, RateExpr::parse("0.7", 1)});
  CtModel toy(dom, std::move(jumps), "toy");
  const long long N = 10;

  StationaryOptions opts;
  opts.burn_in = 50;
  opts.n_samples = 4000;
  opts.spacing = 1.0;
  StationaryEstimate est = stationary_sample(Model(toy), N, opts, RngSpec{99});
  CHECK(est.truncations > 0);  // censoring is exercised at both ends
  double occupied = 0.0;
  for (std::size_t i = 0; i < est.cloud.size(); ++i)
    occupied += est.cloud.point(i)[0] > 0.05 ? 1.0 : 0.0;
  occupied /= static_cast<double>(est.cloud.size());
  const double p = oracle::birth_death_mass(up, down);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(est.cloud.size()));
  CHECK(std::abs(occupied - p) <= 3.0 * se);
}

TEST_CASE("simulate_dt: zero steps, identity kernel, determinism") {
  auto lg = zoo_dt("logistic", {{"r", 2.5}, {"eps", 1e-3}});
  GridPoint m0 = round_to_grid(lg.domain(), 1000, std::vector<double>{0.8, 0.2});
  RngStream rng(5);
  CHECK(simulate_dt(lg, 1000, m0, 0, rng).state.coords == m0.coords);

  Domain sim2 = Domain::simplex(2);
  std::vector<std::vector<RateExpr>> kernel(2);
  kernel[0] = {RateExpr::parse("1", 2), RateExpr::parse("0", 2)};
  kernel[1] = {RateExpr::parse("0", 2), RateExpr::parse("1", 2)};
  DtModel id(sim2, std::move(kernel), "identity");
  GridPoint g(sim2, 50, {20, 30});
  RngStream rng2(6);
  CHECK(simulate_dt(id, 50, g, 100, rng2).state.coords == g.coords);

  RngStream a(9), b(9);
  auto ra = simulate_dt(lg, 1000, m0, 20, a);
  auto rb = simulate_dt(lg, 1000, m0, 20, b);
  CHECK(ra.state.coords == rb.state.coords);
}

TEST_CASE("simulate_dt: one-step binomial mean") {
  auto lg = zoo_dt("logistic", {{"r", 2.5}, {"eps", 1e-3}});
  const long long N = 100000;
  GridPoint m0 = round_to_grid(lg.domain(), N, std::vector<double>{0.8, 0.2});
  RngStream rng(77);
  auto res = simulate_dt(lg, N, m0, 1, rng);
  const double m1 = res.state.embed()[1];
  const double se = std::sqrt(0.4 * 0.6 / static_cast<double>(N));
  CHECK(std::abs(m1 - 0.4) <= 3.0 * se);
}

TEST_CASE("multinomial step mean converges to the limit map") {
  auto lg = zoo_dt("logistic", {{"r", 3.2}, {"eps", 1e-3}});
  const long long N = 50;
  Vec m{0.7, 0.3};
  GridPoint m0 = round_to_grid(lg.domain(), N, m);
  const Vec target = lg.limit_map(m0.embed());
  const int R = 4000;
  RngSpec spec{2718};
  double mean1 = 0.0;
  for (int r = 0; r < R; ++r) {
    RngStream s = spec.stream(static_cast<std::uint64_t>(r));
    mean1 += simulate_dt(lg, N, m0, 1, s).state.embed()[1];
  }
  mean1 /= R;
  const double se = std::sqrt(0.25 / static_cast<double>(N) / R);
  CHECK(std::abs(mean1 - target[1]) <= 4.0 * se);
}

TEST_CASE("marginal_moments: t=0 collapses to the rounded start") {
  auto model = make_zoo_model({"sis", {}});
  auto h_set = make_test_function_set(model_domain(model));
  auto est = marginal_moments(model, 100, std::vector<double>{0.26}, 0.0, h_set, 10, RngSpec{1});
  CHECK(est.mean[0] == doctest::Approx(0.26).epsilon(1e-12));
  for (double v : est.variance) CHECK(v == 0.0);
  for (double c : est.ci_half) CHECK(c == 0.0);
}

TEST_CASE("marginal_moments: reduction independent of thread count") {
  auto model = make_zoo_model({"logistic", {{"r", 2.5}, {"eps", 1e-3}}});
  auto h_set = make_test_function_set(model_domain(model));
  auto a = marginal_moments(model, 500, std::vector<double>{0.8, 0.2}, 3.0, h_set, 24, RngSpec{4}, 1);
  auto b = marginal_moments(model, 500, std::vector<double>{0.8, 0.2}, 3.0, h_set, 24, RngSpec{4}, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  // and the estimate tracks g^3(0.2) = 0.6
  CHECK(std::abs(a.mean[1] - 0.6) <= 4.0 * std::sqrt(a.variance[1] / 24) + 1e-3);
}

TEST_CASE("marginal_moments rejects non-integer t for maps") {
  auto model = make_zoo_model({"logistic", {}});
  auto h_set = make_test_function_set(model_domain(model));
  CHECK_THROWS_AS(
      marginal_moments(model, 100, std::vector<double>{0.8, 0.2}, 1.5, h_set, 4, RngSpec{1}),
      ModelError);
}

TEST_CASE("stationary_sample: tiny spacing leaves consecutive samples nearly identical") {
  auto model = make_zoo_model({"sis", {}});
  StationaryOptions opts;
  opts.burn_in = 1.0;
  opts.n_samples = 2;
  opts.spacing = 1e-7;
  StationaryEstimate est = stationary_sample(model, 100, opts, RngSpec{5});
  CHECK(dist2(est.cloud.point(0), est.cloud.point(1)) <= 0.011);  // at most one jump apart
}

TEST_CASE("stationary_sample: sis cloud concentrates near the oracle fixed point") {
  auto model = make_zoo_model({"sis", {{"beta", 2}, {"gamma", 1}, {"lambda0", 0.01}}});
  StationaryOptions opts;
  opts.burn_in = 100;
  opts.n_samples = 500;
  opts.spacing = 1.0;
  StationaryEstimate est = stationary_sample(model, 2000, opts, RngSpec{11});
  double mean = 0.0;
  for (std::size_t i = 0; i < est.cloud.size(); ++i) mean += est.cloud.point(i)[0];
  mean /= static_cast<double>(est.cloud.size());
  CHECK(std::abs(mean - oracle::kSisFixedPoint) <= 0.01);
  CHECK(est.truncations == 0);  // sis rates vanish at the boundary
  CHECK(!est.frozen);
  // every support point is a valid grid embedding
  for (std::size_t i = 0; i < est.cloud.size(); ++i) {
    const double v = est.cloud.point(i)[0] * 2000.0;
    CHECK(std::abs(v - std::round(v)) <= 1e-9);
  }
}

TEST_CASE("stationary_sample: logistic(3.2) splits into the two-cycle clusters") {
  auto model = make_zoo_model({"logistic", {{"r", 3.2}, {"eps", 1e-3}}});
  StationaryOptions opts;
  opts.burn_in = 200;
  opts.n_samples = 400;
  opts.spacing = 1.0;
  StationaryEstimate est = stationary_sample(model, 5000, opts, RngSpec{21});
  auto cyc = oracle::logistic_two_cycle(3.2, 1e-3);
  std::size_t near_a = 0, near_b = 0;
  for (std::size_t i = 0; i < est.cloud.size(); ++i) {
    const double m1 = est.cloud.point(i)[1];
    if (std::abs(m1 - cyc.a) < 0.05) ++near_a;
    if (std::abs(m1 - cyc.b) < 0.05) ++near_b;
  }
  const auto n = static_cast<double>(est.cloud.size());
  CHECK(static_cast<double>(near_a + near_b) / n >= 0.95);
  CHECK(std::abs(static_cast<double>(near_a) / n - 0.5) <= 0.05);
  CHECK(std::abs(static_cast<double>(near_b) / n - 0.5) <= 0.05);
}

TEST_CASE("rng streams: identical ids agree, distinct ids differ within 64 draws") {
  RngSpec spec{123};
  RngStream a = spec.stream(5), b = spec.stream(5), c = spec.stream(6);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.u64(), y = b.u64(), z = c.u64();
    all_equal = all_equal && (x == y);
    any_diff = any_diff || (x != z);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}
