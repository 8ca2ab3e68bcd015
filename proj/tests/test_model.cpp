#include <doctest.h>

#include <fstream>

#include "mflab/model.hpp"
#include "mflab/rng.hpp"
#include "oracles.hpp"

using namespace mflab;

namespace {

CtModel zoo_ct(const std::string& name, std::map<std::string, double> params) {
  return std::get<CtModel>(make_zoo_model({name, std::move(params)}));
}

DtModel zoo_dt(const std::string& name, std::map<std::string, double> params) {
  return std::get<DtModel>(make_zoo_model({name, std::move(params)}));
}

}  // namespace

TEST_CASE("sis drift zeros") {
  auto sis0 = zoo_ct("sis", {{"beta", 2}, {"gamma", 1}, {"lambda0", 0}});
  CHECK(sis0.drift(std::vector<double>{0.5})[0] == doctest::Approx(0.0).epsilon(1e-15));

  auto sis = zoo_ct("sis", {{"beta", 2}, {"gamma", 1}, {"lambda0", 0.01}});
  const double mstar = oracle::sis_fixed_point(2, 1, 0.01);
  CHECK(mstar == doctest::Approx(oracle::kSisFixedPoint).epsilon(1e-12));
  CHECK(std::abs(sis.drift(std::vector<double>{mstar})[0]) <= 1e-12);
}

TEST_CASE("hopf drift and eta cancellation") {
  auto hopf = zoo_ct("hopf", {{"mu", 0.25}, {"omega", 1}, {"eta", 0.05}});
  Vec f = hopf.drift(std::vector<double>{0.5, 0.0});
  CHECK(std::abs(f[0]) <= 1e-15);
  CHECK(f[1] == doctest::Approx(0.5).epsilon(1e-15));

  auto hopf0 = zoo_ct("hopf", {{"mu", 0.25}, {"omega", 1}, {"eta", 0.0}});
  RngStream rng(99);
  for (int i = 0; i < 100; ++i) {
    Vec y = hopf.domain().sample_uniform(rng);
    Vec a = hopf.drift(y), b = hopf0.drift(y);
    for (int k = 0; k < 2; ++k)
      CHECK(std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) <= 1e-15);
  }
}

TEST_CASE("simplex drift tangency is exact") {
  auto sirs = zoo_ct("sirs", {});
  RngStream rng(5);
  for (int i = 0; i < 200; ++i) {
    Vec m = sirs.domain().sample_uniform(rng);
    Vec f = sirs.drift(m);
    double s = 0.0;
    for (double v : f) s += v;
    CHECK(s == 0.0);
  }
}

TEST_CASE("logistic limit map equals the clamped logistic map") {
  auto lg = zoo_dt("logistic", {{"r", 2.5}, {"eps", 1e-3}});
  CHECK(lg.limit_map(std::vector<double>{0.8, 0.2})[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(lg.limit_map(std::vector<double>{0.4, 0.6})[1] == doctest::Approx(0.6).epsilon(1e-14));

  RngStream rng(11);
  for (int i = 0; i < 100; ++i) {
    const double m1 = rng.uniform();
    Vec out = lg.limit_map(std::vector<double>{1.0 - m1, m1});
    const double expect = oracle::logistic_map(2.5, 1e-3, m1);
    CHECK(std::abs(out[1] - expect) <= 1e-15);
    CHECK(out[0] + out[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("identity kernel maps any occupancy to itself") {
  Domain dom = Domain::simplex(2);
  std::vector<std::vector<RateExpr>> kernel(2);
  kernel[0] = {RateExpr::parse("1", 2), RateExpr::parse("0", 2)};
  kernel[1] = {RateExpr::parse("0", 2), RateExpr::parse("1", 2)};
  DtModel id(dom, std::move(kernel), "identity");
  Vec m{0.3, 0.7};
  CHECK(id.limit_map(m) == m);
}

TEST_CASE("validate_model") {
  auto sis = make_zoo_model({"sis", {{"beta", 2}, {"gamma", 1}, {"lambda0", 0.01}}});
  ValidationReport rep = validate_model(sis, 1000, 1);
  CHECK(rep.pass);
  CHECK(rep.min_rate >= 0.0);

  // simplex jump that creates mass
  Domain sim = Domain::simplex(3);
  std::vector<Jump> jumps;
  jumps.push_back({{1, 0, 0}, RateExpr::parse("x0", 3)});
  Model bad_ct = CtModel(sim, std::move(jumps), "bad");
  ValidationReport rep2 = validate_model(bad_ct, 10, 1);
  CHECK(!rep2.pass);
  CHECK(!rep2.mass_conservation);

  // kernel row summing to 1.5
  std::vector<std::vector<RateExpr>> kernel(2);
  kernel[0] = {RateExpr::parse("0.75", 2), RateExpr::parse("0.75", 2)};
  kernel[1] = {RateExpr::parse("0.5", 2), RateExpr::parse("0.5", 2)};
  Model bad_dt = DtModel(Domain::simplex(2), std::move(kernel), "bad");
  ValidationReport rep3 = validate_model(bad_dt, 10, 1);
  CHECK(!rep3.pass);
  CHECK(rep3.max_row_dev == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zoo parameter validation") {
  CHECK_THROWS_AS(make_zoo_model({"nosuch", {}}), ModelError);
  CHECK_THROWS_AS(make_zoo_model({"logistic", {{"r", 5.0}}}), ModelError);
  CHECK_THROWS_AS(make_zoo_model({"logistic", {{"eps", 0.5}}}), ModelError);
  CHECK_THROWS_AS(make_zoo_model({"sis", {{"beta", -1.0}}}), ModelError);
  CHECK_THROWS_AS(make_zoo_model({"sis", {{"nonsense", 1.0}}}), ModelError);
}

TEST_CASE("zoo attractors are strictly interior (distance > 0.1)") {
  // sis fixed point vs {0, 1}
  const double mstar = oracle::sis_fixed_point(2, 1, 0.01);
  CHECK(std::min(mstar, 1.0 - mstar) > 0.1);
  // hopf circle radius 0.5 inside [-2,2]^2
  CHECK(2.0 - 0.5 > 0.1);
  // logistic(3.2) two-cycle on the simplex: distance to the boundary is the
  // smallest coordinate of (1-m, m)
  auto c = oracle::logistic_two_cycle(3.2, 1e-3);
  CHECK(std::abs(c.a - oracle::kLogistic32CycleA) <= 1e-9);
  CHECK(std::abs(c.b - oracle::kLogistic32CycleB) <= 1e-9);
  for (double m : {c.a, c.b}) CHECK(std::min(m, 1.0 - m) > 0.1);
}

TEST_CASE("model json round trip") {
  auto models = {make_zoo_model({"sis", {}}), make_zoo_model({"sirs", {}}),
                 make_zoo_model({"hopf", {}}), make_zoo_model({"logistic", {}})};
  RngStream rng(3);
  for (const Model& m : models) {
    const std::string text = model_to_json_text(m);
    Model back = model_from_json_text(text);
    CHECK(model_name(back) == model_name(m));
    const Domain& dom = model_domain(m);
    for (int i = 0; i < 20; ++i) {
      Vec y = dom.sample_uniform(rng);
      if (const auto* ct = std::get_if<CtModel>(&m)) {
        Vec a = ct->drift(y), b = std::get<CtModel>(back).drift(y);
        CHECK(a == b);  // same source text -> identical trees -> identical eval
      } else {
        Vec a = std::get<DtModel>(m).limit_map(y);
        Vec b = std::get<DtModel>(back).limit_map(y);
        CHECK(a == b);
      }
    }
  }
}

TEST_CASE("model file loading") {
  const char* path = "test_model_tmp.json";
  {
    std::ofstream out(path);
    out << R"({"name": "toy", "kind": "ct",
               "domain": {"kind": "box", "dim": 1, "lo": [0], "hi": [1]},
               "jumps": [{"l": [1], "rate": "1 - x0"}, {"l": [-1], "rate": "x0"}],
               "params": {"k": 1.0}})";
  }
  Model m = load_model_file(path);
  std::remove(path);
  const auto& ct = std::get<CtModel>(m);
  CHECK(ct.name() == "toy");
  CHECK(ct.drift(std::vector<double>{0.25})[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(load_model_file("does_not_exist.json"), ModelError);
}
