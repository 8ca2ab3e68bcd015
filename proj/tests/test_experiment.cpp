#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mflab/experiment.hpp"
#include "oracles.hpp"

using namespace mflab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentPlan small_sis_plan() {
  ExperimentPlan plan;
  plan.zoo = {"sis", {{"beta", 2}, {"gamma", 1}, {"lambda0", 0.01}}};
  plan.N_list = {100, 400};
  plan.t_list = {1.0};
  plan.replicas = 24;
  plan.stationary.burn_in = 40;
  plan.stationary.n_samples = 150;
  plan.stationary.spacing = 1.0;
  plan.boot_resamples = 40;
  plan.seed = 7;
  plan.tolerance = 0.1;
  return plan;
}

}  // namespace

TEST_CASE("plan validation rejects malformed grids") {
  ExperimentPlan plan = small_sis_plan();
  plan.N_list = {100};
  CHECK_THROWS_AS(plan.validate(), ModelError);
  plan = small_sis_plan();
  plan.N_list = {400, 100};
  CHECK_THROWS_AS(plan.validate(), ModelError);
  plan = small_sis_plan();
  plan.t_list.clear();
  CHECK_THROWS_AS(plan.validate(), ModelError);
  plan = small_sis_plan();
  plan.replicas = 1;
  CHECK_THROWS_AS(plan.validate(), ModelError);
  plan = small_sis_plan();
  plan.zoo = {"logistic", {}};
  plan.t_list = {1.5};
  CHECK_THROWS_AS(plan.validate(), ModelError);
}

TEST_CASE("spread starts match the documented patterns") {
  Domain line = Domain::box({0.0}, {1.0});
  auto s5 = spread_starts(line, 5);
  REQUIRE(s5.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(s5[static_cast<std::size_t>(i)][0] == doctest::Approx((i + 1) / 6.0).epsilon(1e-12));

  Domain square = Domain::box({-2.0, -2.0}, {2.0, 2.0});
  auto s9 = spread_starts(square, 9);
  REQUIRE(s9.size() == 9);
  bool has_center = false;
  for (const Vec& p : s9)
    if (norm2(p) == 0.0) has_center = true;
  CHECK(has_center);  // the unstable origin is probed directly

  Domain sim2 = Domain::simplex(2);
  auto s9s = spread_starts(sim2, 9);
  REQUIRE(s9s.size() == 9);
  for (const Vec& p : s9s) CHECK(sim2.contains(p, 1e-12));
  CHECK(s9s[0][0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s9s[8][0] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("check_theorem on a small sis plan: structure and verdicts") {
  ExperimentPlan plan = small_sis_plan();
  ReportDocument rep = check_theorem(plan);
  CHECK(rep.experiment == "theorem");
  REQUIRE(rep.tables.size() == 2);
  CHECK(rep.tables[0].name == "residuals");
  CHECK(rep.tables[0].rows.size() == 2);  // 2 N x 1 t
  CHECK(rep.tables[1].name == "pairing");
  CHECK(rep.doc["verdicts"].contains("pass"));
  CHECK(rep.doc["provenance"].contains("config_sha256"));
  CHECK(rep.clouds.size() == 2);

  // verdicts recompute from the persisted tables alone
  Table residuals = Table::from_csv("residuals", rep.tables[0].to_csv());
  Table pairing = Table::from_csv("pairing", rep.tables[1].to_csv());
  CHECK(theorem_verdicts(plan, residuals, pairing) == rep.doc["verdicts"]);
}

TEST_CASE("emit_report twice produces byte-identical files") {
  ExperimentPlan plan = small_sis_plan();
  ReportDocument rep = check_theorem(plan);
  const fs::path a = "rep_out_a", b = "rep_out_b";
  emit_report(rep, a.string());
  emit_report(rep, b.string());
  for (const char* f : {"report.json", "residuals.csv", "pairing.csv", "residuals.svg",
                        "cloud_N100.csv", "cloud_N400.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("identical plans reproduce identical reports") {
  ExperimentPlan plan = small_sis_plan();
  ReportDocument r1 = check_theorem(plan);
  ReportDocument r2 = check_theorem(plan);
  CHECK(r1.doc == r2.doc);
  CHECK(r1.tables[0].to_csv() == r2.tables[0].to_csv());
}

TEST_CASE("check_corollary: sis applicable, distance equals recomputation from the cloud") {
  ExperimentPlan plan = small_sis_plan();
  plan.detect_transient = 100;
  plan.detect_window = 20;
  ReportDocument rep = check_corollary(plan);
  CHECK(rep.doc["verdicts"]["applicable"].get<bool>());
  Vec y_star = rep.doc["y_star"].get<Vec>();
  CHECK(std::abs(y_star[0] - oracle::kSisFixedPoint) <= 1e-8);

  const fs::path out = "rep_out_c";
  emit_report(rep, out.string());
  // cross-check: persisted cloud -> W1 to dirac(y*) equals the report value
  Domain dom = model_domain(plan.build_model());
  auto cloud = PointCloudMeasure::read_csv(dom, (out / "cloud_N400.csv").string());
  const double recomputed = w1(cloud, dirac(dom, y_star));
  Table distances = Table::from_csv("distances", slurp(out / "distances.csv"));
  CHECK(std::abs(recomputed - distances.num(1, 1)) <= 1e-12);
  fs::remove_all(out);
}

TEST_CASE("check_corollary: hopf is inapplicable (cycle, not a fixed point)") {
  ExperimentPlan plan;
  plan.zoo = {"hopf", {}};
  plan.N_list = {50, 100};
  plan.t_list = {1.0};
  plan.replicas = 4;
  plan.stationary.n_samples = 10;
  plan.stationary.burn_in = 1;
  plan.detect_transient = 100;
  plan.detect_window = 20;
  plan.seed = 3;
  ReportDocument rep = check_corollary(plan);
  CHECK(!rep.pass);
  CHECK(!rep.doc["verdicts"]["applicable"].get<bool>());
  CHECK(rep.summary.find("cycle") != std::string::npos);
}

TEST_CASE("check_corollary honors a supplied y_star") {
  ExperimentPlan plan = small_sis_plan();
  plan.y_star = Vec{oracle::kSisFixedPoint};
  ReportDocument rep = check_corollary(plan);
  CHECK(rep.doc["verdicts"]["applicable"].get<bool>());
  CHECK(rep.tables[0].rows.size() == 2);

  plan.y_star = Vec{0.3};  // not a fixed point
  CHECK_THROWS_AS(check_corollary(plan), ModelError);
}

TEST_CASE("check_support: sis mean distance equals the corollary metric") {
  ExperimentPlan plan = small_sis_plan();
  plan.detect_transient = 100;
  plan.detect_window = 20;
  ReportDocument rep = check_support(plan);
  CHECK(rep.doc["verdicts"]["applicable"].get<bool>());
  // the recurrent proxy for sis is the single fixed point, so the mean
  // support distance IS W1 to its dirac
  ExperimentPlan cplan = plan;
  ReportDocument crep = check_corollary(cplan);
  Vec y_star = crep.doc["y_star"].get<Vec>();
  // same streams -> same clouds -> identical numbers up to the proxy point
  const double support_val = rep.tables[0].num(1, 1);
  const double coroll_val = crep.tables[0].num(1, 1);
  CHECK(std::abs(support_val - coroll_val) <= 1e-6);
  CHECK(rep.tables.back().name == "recurrent_points");
  CHECK(std::abs(rep.tables.back().num(0, 0) - y_star[0]) <= 1e-8);

  // verdicts recompute from the persisted tables for both experiments
  Table sdist = Table::from_csv("distances", rep.tables[0].to_csv());
  CHECK(support_verdicts(plan, sdist) == rep.doc["verdicts"]);
  Table cdist = Table::from_csv("distances", crep.tables[0].to_csv());
  CHECK(corollary_verdicts(cplan, cdist) == crep.doc["verdicts"]);
}

TEST_CASE("emit_report with no tables writes report.json alone") {
  ReportDocument rep;
  rep.experiment = "empty";
  rep.doc["experiment"] = "empty";
  rep.pass = true;
  const fs::path out = "rep_out_empty";
  emit_report(rep, out.string());
  CHECK(fs::exists(out / "report.json"));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(out)) ++files;
  CHECK(files == 1);
  fs::remove_all(out);
}

TEST_CASE("check_corollary on sirs exercises the 3-D simplex path") {
  ExperimentPlan plan;
  plan.zoo = {"sirs", {}};
  plan.N_list = {100, 400};
  plan.t_list = {1.0};
  plan.replicas = 4;
  plan.stationary.burn_in = 40;
  plan.stationary.n_samples = 150;
  plan.boot_resamples = 40;
  plan.detect_transient = 100;
  plan.detect_window = 20;
  plan.seed = 8;
  plan.tolerance = 0.2;
  ReportDocument rep = check_corollary(plan);
  CHECK(rep.doc["verdicts"]["applicable"].get<bool>());
  Vec y_star = rep.doc["y_star"].get<Vec>();
  REQUIRE(y_star.size() == 3);
  // endemic equilibrium of sirs(3, 1, 0.5, 0.01); cross-checked by Newton
  FlowMap fm = FlowMap::from(plan.build_model());
  auto fp = find_fixed_point(fm, fm.domain().centroid());
  CHECK(dist2(y_star, fp.point) <= 1e-8);
  double s = 0.0;
  for (double v : y_star) s += v;
  CHECK(std::abs(s - 1.0) <= 1e-9);
}

TEST_CASE("check_hypothesis1 on a small plan: fields and targets") {
  ExperimentPlan plan;
  plan.zoo = {"logistic", {{"r", 2.5}, {"eps", 1e-3}}};
  plan.N_list = {50, 200};
  plan.t_list = {1.0, 3.0};
  plan.replicas = 40;
  plan.y0 = {0.8, 0.2};
  plan.seed = 13;
  ReportDocument rep = check_hypothesis1(plan);
  CHECK(rep.tables[0].name == "errors");
  CHECK(rep.tables[0].rows.size() == 4);
  CHECK(rep.tables[1].name == "variances");
  CHECK(rep.doc["trends"].contains("slope"));
  // the t=3 target for x1 is g^3(0.2) = 0.6
  for (const auto& cell : rep.doc["cells"]) {
    if (cell["t"].get<double>() == 3.0) {
      CHECK(cell["estimates"]["x1"]["target"].get<double>() ==
            doctest::Approx(0.6).epsilon(1e-9));
    }
  }
  // verdict recompute from persisted tables
  Table errors = Table::from_csv("errors", rep.tables[0].to_csv());
  Table variances = Table::from_csv("variances", rep.tables[1].to_csv());
  CHECK(hypothesis1_verdicts(plan, errors, variances) == rep.doc["verdicts"]);
}

TEST_CASE("sha256 matches a known vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("svg charts are self-contained") {
  ChartSpec spec{"x.svg", "title", "N", "err", {{"t=1", {100, 1000}, {0.1, 0.01}}}};
  const std::string svg = svg_loglog_chart(spec);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("http://www.w3.org/2000/svg") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);  // no external references
  CHECK(svg.find("polyline") != std::string::npos);
}
