#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mflab/simulate.hpp"

namespace mflab {

/// A fully resolved experiment configuration. Everything that influences the
/// numbers lives here, so reports are reproducible from (plan, seed) alone.
struct ExperimentPlan {
  // model source: inline model JSON wins over the zoo spec when nonempty
  ZooSpec zoo{"sis", {}};
  std::string model_json;

  std::vector<long long> N_list{100, 1000, 10000};
  std::vector<double> t_list{1.0};
  int replicas = 200;
  Vec y0;  // hypothesis1 start; empty = domain centroid

  StationaryOptions stationary;
  FlowConfig flow_cfg;
  W1Options w1;
  std::uint64_t seed = 0;

  double tolerance = 0.02;   // terminal threshold at max(N_list)
  double slope_lo = -0.7, slope_hi = -0.3;
  int boot_resamples = 200;
  int boot_resample_n = 128;  // transport resolution for bootstrap CIs
  int error_batches = 20;     // replica batches for the error statistic
  int threads = 1;

  double detect_transient = 200.0;
  double detect_window = 50.0;
  std::optional<Vec> y_star;  // corollary: externally supplied fixed point

  Model build_model() const;
  void validate() const;
  nlohmann::json to_json() const;
};

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  static Table from_csv(const std::string& name, const std::string& text);
  double num(std::size_t row, std::size_t col) const;
};

struct ChartSeries {
  std::string label;
  std::vector<double> xs, ys;
};

struct ChartSpec {
  std::string file;
  std::string title, xlabel, ylabel;
  std::vector<ChartSeries> series;  // rendered log-log
};

struct ReportDocument {
  std::string experiment;
  nlohmann::json doc;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, PointCloudMeasure>> clouds;
  std::vector<ChartSpec> charts;
  bool pass = false;
  std::string summary;
};

/// Fixed-time marginal convergence: means approach h(phi_t(y0)) with a
/// log-log error slope in [slope_lo, slope_hi] and variances shrinking in N.
ReportDocument check_hypothesis1(const ExperimentPlan& plan);

/// The central experiment: invariance residuals of the stationary estimates
/// are non-increasing in N (bootstrap CI) and small at max(N_list); the
/// defining stationary pairing is spot-checked by restart-and-compare.
ReportDocument check_theorem(const ExperimentPlan& plan);

/// Unique-limit-point case: W1 to the Dirac at the common fixed point
/// decreases in N; inapplicable when spread starts disagree on the limit set.
ReportDocument check_corollary(const ExperimentPlan& plan);

/// Support of the stationary estimates approaches the detected recurrent-set
/// proxy (cycle samples plus fixed points, unstable ones included).
ReportDocument check_support(const ExperimentPlan& plan);

/// Writes report.json, one CSV per table (and per persisted cloud), and one
/// SVG per chart. Output bytes are a pure function of the document.
void emit_report(const ReportDocument& report, const std::string& out_dir);

/// Pass/fail logic recomputable from the persisted tables alone.
nlohmann::json hypothesis1_verdicts(const ExperimentPlan& plan, const Table& errors,
                                    const Table& variances);
nlohmann::json theorem_verdicts(const ExperimentPlan& plan, const Table& residuals,
                                const Table& pairing);
nlohmann::json corollary_verdicts(const ExperimentPlan& plan, const Table& distances);
nlohmann::json support_verdicts(const ExperimentPlan& plan, const Table& distances);

/// Deterministic well-spread interior starts (grid fractions over the box,
/// stick-breaking over the simplex).
std::vector<Vec> spread_starts(const Domain& domain, int count);

std::string sha256_hex(const std::string& data);
std::string svg_loglog_chart(const ChartSpec& spec);

}  // namespace mflab
