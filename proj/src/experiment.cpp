#include "mflab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace mflab {

using nlohmann::json;

namespace {

// experiment codes for stream derivation (see rng.hpp for the mixing rule);
// stationary chains are keyed by (seed, N) only, so every experiment sees the
// same stationary clouds for the same plan and the cross-experiment
// consistency checks compare like with like
constexpr std::uint64_t kHyp1 = 0x41, kTheorem = 0x42, kCorollary = 0x43, kSupport = 0x44;
constexpr std::uint64_t kStationaryTag = 0x57;
constexpr std::uint64_t kW1Tag = 0xA, kBootTag = 0xB, kPairTag = 0x50;

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
  int points = 0;
};

SlopeFit fit_loglog_slope(const std::vector<double>& ns, const std::vector<double>& es) {
  SlopeFit fit;
  const std::size_t m = ns.size();
  fit.points = static_cast<int>(m);
  if (m < 2) return fit;
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = std::log10(ns[i]);
    ys[i] = std::log10(std::max(es[i], 1e-300));
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += sq(xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  if (m > 2) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      ss_res += sq(ys[i] - ybar - fit.slope * (xs[i] - xbar));
    fit.se = std::sqrt(ss_res / static_cast<double>(m - 2) / sxx);
  }
  return fit;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += sq(x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string cloud_file_name(long long N) { return "cloud_N" + std::to_string(N) + ".csv"; }

}  // namespace

// ---------------------------------------------------------------------------
// plan

Model ExperimentPlan::build_model() const {
  if (!model_json.empty()) return model_from_json_text(model_json);
  return make_zoo_model(zoo);
}

void ExperimentPlan::validate() const {
  if (N_list.size() < 2) throw ModelError("plan: N_list needs at least two entries");
  for (std::size_t i = 0; i + 1 < N_list.size(); ++i)
    if (N_list[i] >= N_list[i + 1]) throw ModelError("plan: N_list must be strictly ascending");
  for (long long n : N_list)
    if (n < 1) throw ModelError("plan: N must be positive");
  if (t_list.empty()) throw ModelError("plan: t_list must be nonempty");
  for (double t : t_list)
    if (t < 0.0) throw ModelError("plan: t must be >= 0");
  if (replicas < 2) throw ModelError("plan: replicas must be >= 2");
  if (stationary.n_samples < 2) throw ModelError("plan: n_samples must be >= 2");
  if (stationary.spacing <= 0.0 || stationary.burn_in < 0.0)
    throw ModelError("plan: bad stationary parameters");
  if (flow_cfg.dt <= 0.0) throw ModelError("plan: dt must be positive");
  if (w1.resample_n < 1 || w1.resample_n > kW1ResampleCap)
    throw ModelError("plan: resample_n out of range");
  if (boot_resamples < 2 || boot_resample_n < 1 || error_batches < 1 || threads < 1)
    throw ModelError("plan: bad auxiliary parameters");
  Model model = build_model();  // validates model construction
  if (std::holds_alternative<DtModel>(model)) {
    for (double t : t_list)
      if (std::abs(t - std::round(t)) > 1e-9)
        throw ModelError("plan: discrete models require integer t values");
  }
  if (!y0.empty() && !model_domain(model).contains(y0, 1e-9))
    throw ModelError("plan: y0 outside the model domain");
}

json ExperimentPlan::to_json() const {
  json j;
  Model model = build_model();
  j["model"] = json::parse(model_to_json_text(model));
  j["N_list"] = N_list;
  j["t_list"] = t_list;
  j["replicas"] = replicas;
  j["y0"] = y0.empty() ? model_domain(model).centroid() : y0;
  j["stationary"] = {{"burn_in", stationary.burn_in},
                     {"n_samples", stationary.n_samples},
                     {"spacing", stationary.spacing},
                     {"flag_threshold", stationary.flag_threshold}};
  j["flow"] = {{"dt", flow_cfg.dt}, {"projection_tol", flow_cfg.projection_tol}};
  j["w1"] = {{"resample_n", w1.resample_n}};
  j["seed"] = seed;
  j["tolerance"] = tolerance;
  j["slope_window"] = {slope_lo, slope_hi};
  j["boot_resamples"] = boot_resamples;
  j["boot_resample_n"] = boot_resample_n;
  j["error_batches"] = error_batches;
  j["detect"] = {{"transient", detect_transient}, {"window", detect_window}};
  if (y_star) j["y_star"] = *y_star;
  return j;
}

// ---------------------------------------------------------------------------
// tables

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

Table Table::from_csv(const std::string& name, const std::string& text) {
  Table t;
  t.name = name;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

double Table::num(std::size_t row, std::size_t col) const { return std::stod(rows[row][col]); }

// ---------------------------------------------------------------------------
// spread starts

std::vector<Vec> spread_starts(const Domain& domain, int count) {
  if (count < 1) throw ModelError("spread_starts: count must be positive");
  const int d = domain.dim();
  const int axes = domain.kind() == DomainKind::box ? d : std::max(1, d - 1);
  int per_axis = 1;
  while (std::pow(per_axis, axes) < static_cast<double>(count)) ++per_axis;
  long long total = 1;
  for (int a = 0; a < axes; ++a) total *= per_axis;

  auto fraction = [&](long long idx, int axis) {
    long long rem = idx;
    for (int a = 0; a < axis; ++a) rem /= per_axis;
    return static_cast<double>(rem % per_axis + 1) / static_cast<double>(per_axis + 1);
  };

  std::vector<Vec> starts;
  for (int c = 0; c < count; ++c) {
    const long long idx = total <= count ? c : (static_cast<long long>(c) * total) / count;
    Vec y(static_cast<std::size_t>(d));
    if (domain.kind() == DomainKind::box) {
      for (int a = 0; a < d; ++a) {
        const double f = fraction(idx, a);
        y[static_cast<std::size_t>(a)] =
            domain.lo()[static_cast<std::size_t>(a)] +
            f * (domain.hi()[static_cast<std::size_t>(a)] - domain.lo()[static_cast<std::size_t>(a)]);
      }
    } else if (d == 1) {
      y[0] = 1.0;
    } else {
      // stick-breaking: interior for every fraction tuple
      double rest = 1.0;
      for (int a = 0; a < d - 1; ++a) {
        const double f = fraction(idx, a);
        y[static_cast<std::size_t>(a)] = f * rest;
        rest -= y[static_cast<std::size_t>(a)];
      }
      y[static_cast<std::size_t>(d - 1)] = rest;
    }
    starts.push_back(std::move(y));
  }
  return starts;
}

// ---------------------------------------------------------------------------
// verdict helpers

namespace {

double variance_slack(int replicas) { return 3.0 * std::sqrt(2.0 / std::max(1, replicas - 1)); }

struct MonotoneCheck {
  bool ok = true;
  std::string detail;
};

// non-increasing within z * combined bootstrap SE
MonotoneCheck check_monotone(const std::vector<double>& values, const std::vector<double>& ses,
                             double z) {
  MonotoneCheck mc;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double slack = z * std::sqrt(sq(ses[i]) + sq(ses[i + 1]));
    if (values[i + 1] > values[i] + slack) {
      mc.ok = false;
      mc.detail += "step " + std::to_string(i) + ": " + fmt_short(values[i + 1]) + " > " +
                   fmt_short(values[i]) + " + " + fmt_short(slack) + "; ";
    }
  }
  return mc;
}

}  // namespace

json hypothesis1_verdicts(const ExperimentPlan& plan, const Table& errors,
                          const Table& variances) {
  std::vector<double> ns, es;
  for (std::size_t r = 0; r < errors.rows.size(); ++r) {
    ns.push_back(errors.num(r, 0));
    es.push_back(errors.num(r, 2));
  }
  SlopeFit fit = fit_loglog_slope(ns, es);
  const bool slope_ok = fit.slope >= plan.slope_lo && fit.slope <= plan.slope_hi;

  // variances strictly decreasing in N for every (t, h), within estimator
  // noise: v_next <= v_prev * (1 + 3*sqrt(2/(R-1)))
  const double slack = variance_slack(plan.replicas);
  bool var_ok = true;
  std::string var_detail;
  // rows: N, t, h, variance, ci_half ordered by (N major)
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> series;
  for (std::size_t r = 0; r < variances.rows.size(); ++r) {
    series[{variances.rows[r][1], variances.rows[r][2]}].push_back(
        {variances.num(r, 0), variances.num(r, 3)});
  }
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double prev = pts[i].second, next = pts[i + 1].second;
      if (next > prev * (1.0 + slack) + 1e-30) {
        var_ok = false;
        var_detail += "h=" + key.second + " t=" + key.first + " N=" + fmt_short(pts[i + 1].first) +
                      ": " + fmt_short(next) + " > " + fmt_short(prev) + "*(1+" + fmt_short(slack) +
                      "); ";
      }
    }
  }

  json v;
  v["slope"] = fit.slope;
  v["slope_ci"] = 1.96 * fit.se;
  v["slope_window"] = {plan.slope_lo, plan.slope_hi};
  v["slope_in_window"] = slope_ok;
  v["variances_decreasing"] = var_ok;
  if (!var_detail.empty()) v["variance_violations"] = var_detail;
  v["pass"] = slope_ok && var_ok;
  return v;
}

json theorem_verdicts(const ExperimentPlan& plan, const Table& residuals, const Table& pairing) {
  // rows: N, t, residual, boot_se, gap
  std::map<std::string, std::vector<std::tuple<double, double, double>>> per_t;
  for (std::size_t r = 0; r < residuals.rows.size(); ++r)
    per_t[residuals.rows[r][1]].push_back(
        {residuals.num(r, 0), residuals.num(r, 2), residuals.num(r, 3)});

  bool monotone_ok = true, terminal_ok = true;
  std::string detail;
  for (auto& [t, rows] : per_t) {
    std::sort(rows.begin(), rows.end());
    std::vector<double> vals, ses;
    for (auto& [n, rho, se] : rows) {
      vals.push_back(rho);
      ses.push_back(se);
    }
    MonotoneCheck mc = check_monotone(vals, ses, 1.96);
    if (!mc.ok) {
      monotone_ok = false;
      detail += "t=" + t + ": " + mc.detail;
    }
    if (vals.back() > plan.tolerance) {
      terminal_ok = false;
      detail += "t=" + t + ": terminal residual " + fmt_short(vals.back()) + " > " +
                fmt_short(plan.tolerance) + "; ";
    }
  }

  bool pairing_ok = true;
  for (std::size_t r = 0; r < pairing.rows.size(); ++r) {
    // rows: h, before, after, diff, ci3
    if (std::abs(pairing.num(r, 3)) > pairing.num(r, 4)) pairing_ok = false;
  }

  json v;
  v["residual_non_increasing"] = monotone_ok;
  v["terminal_below_tolerance"] = terminal_ok;
  v["tolerance"] = plan.tolerance;
  v["pairing_within_ci"] = pairing_ok;
  if (!detail.empty()) v["detail"] = detail;
  v["pass"] = monotone_ok && terminal_ok && pairing_ok;
  return v;
}

namespace {

json distance_verdicts(const ExperimentPlan& plan, const Table& distances, const char* metric) {
  std::vector<double> vals, ses;
  for (std::size_t r = 0; r < distances.rows.size(); ++r) {
    vals.push_back(distances.num(r, 1));
    ses.push_back(distances.num(r, distances.header.size() - 1));
  }
  MonotoneCheck mc = check_monotone(vals, ses, 1.96);
  const bool terminal = !vals.empty() && vals.back() <= plan.tolerance;
  json v;
  v[std::string(metric) + "_decreasing"] = mc.ok;
  v["terminal_below_tolerance"] = terminal;
  v["tolerance"] = plan.tolerance;
  if (!mc.detail.empty()) v["detail"] = mc.detail;
  v["applicable"] = true;
  v["pass"] = mc.ok && terminal;
  return v;
}

}  // namespace

json corollary_verdicts(const ExperimentPlan& plan, const Table& distances) {
  return distance_verdicts(plan, distances, "distance");
}

json support_verdicts(const ExperimentPlan& plan, const Table& distances) {
  return distance_verdicts(plan, distances, "mean_distance");
}

// ---------------------------------------------------------------------------
// shared experiment plumbing

namespace {

struct StationaryCells {
  std::vector<StationaryEstimate> estimates;  // one per N
};

StationaryCells run_stationary_cells(const ExperimentPlan& plan, const Model& model) {
  StationaryCells cells;
  cells.estimates.resize(plan.N_list.size(),
                         StationaryEstimate{dirac(model_domain(model), model_domain(model).centroid()),
                                            0, false, 0, false, 0, 0});
  parallel_for(plan.N_list.size(), plan.threads, [&](std::size_t i) {
    StationaryOptions opts = plan.stationary;
    opts.w1 = plan.w1;
    RngSpec spec{mix_tags(plan.seed, {kStationaryTag, i})};
    cells.estimates[i] = stationary_sample(model, plan.N_list[i], opts, spec);
  });
  return cells;
}

json stationary_diag_json(const ExperimentPlan& plan, const StationaryCells& cells) {
  json diags = json::array();
  for (std::size_t i = 0; i < cells.estimates.size(); ++i) {
    const auto& est = cells.estimates[i];
    diags.push_back({{"N", plan.N_list[i]},
                     {"split_half_w1", est.split_half_w1},
                     {"flagged", est.flagged},
                     {"truncations", est.truncations},
                     {"frozen", est.frozen}});
  }
  return diags;
}

/// mean of per-atom values under the cloud weights
double weighted_mean(const PointCloudMeasure& cloud, const std::vector<double>& per_atom) {
  double s = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) s += cloud.weight(i) * per_atom[i];
  return s;
}

/// plain bootstrap SE of the weighted mean of per-atom values (equal weights)
double bootstrap_se_mean(const std::vector<double>& per_atom, int resamples, std::uint64_t seed) {
  const std::size_t n = per_atom.size();
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  RngSpec spec{seed};
  for (int b = 0; b < resamples; ++b) {
    RngStream s = spec.stream(static_cast<std::uint64_t>(b));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto idx = static_cast<std::size_t>(s.uniform() * static_cast<double>(n));
      if (idx >= n) idx = n - 1;
      acc += per_atom[idx];
    }
    stats[static_cast<std::size_t>(b)] = acc / static_cast<double>(n);
  }
  return sd_of(stats);
}

json provenance_json(const ExperimentPlan& plan) {
  json p;
  p["seed"] = plan.seed;
  p["config_sha256"] = sha256_hex(plan.to_json().dump());
  p["version"] = "0.1.0";
  return p;
}

ReportDocument make_base_report(const std::string& experiment, const ExperimentPlan& plan) {
  ReportDocument rep;
  rep.experiment = experiment;
  rep.doc["experiment"] = experiment;
  rep.doc["plan"] = plan.to_json();
  rep.doc["model"] = rep.doc["plan"]["model"];
  rep.doc["provenance"] = provenance_json(plan);
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// check_hypothesis1

ReportDocument check_hypothesis1(const ExperimentPlan& plan) {
  plan.validate();
  Model model = plan.build_model();
  const Domain& dom = model_domain(model);
  FlowMap limit = FlowMap::from(model);
  const Vec y0 = plan.y0.empty() ? dom.centroid() : plan.y0;
  const auto h_set = make_test_function_set(dom);

  ReportDocument rep = make_base_report("hypothesis1", plan);

  Table errors{"errors", {"N", "t", "error"}, {}};
  Table variances{"variances", {"N", "t", "h", "variance", "ci_half"}, {}};
  json cells = json::array();

  // targets h(phi_t(y0)) from the unrounded y0 (the grid start converges to it)
  std::map<double, Vec> targets;
  for (double t : plan.t_list) {
    Vec ft = flow(limit, y0, t, plan.flow_cfg);
    Vec tv;
    for (const auto& h : h_set) tv.push_back(h.fn(ft));
    targets[t] = std::move(tv);
  }

  const int batches = std::min(plan.error_batches, plan.replicas / 2);
  for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
    const long long N = plan.N_list[iN];
    for (std::size_t it = 0; it < plan.t_list.size(); ++it) {
      const double t = plan.t_list[it];
      RngSpec cell_rng{mix_tags(plan.seed, {kHyp1, iN, it})};
      MarginalEstimate est =
          marginal_moments(model, N, y0, t, h_set, plan.replicas, cell_rng, plan.threads);

      // error statistic: batch means against the deterministic target,
      // averaged over batches and test functions (keeps the N^{-1/2}
      // scaling while concentrating the fitted slope)
      const int B = std::max(1, batches);
      const int bs = plan.replicas / B;
      double err_sum = 0.0;
      json est_json;
      for (std::size_t h = 0; h < h_set.size(); ++h) {
        double e_h = 0.0;
        for (int b = 0; b < B; ++b) {
          double m = 0.0;
          for (int r = 0; r < bs; ++r)
            m += est.values[h][static_cast<std::size_t>(b) * static_cast<std::size_t>(bs) + static_cast<std::size_t>(r)];
          m /= static_cast<double>(bs);
          e_h += std::abs(m - targets[t][h]);
        }
        e_h /= static_cast<double>(B);
        err_sum += e_h;
        est_json[est.names[h]] = {{"mean", est.mean[h]},
                                  {"variance", est.variance[h]},
                                  {"ci_half", est.ci_half[h]},
                                  {"target", targets[t][h]},
                                  {"batched_error", e_h}};
        variances.rows.push_back({std::to_string(N), fmt_full(t), est.names[h],
                                  fmt_full(est.variance[h]), fmt_full(est.ci_half[h])});
      }
      const double err = err_sum / static_cast<double>(h_set.size());
      errors.rows.push_back({std::to_string(N), fmt_full(t), fmt_full(err)});
      cells.push_back({{"N", N}, {"t", t}, {"error", err}, {"estimates", est_json}});
    }
  }

  json verdicts = hypothesis1_verdicts(plan, errors, variances);
  rep.doc["cells"] = cells;
  rep.doc["trends"] = {{"slope", verdicts["slope"]}, {"ci", verdicts["slope_ci"]}};
  rep.doc["verdicts"] = verdicts;
  rep.pass = verdicts["pass"].get<bool>();
  rep.summary = std::string(rep.pass ? "PASS" : "FAIL") +
                " hypothesis1: slope=" + fmt_short(verdicts["slope"].get<double>());

  ChartSpec chart{"errors.svg", "marginal error vs N", "N", "error", {}};
  for (std::size_t it = 0; it < plan.t_list.size(); ++it) {
    ChartSeries s;
    s.label = "t=" + fmt_short(plan.t_list[it]);
    for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
      const std::size_t row = iN * plan.t_list.size() + it;
      s.xs.push_back(static_cast<double>(plan.N_list[iN]));
      s.ys.push_back(errors.num(row, 2));
    }
    chart.series.push_back(std::move(s));
  }
  rep.charts.push_back(std::move(chart));
  rep.tables = {std::move(errors), std::move(variances)};
  return rep;
}

// ---------------------------------------------------------------------------
// check_theorem

ReportDocument check_theorem(const ExperimentPlan& plan) {
  plan.validate();
  Model model = plan.build_model();
  const Domain& dom = model_domain(model);
  FlowMap limit = FlowMap::from(model);
  const auto h_set = make_test_function_set(dom);

  ReportDocument rep = make_base_report("theorem", plan);
  StationaryCells cells = run_stationary_cells(plan, model);

  Table residuals{"residuals", {"N", "t", "residual", "boot_se", "gap"}, {}};
  json cell_json = json::array();

  for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
    const long long N = plan.N_list[iN];
    const PointCloudMeasure& cloud = cells.estimates[iN].cloud;
    rep.clouds.emplace_back(cloud_file_name(N), cloud);

    for (std::size_t it = 0; it < plan.t_list.size(); ++it) {
      const double t = plan.t_list[it];
      PointCloudMeasure pushed = pushforward(cloud, limit, t, plan.flow_cfg);

      W1Options w1opts = plan.w1;
      w1opts.seed = mix_tags(plan.seed, {kTheorem, iN, it, kW1Tag});
      const double rho = t == 0.0 ? 0.0 : w1(pushed, cloud, w1opts);
      const double gap = test_function_gap(cloud, limit, t, h_set, plan.flow_cfg);

      // bootstrap over atoms (transport at reduced resolution boot_resample_n)
      const std::size_t n = cloud.size();
      std::vector<double> boot(static_cast<std::size_t>(plan.boot_resamples));
      RngSpec boot_rng{mix_tags(plan.seed, {kTheorem, iN, it, kBootTag})};
      for (int b = 0; b < plan.boot_resamples; ++b) {
        RngStream s = boot_rng.stream(static_cast<std::uint64_t>(b));
        std::vector<Vec> orig_pts, push_pts;
        orig_pts.reserve(n);
        push_pts.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
          auto idx = static_cast<std::size_t>(s.uniform() * static_cast<double>(n));
          if (idx >= n) idx = n - 1;
          orig_pts.emplace_back(cloud.point(idx).begin(), cloud.point(idx).end());
          push_pts.emplace_back(pushed.point(idx).begin(), pushed.point(idx).end());
        }
        W1Options bopts;
        bopts.resample_n = plan.boot_resample_n;
        bopts.seed = mix_tags(plan.seed, {kTheorem, iN, it, kBootTag, static_cast<std::uint64_t>(b)});
        boot[static_cast<std::size_t>(b)] =
            w1(PointCloudMeasure::equal_weight(dom, std::move(push_pts)),
               PointCloudMeasure::equal_weight(dom, std::move(orig_pts)), bopts);
      }
      const double se = sd_of(boot);

      residuals.rows.push_back(
          {std::to_string(N), fmt_full(t), fmt_full(rho), fmt_full(se), fmt_full(gap)});
      cell_json.push_back({{"N", N}, {"t", t}, {"residual", rho}, {"ci", 1.96 * se}, {"gap", gap}});
    }
  }

  // Stationary pairing spot check at max(N): restart the chain from a
  // spread of stationary atoms, advance by the first t, compare h-averages
  // (an invariant law leaves them unchanged in expectation).
  Table pairing{"pairing", {"h", "before", "after", "diff", "ci3"}, {}};
  {
    const std::size_t iN = plan.N_list.size() - 1;
    const long long N = plan.N_list[iN];
    const PointCloudMeasure& cloud = cells.estimates[iN].cloud;
    const double t = plan.t_list.front();
    const std::size_t J = std::min<std::size_t>(50, cloud.size());
    RngSpec pair_rng{mix_tags(plan.seed, {kTheorem, kPairTag})};

    // draw the restart atoms from the cloud with the seeded stream; a
    // strided pick would alias with periodic phase structure (the 2-cycle
    // chains alternate clusters every step)
    std::vector<Vec> starts, ends;
    RngStream pick = pair_rng.stream(0xA70115);
    for (std::size_t j = 0; j < J; ++j) {
      auto idx = static_cast<std::size_t>(pick.uniform() * static_cast<double>(cloud.size()));
      if (idx >= cloud.size()) idx = cloud.size() - 1;
      auto p = cloud.point(idx);
      starts.emplace_back(p.begin(), p.end());
    }
    ends.resize(J);
    long long dt_steps = 0;
    if (std::holds_alternative<DtModel>(model)) dt_steps = std::llround(t);
    parallel_for(J, plan.threads, [&](std::size_t j) {
      RngStream s = pair_rng.stream(j);
      GridPoint g = round_to_grid(dom, N, starts[j]);
      if (const auto* ct = std::get_if<CtModel>(&model)) {
        ends[j] = simulate_ct(*ct, N, g, t, s).state.embed();
      } else {
        ends[j] = simulate_dt(std::get<DtModel>(model), N, g, dt_steps, s).state.embed();
      }
    });
    for (const auto& h : h_set) {
      std::vector<double> diffs(J);
      double before = 0.0, after = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double hb = h.fn(starts[j]), ha = h.fn(ends[j]);
        before += hb;
        after += ha;
        diffs[j] = ha - hb;
      }
      before /= static_cast<double>(J);
      after /= static_cast<double>(J);
      const double ci3 = 3.0 * sd_of(diffs) / std::sqrt(static_cast<double>(J)) + 1e-12;
      pairing.rows.push_back({h.name, fmt_full(before), fmt_full(after),
                              fmt_full(after - before), fmt_full(ci3)});
    }
  }

  json verdicts = theorem_verdicts(plan, residuals, pairing);
  rep.doc["cells"] = cell_json;
  rep.doc["stationary_diagnostics"] = stationary_diag_json(plan, cells);
  rep.doc["trends"] = json::object();
  rep.doc["verdicts"] = verdicts;
  rep.pass = verdicts["pass"].get<bool>();
  rep.summary = std::string(rep.pass ? "PASS" : "FAIL") + " theorem";

  ChartSpec chart{"residuals.svg", "invariance residual vs N", "N", "residual", {}};
  for (std::size_t it = 0; it < plan.t_list.size(); ++it) {
    ChartSeries s;
    s.label = "t=" + fmt_short(plan.t_list[it]);
    for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
      const std::size_t row = iN * plan.t_list.size() + it;
      s.xs.push_back(static_cast<double>(plan.N_list[iN]));
      s.ys.push_back(residuals.num(row, 2));
    }
    chart.series.push_back(std::move(s));
  }
  rep.charts.push_back(std::move(chart));
  rep.tables = {std::move(residuals), std::move(pairing)};
  return rep;
}

// ---------------------------------------------------------------------------
// check_corollary

namespace {

json limit_set_json(const LimitSet& ls) {
  json j;
  switch (ls.kind) {
    case LimitSet::Kind::fixed_point:
      j["kind"] = "fixed_point";
      j["point"] = ls.fixed_point;
      j["residual"] = ls.residual;
      break;
    case LimitSet::Kind::cycle:
      j["kind"] = "cycle";
      j["period"] = ls.period;
      j["closure_error"] = ls.closure_error;
      j["n_points"] = ls.cycle_points.size();
      break;
    default:
      j["kind"] = "unknown";
      j["closure_error"] = ls.closure_error;
      break;
  }
  return j;
}

Table limit_set_table(const std::vector<LimitSet>& sets) {
  Table t{"limit_sets", {"kind", "period", "n_points", "residual_or_closure"}, {}};
  for (const LimitSet& ls : sets) {
    std::string kind = ls.kind == LimitSet::Kind::fixed_point
                           ? "fixed_point"
                           : (ls.kind == LimitSet::Kind::cycle ? "cycle" : "unknown");
    const double resid = ls.kind == LimitSet::Kind::fixed_point ? ls.residual : ls.closure_error;
    t.rows.push_back({kind, fmt_full(ls.period), std::to_string(ls.points().size()),
                      fmt_full(resid)});
  }
  return t;
}

}  // namespace

ReportDocument check_corollary(const ExperimentPlan& plan) {
  plan.validate();
  Model model = plan.build_model();
  const Domain& dom = model_domain(model);
  FlowMap limit = FlowMap::from(model);

  ReportDocument rep = make_base_report("corollary", plan);

  // precondition: >= 5 spread starts agree on one fixed point
  Vec y_star;
  std::vector<LimitSet> detected;
  if (plan.y_star) {
    y_star = *plan.y_star;
    Vec f = limit(y_star);
    if (limit.kind() == FlowMap::Kind::discrete)
      for (std::size_t i = 0; i < f.size(); ++i) f[i] -= y_star[i];
    if (norm2(f) > 1e-8)
      throw ModelError("check_corollary: supplied y_star is not a fixed point");
  } else {
    const auto starts = spread_starts(dom, 5);
    for (const Vec& s : starts)
      detected.push_back(detect_limit_set(limit, s, plan.detect_transient, plan.detect_window,
                                          plan.flow_cfg));
    bool agree = true;
    std::string reason;
    for (const LimitSet& ls : detected) {
      if (ls.kind != LimitSet::Kind::fixed_point) {
        agree = false;
        reason = ls.kind == LimitSet::Kind::cycle ? "limit set is a cycle"
                                                  : "limit set detection failed from a start";
      }
    }
    if (agree) {
      for (const LimitSet& ls : detected)
        if (dist2(ls.fixed_point, detected.front().fixed_point) > 1e-4) {
          agree = false;
          reason = "starts disagree on the fixed point";
        }
    }
    rep.doc["detected_limit_sets"] = json::array();
    for (const LimitSet& ls : detected) rep.doc["detected_limit_sets"].push_back(limit_set_json(ls));
    if (!agree) {
      json verdicts;
      verdicts["applicable"] = false;
      verdicts["reason"] = reason;
      verdicts["pass"] = false;
      rep.doc["cells"] = json::array();
      rep.doc["trends"] = json::object();
      rep.doc["verdicts"] = verdicts;
      rep.tables = {limit_set_table(detected)};
      rep.pass = false;
      rep.summary = "FAIL corollary: inapplicable: " + reason;
      return rep;
    }
    y_star = find_fixed_point(limit, detected.front().fixed_point).point;
  }
  rep.doc["y_star"] = y_star;

  StationaryCells cells = run_stationary_cells(plan, model);
  Table distances{"distances", {"N", "distance", "boot_se"}, {}};
  json cell_json = json::array();

  for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
    const long long N = plan.N_list[iN];
    const PointCloudMeasure& cloud = cells.estimates[iN].cloud;
    rep.clouds.emplace_back(cloud_file_name(N), cloud);

    std::vector<double> per_atom(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) per_atom[i] = dist2(cloud.point(i), y_star);
    const double dist = weighted_mean(cloud, per_atom);  // = W1(cloud, dirac(y*))
    const double se = bootstrap_se_mean(per_atom, plan.boot_resamples,
                                        mix_tags(plan.seed, {kCorollary, iN, kBootTag}));
    distances.rows.push_back({std::to_string(N), fmt_full(dist), fmt_full(se)});
    cell_json.push_back({{"N", N}, {"t", nullptr}, {"residual", dist}, {"ci", 1.96 * se}});
  }

  json verdicts = corollary_verdicts(plan, distances);
  rep.doc["cells"] = cell_json;
  rep.doc["stationary_diagnostics"] = stationary_diag_json(plan, cells);
  rep.doc["trends"] = json::object();
  rep.doc["verdicts"] = verdicts;
  rep.pass = verdicts["pass"].get<bool>();
  rep.summary = std::string(rep.pass ? "PASS" : "FAIL") + " corollary: final distance " +
                distances.rows.back()[1];

  ChartSpec chart{"distances.svg", "W1 to dirac(y*) vs N", "N", "W1", {}};
  ChartSeries s;
  s.label = "W1";
  for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
    s.xs.push_back(static_cast<double>(plan.N_list[iN]));
    s.ys.push_back(distances.num(iN, 1));
  }
  chart.series.push_back(std::move(s));
  rep.charts.push_back(std::move(chart));

  std::vector<Table> tables;
  tables.push_back(std::move(distances));
  if (!detected.empty()) tables.push_back(limit_set_table(detected));
  rep.tables = std::move(tables);
  return rep;
}

// ---------------------------------------------------------------------------
// check_support

ReportDocument check_support(const ExperimentPlan& plan) {
  plan.validate();
  Model model = plan.build_model();
  const Domain& dom = model_domain(model);
  FlowMap limit = FlowMap::from(model);

  ReportDocument rep = make_base_report("support", plan);

  const auto starts = spread_starts(dom, 9);
  RecurrentSetEstimate rse = recurrent_set_estimate(limit, starts, plan.detect_transient,
                                                    plan.detect_window, plan.flow_cfg);
  rep.doc["limit_sets"] = json::array();
  for (const LimitSet& ls : rse.sets) rep.doc["limit_sets"].push_back(limit_set_json(ls));
  rep.doc["unknown_starts"] = rse.unknown_count;

  if (rse.points.empty()) {
    json verdicts;
    verdicts["applicable"] = false;
    verdicts["reason"] = "no limit sets detected from any start";
    verdicts["pass"] = false;
    rep.doc["cells"] = json::array();
    rep.doc["trends"] = json::object();
    rep.doc["verdicts"] = verdicts;
    rep.tables = {limit_set_table(rse.sets)};
    rep.pass = false;
    rep.summary = "FAIL support: inapplicable: no limit sets detected";
    return rep;
  }

  // persist the recurrent-set proxy
  Table points{"recurrent_points", {}, {}};
  for (int j = 0; j < dom.dim(); ++j) points.header.push_back("x" + std::to_string(j));
  for (const Vec& p : rse.points) {
    std::vector<std::string> row;
    for (double v : p) row.push_back(fmt_full(v));
    points.rows.push_back(std::move(row));
  }

  StationaryCells cells = run_stationary_cells(plan, model);
  Table distances{"distances", {"N", "mean_dist", "max_dist", "boot_se"}, {}};
  json cell_json = json::array();

  for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
    const long long N = plan.N_list[iN];
    const PointCloudMeasure& cloud = cells.estimates[iN].cloud;
    rep.clouds.emplace_back(cloud_file_name(N), cloud);

    auto [mean_d, max_d] = support_distance(cloud, rse.points);
    std::vector<double> per_atom(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const Vec& q : rse.points) nearest = std::min(nearest, dist2(cloud.point(i), q));
      per_atom[i] = nearest;
    }
    const double se = bootstrap_se_mean(per_atom, plan.boot_resamples,
                                        mix_tags(plan.seed, {kSupport, iN, kBootTag}));
    distances.rows.push_back(
        {std::to_string(N), fmt_full(mean_d), fmt_full(max_d), fmt_full(se)});
    cell_json.push_back(
        {{"N", N}, {"t", nullptr}, {"residual", mean_d}, {"max", max_d}, {"ci", 1.96 * se}});
  }

  json verdicts = support_verdicts(plan, distances);
  rep.doc["cells"] = cell_json;
  rep.doc["stationary_diagnostics"] = stationary_diag_json(plan, cells);
  rep.doc["trends"] = json::object();
  rep.doc["verdicts"] = verdicts;
  rep.pass = verdicts["pass"].get<bool>();
  rep.summary = std::string(rep.pass ? "PASS" : "FAIL") + " support: final mean distance " +
                distances.rows.back()[1];

  ChartSpec chart{"distances.svg", "support distance vs N", "N", "mean distance", {}};
  ChartSeries s;
  s.label = "mean";
  for (std::size_t iN = 0; iN < plan.N_list.size(); ++iN) {
    s.xs.push_back(static_cast<double>(plan.N_list[iN]));
    s.ys.push_back(distances.num(iN, 1));
  }
  chart.series.push_back(std::move(s));
  rep.charts.push_back(std::move(chart));

  rep.tables = {std::move(distances), limit_set_table(rse.sets), std::move(points)};
  return rep;
}

}  // namespace mflab
