// mflab command line: model loading, single simulations, flow and limit-set
// queries, stationary estimation and the verification experiments.
//
// Exit codes: 0 success, 1 experiment verdict FAIL (or inapplicable),
// 2 usage error, 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mflab/experiment.hpp"

using namespace mflab;
using nlohmann::json;

namespace {

struct ModelArgs {
  std::string model;   // zoo name or path to a model JSON file
  std::string params;  // key=value,key=value
};

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  if (text.empty()) return out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--params", "expected key=value, got '" + item + "'");
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--params", "bad numeric value in '" + item + "'");
    }
  }
  return out;
}

bool looks_like_file(const std::string& model) {
  if (model.find(".json") != std::string::npos) return true;
  if (model.find('/') != std::string::npos) return true;
  return std::filesystem::exists(model);
}

Model resolve_model(const ModelArgs& args, std::string* json_text = nullptr) {
  const auto params = parse_params(args.params);
  if (looks_like_file(args.model)) {
    if (!params.empty())
      std::cerr << "warning: --params ignored, model JSON file wins on conflict\n";
    Model m = load_model_file(args.model);
    if (json_text) *json_text = model_to_json_text(m);
    return m;
  }
  ZooSpec spec{args.model, params};
  Model m = make_zoo_model(spec);
  if (json_text) *json_text = model_to_json_text(m);
  return m;
}

Vec parse_point(const std::string& text) {
  Vec out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<long long> parse_n_list(const std::string& text) {
  std::vector<long long> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoll(item));
  return out;
}

std::vector<double> parse_t_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t seed_flag) {
  if (seed_opt->count() > 0) return seed_flag;
  if (const char* env = std::getenv("MFLAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw CLI::ValidationError("MFLAB_SEED", "not a valid unsigned integer");
    }
  }
  return 0;
}

void print_point(const Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i) std::cout << ' ';
    std::cout << fmt_short(y[i]);
  }
  std::cout << '\n';
}

void echo_plan(const json& j) { std::cout << "plan: " << j.dump() << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field stationary-regime laboratory"};
  app.require_subcommand(1);

  ModelArgs margs;
  std::uint64_t seed_flag = 0;
  long long N = 1000;
  std::string y0_text, n_list_text = "100,1000,10000", t_list_text = "1";
  double t = 1.0, dt = 1e-3, burn_in = 200.0, spacing = 1.0, tol = -1.0;
  int n_samples = 1000, replicas = 200, resample_n = 512, threads = 1, val_samples = 1000;
  std::string out_dir, ystar_text;

  auto add_model_opts = [&](CLI::App* cmd) {
    cmd->add_option("--model", margs.model, "zoo name (sis|sirs|hopf|logistic) or model JSON path")
        ->required();
    cmd->add_option("--params", margs.params, "comma list of key=value model parameters");
  };

  auto* zoo_cmd = app.add_subcommand("zoo-list", "list built-in models and their parameters");

  auto* validate_cmd = app.add_subcommand("validate", "sample-audit a model's rate contracts");
  add_model_opts(validate_cmd);
  auto* val_seed = validate_cmd->add_option("--seed", seed_flag, "rng seed");
  validate_cmd->add_option("--samples", val_samples, "validation sample count")
      ->check(CLI::PositiveNumber);

  auto* sim_cmd = app.add_subcommand("simulate", "run one stochastic trajectory");
  add_model_opts(sim_cmd);
  sim_cmd->add_option("--N", N, "object count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--y0", y0_text, "initial point (comma separated)");
  sim_cmd->add_option("--t", t, "horizon (time units, or steps for dt models)");
  auto* sim_seed = sim_cmd->add_option("--seed", seed_flag, "rng seed");
  sim_cmd->add_option("--spacing", spacing, "sample spacing for --out trajectory CSV");
  sim_cmd->add_option("--out", out_dir, "directory for trajectory.csv");

  auto* flow_cmd = app.add_subcommand("flow", "evaluate the deterministic limit flow");
  add_model_opts(flow_cmd);
  flow_cmd->add_option("--y0", y0_text, "initial point")->required();
  flow_cmd->add_option("--t", t, "flow time")->required();
  flow_cmd->add_option("--dt", dt, "RK4 step size");
  flow_cmd->add_option("--spacing", spacing, "orbit sample spacing for --out");
  flow_cmd->add_option("--out", out_dir, "directory for orbit.csv");

  double transient = 200.0, window = 50.0;
  auto* limitset_cmd = app.add_subcommand("limitset", "detect the limit set of an orbit");
  add_model_opts(limitset_cmd);
  limitset_cmd->add_option("--y0", y0_text, "start point")->required();
  limitset_cmd->add_option("--transient", transient, "transient time/steps");
  limitset_cmd->add_option("--window", window, "observation window");
  limitset_cmd->add_option("--dt", dt, "RK4 step size");
  limitset_cmd->add_option("--out", out_dir, "directory for limitset.csv");

  auto* stat_cmd = app.add_subcommand("stationary", "long-run stationary sampling");
  add_model_opts(stat_cmd);
  stat_cmd->add_option("--N", N, "object count")->check(CLI::PositiveNumber);
  auto* stat_seed = stat_cmd->add_option("--seed", seed_flag, "rng seed");
  stat_cmd->add_option("--burn-in", burn_in, "burn-in time/steps");
  stat_cmd->add_option("--samples", n_samples, "number of recorded samples");
  stat_cmd->add_option("--spacing", spacing, "spacing between samples");
  stat_cmd->add_option("--resample-n", resample_n, "W1 resampling size");
  stat_cmd->add_option("--out", out_dir, "directory for cloud.csv + diagnostics.json");

  auto* verify_cmd = app.add_subcommand("verify", "run a verification experiment");
  verify_cmd->require_subcommand(1);
  CLI::Option* ver_seed = nullptr;
  std::vector<CLI::App*> experiments;
  for (const char* name : {"hypothesis1", "theorem", "corollary", "support"}) {
    auto* e = verify_cmd->add_subcommand(name);
    add_model_opts(e);
    e->add_option("--N", n_list_text, "ascending comma list of object counts");
    e->add_option("--t", t_list_text, "comma list of times");
    auto* s = e->add_option("--seed", seed_flag, "rng seed");
    if (!ver_seed) ver_seed = s;
    e->add_option("--replicas", replicas, "replicas for marginal estimates");
    e->add_option("--burn-in", burn_in, "stationary burn-in");
    e->add_option("--samples", n_samples, "stationary samples");
    e->add_option("--spacing", spacing, "stationary spacing");
    e->add_option("--dt", dt, "RK4 step size");
    e->add_option("--tol", tol, "terminal tolerance override");
    e->add_option("--resample-n", resample_n, "W1 resampling size");
    e->add_option("--threads", threads, "max parallel workers")->check(CLI::PositiveNumber);
    e->add_option("--y0", y0_text, "initial point for hypothesis1");
    e->add_option("--ystar", ystar_text, "known fixed point for corollary");
    e->add_option("--out", out_dir, "report output directory")->required();
    experiments.push_back(e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);  // --help exits 0
    app.exit(e);
    return 2;
  }

  try {
    if (zoo_cmd->parsed()) {
      for (const ZooEntry& e : zoo_catalog()) {
        std::cout << e.name << ": " << e.doc << '\n';
        for (const ZooParamDoc& p : e.params)
          std::cout << "    " << p.name << " (default " << fmt_short(p.def) << ", range ["
                    << fmt_short(p.lo) << ", " << fmt_short(p.hi) << "]): " << p.doc << '\n';
      }
      return 0;
    }

    if (validate_cmd->parsed()) {
      const std::uint64_t seed = resolve_seed(val_seed, seed_flag);
      Model model = resolve_model(margs);
      echo_plan({{"command", "validate"}, {"model", model_name(model)},
                 {"samples", val_samples}, {"seed", seed}});
      ValidationReport rep = validate_model(model, val_samples, seed);
      json j = {{"pass", rep.pass},
                {"samples", rep.samples},
                {"min_rate", rep.min_rate},
                {"max_row_dev", rep.max_row_dev},
                {"min_kernel", rep.min_kernel},
                {"mass_conservation", rep.mass_conservation},
                {"issues", rep.issues}};
      std::cout << j.dump(2) << '\n';
      return rep.pass ? 0 : 1;
    }

    if (sim_cmd->parsed()) {
      const std::uint64_t seed = resolve_seed(sim_seed, seed_flag);
      Model model = resolve_model(margs);
      const Domain& dom = model_domain(model);
      Vec y0 = y0_text.empty() ? dom.centroid() : parse_point(y0_text);
      echo_plan({{"command", "simulate"}, {"model", model_name(model)}, {"N", N},
                 {"y0", y0}, {"t", t}, {"seed", seed}, {"spacing", spacing}});
      GridPoint start = round_to_grid(dom, N, y0);
      RngSpec rng{seed};
      RngStream stream = rng.stream(0);

      std::vector<Vec> traj;
      std::vector<double> traj_t;
      GridPoint final_state = start;
      if (const auto* ct = std::get_if<CtModel>(&model)) {
        std::vector<double> times;
        if (!out_dir.empty())
          for (double tt = 0.0; tt <= t + 1e-12; tt += spacing) times.push_back(tt);
        CtRunResult res = simulate_ct(*ct, N, start, t, stream, times);
        final_state = res.state;
        std::cout << "events: " << res.events << "  truncations: " << res.truncations
                  << (res.frozen ? "  (frozen)" : "") << '\n';
        for (std::size_t i = 0; i < res.samples.size(); ++i) {
          traj.push_back(res.samples[i].embed());
          traj_t.push_back(times[i]);
        }
      } else {
        auto steps = static_cast<long long>(std::llround(t));
        std::vector<long long> marks;
        if (!out_dir.empty()) {
          auto stride = std::max<long long>(1, static_cast<long long>(std::llround(spacing)));
          for (long long s = 0; s <= steps; s += stride) marks.push_back(s);
        }
        DtRunResult res = simulate_dt(std::get<DtModel>(model), N, start, steps, stream, marks);
        final_state = res.state;
        std::cout << "steps: " << res.steps << '\n';
        for (std::size_t i = 0; i < res.samples.size(); ++i) {
          traj.push_back(res.samples[i].embed());
          traj_t.push_back(static_cast<double>(marks[i]));
        }
      }
      std::cout << "final: ";
      print_point(final_state.embed());
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(std::filesystem::path(out_dir) / "trajectory.csv");
        csv << "t";
        for (int i = 0; i < dom.dim(); ++i) csv << ",x" << i;
        csv << '\n';
        for (std::size_t i = 0; i < traj.size(); ++i) {
          csv << fmt_full(traj_t[i]);
          for (double v : traj[i]) csv << ',' << fmt_full(v);
          csv << '\n';
        }
      }
      return 0;
    }

    if (flow_cmd->parsed()) {
      Model model = resolve_model(margs);
      FlowMap limit = FlowMap::from(model);
      Vec y0 = parse_point(y0_text);
      FlowConfig cfg;
      cfg.dt = dt;
      echo_plan({{"command", "flow"}, {"model", model_name(model)}, {"y0", y0}, {"t", t},
                 {"dt", dt}});
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(std::filesystem::path(out_dir) / "orbit.csv");
        const Domain& dom = model_domain(model);
        csv << "t";
        for (int i = 0; i < dom.dim(); ++i) csv << ",x" << i;
        csv << '\n';
        Vec y = y0;
        double now = 0.0;
        for (;;) {
          csv << fmt_full(now);
          for (double v : y) csv << ',' << fmt_full(v);
          csv << '\n';
          if (now >= t) break;
          const double step = std::min(spacing, t - now);
          y = flow(limit, y, step, cfg);
          now += step;
        }
      }
      print_point(flow(limit, y0, t, cfg));
      return 0;
    }

    if (limitset_cmd->parsed()) {
      Model model = resolve_model(margs);
      FlowMap limit = FlowMap::from(model);
      Vec y0 = parse_point(y0_text);
      FlowConfig cfg;
      cfg.dt = dt;
      echo_plan({{"command", "limitset"}, {"model", model_name(model)}, {"y0", y0},
                 {"transient", transient}, {"window", window}, {"dt", dt}});
      LimitSet ls = detect_limit_set(limit, y0, transient, window, cfg);
      json j;
      if (ls.kind == LimitSet::Kind::fixed_point) {
        j = {{"kind", "fixed_point"}, {"point", ls.fixed_point}, {"residual", ls.residual}};
      } else if (ls.kind == LimitSet::Kind::cycle) {
        j = {{"kind", "cycle"},
             {"period", ls.period},
             {"closure_error", ls.closure_error},
             {"n_points", ls.cycle_points.size()}};
      } else {
        j = {{"kind", "unknown"}, {"best_closure", ls.closure_error}};
      }
      std::cout << j.dump(2) << '\n';
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(std::filesystem::path(out_dir) / "limitset.csv");
        const Domain& dom = model_domain(model);
        csv << "t";
        for (int i = 0; i < dom.dim(); ++i) csv << ",x" << i;
        csv << '\n';
        const auto pts = ls.points();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          csv << fmt_full(ls.period * static_cast<double>(i) /
                          std::max<double>(1.0, static_cast<double>(pts.size())));
          for (double v : pts[i]) csv << ',' << fmt_full(v);
          csv << '\n';
        }
      }
      return ls.kind == LimitSet::Kind::unknown ? 1 : 0;
    }

    if (stat_cmd->parsed()) {
      const std::uint64_t seed = resolve_seed(stat_seed, seed_flag);
      Model model = resolve_model(margs);
      StationaryOptions opts;
      opts.burn_in = burn_in;
      opts.n_samples = n_samples;
      opts.spacing = spacing;
      opts.w1.resample_n = resample_n;
      echo_plan({{"command", "stationary"}, {"model", model_name(model)}, {"N", N},
                 {"burn_in", burn_in}, {"samples", n_samples}, {"spacing", spacing},
                 {"seed", seed}});
      StationaryEstimate est = stationary_sample(model, N, opts, RngSpec{seed});
      json j = {{"split_half_w1", est.split_half_w1},
                {"flagged", est.flagged},
                {"truncations", est.truncations},
                {"frozen", est.frozen},
                {"samples", est.cloud.size()}};
      std::cout << j.dump(2) << '\n';
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        est.cloud.write_csv((std::filesystem::path(out_dir) / "cloud.csv").string());
        std::ofstream diag(std::filesystem::path(out_dir) / "diagnostics.json");
        diag << j.dump(2) << '\n';
      }
      return 0;
    }

    // verify subcommands
    for (std::size_t i = 0; i < experiments.size(); ++i) {
      if (!experiments[i]->parsed()) continue;
      ExperimentPlan plan;
      std::string model_json;
      Model model = resolve_model(margs, &model_json);
      plan.model_json = model_json;
      plan.N_list = parse_n_list(n_list_text);
      plan.t_list = parse_t_list(t_list_text);
      plan.replicas = replicas;
      plan.seed = resolve_seed(ver_seed, seed_flag);
      plan.stationary.burn_in = burn_in;
      plan.stationary.n_samples = n_samples;
      plan.stationary.spacing = spacing;
      plan.flow_cfg.dt = dt;
      plan.w1.resample_n = resample_n;
      plan.threads = threads;
      if (!y0_text.empty()) plan.y0 = parse_point(y0_text);
      if (!ystar_text.empty()) plan.y_star = parse_point(ystar_text);

      const std::string name = experiments[i]->get_name();
      if (tol >= 0.0) {
        plan.tolerance = tol;
      } else {
        plan.tolerance = name == "support" ? 0.05 : (name == "theorem" ? 0.03 : 0.02);
      }
      plan.validate();  // fail before any side effect
      json resolved = plan.to_json();
      resolved["command"] = "verify " + name;
      resolved["out"] = out_dir;
      resolved["threads"] = threads;
      echo_plan(resolved);

      ReportDocument rep;
      if (name == "hypothesis1")
        rep = check_hypothesis1(plan);
      else if (name == "theorem")
        rep = check_theorem(plan);
      else if (name == "corollary")
        rep = check_corollary(plan);
      else
        rep = check_support(plan);
      emit_report(rep, out_dir);
      std::cout << rep.summary << '\n';
      std::cout << "report: " << (std::filesystem::path(out_dir) / "report.json").string() << '\n';
      return rep.pass ? 0 : 1;
    }
    return 2;
  } catch (const IntegrationError& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
