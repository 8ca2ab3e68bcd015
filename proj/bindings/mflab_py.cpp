// Python bindings for the main operations: models, simulation, flows,
// limit sets, measures, transport distances and the verification
// experiments. Reports cross the boundary as JSON strings; the python
// package turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mflab/experiment.hpp"

namespace py = pybind11;
using namespace mflab;

namespace {

Model build_model(const std::string& name_or_path, const std::map<std::string, double>& params) {
  if (name_or_path.find(".json") != std::string::npos ||
      name_or_path.find('/') != std::string::npos)
    return load_model_file(name_or_path);
  return make_zoo_model({name_or_path, params});
}

struct PyModel {
  Model model;
  const Domain& domain() const { return model_domain(model); }
};

std::vector<Vec> cloud_points(const PointCloudMeasure& m) {
  std::vector<Vec> pts;
  pts.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    pts.emplace_back(m.point(i).begin(), m.point(i).end());
  return pts;
}

py::dict limit_set_dict(const LimitSet& ls) {
  py::dict d;
  switch (ls.kind) {
    case LimitSet::Kind::fixed_point:
      d["kind"] = "fixed_point";
      d["point"] = ls.fixed_point;
      d["residual"] = ls.residual;
      break;
    case LimitSet::Kind::cycle:
      d["kind"] = "cycle";
      d["period"] = ls.period;
      d["closure_error"] = ls.closure_error;
      d["points"] = ls.cycle_points;
      break;
    default:
      d["kind"] = "unknown";
      d["closure_error"] = ls.closure_error;
      break;
  }
  return d;
}

ExperimentPlan plan_from_kwargs(const std::string& model, const std::map<std::string, double>& params,
                                const std::vector<long long>& N_list,
                                const std::vector<double>& t_list, std::uint64_t seed, int replicas,
                                double burn_in, int n_samples, double spacing, double dt,
                                double tolerance, int resample_n, const Vec& y0, int threads) {
  ExperimentPlan plan;
  plan.model_json = model_to_json_text(build_model(model, params));
  plan.N_list = N_list;
  plan.t_list = t_list;
  plan.seed = seed;
  plan.replicas = replicas;
  plan.stationary.burn_in = burn_in;
  plan.stationary.n_samples = n_samples;
  plan.stationary.spacing = spacing;
  plan.flow_cfg.dt = dt;
  if (tolerance >= 0) plan.tolerance = tolerance;
  plan.w1.resample_n = resample_n;
  plan.y0 = y0;
  plan.threads = threads;
  return plan;
}

}  // namespace

PYBIND11_MODULE(_mflab, m) {
  m.doc() = "mean-field stationary-regime laboratory (C++ core)";

  py::register_exception<ParseError>(m, "ExprParseError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelValidationError", PyExc_ValueError);
  py::register_exception<IntegrationError>(m, "IntegrationFailure", PyExc_RuntimeError);
  py::register_exception<ConvergenceError>(m, "ConvergenceFailure", PyExc_RuntimeError);

  py::class_<Domain>(m, "Domain")
      .def_static("box", &Domain::box, py::arg("lo"), py::arg("hi"))
      .def_static("simplex", &Domain::simplex, py::arg("dim"))
      .def("contains",
           [](const Domain& d, const Vec& y, double tol) { return d.contains(y, tol); },
           py::arg("y"), py::arg("tol") = 0.0)
      .def_property_readonly("dim", &Domain::dim)
      .def_property_readonly("kind",
                             [](const Domain& d) {
                               return d.kind() == DomainKind::box ? "box" : "simplex";
                             })
      .def("centroid", &Domain::centroid)
      .def("diameter", &Domain::diameter);

  py::class_<RateExpr>(m, "RateExpr")
      .def_static("parse", &RateExpr::parse, py::arg("text"), py::arg("dim"))
      .def("__call__", [](const RateExpr& e, const Vec& y) { return e.eval(y); })
      .def("__str__", [](const RateExpr& e) { return e.str(); })
      .def_property_readonly("source", &RateExpr::source);

  py::class_<PyModel>(m, "Model")
      .def(py::init([](const std::string& name, const std::map<std::string, double>& params) {
             return PyModel{build_model(name, params)};
           }),
           py::arg("name"), py::arg("params") = std::map<std::string, double>{})
      .def_property_readonly("name", [](const PyModel& m_) { return model_name(m_.model); })
      .def_property_readonly("kind",
                             [](const PyModel& m_) {
                               return std::holds_alternative<CtModel>(m_.model) ? "ct" : "dt";
                             })
      .def_property_readonly("domain", [](const PyModel& m_) { return m_.domain(); })
      .def("drift",
           [](const PyModel& m_, const Vec& y) {
             return std::get<CtModel>(m_.model).drift(y);
           },
           py::arg("y"))
      .def("limit_map",
           [](const PyModel& m_, const Vec& y) {
             return std::get<DtModel>(m_.model).limit_map(y);
           },
           py::arg("m"))
      .def("to_json", [](const PyModel& m_) { return model_to_json_text(m_.model); })
      .def("validate",
           [](const PyModel& m_, int n_samples, std::uint64_t seed) {
             ValidationReport r = validate_model(m_.model, n_samples, seed);
             py::dict d;
             d["pass"] = r.pass;
             d["min_rate"] = r.min_rate;
             d["max_row_dev"] = r.max_row_dev;
             d["min_kernel"] = r.min_kernel;
             d["mass_conservation"] = r.mass_conservation;
             d["issues"] = r.issues;
             return d;
           },
           py::arg("n_samples") = 1000, py::arg("seed") = 0);

  m.def("zoo_catalog", []() {
    py::list out;
    for (const ZooEntry& e : zoo_catalog()) {
      py::dict d;
      d["name"] = e.name;
      d["doc"] = e.doc;
      py::dict params;
      for (const ZooParamDoc& p : e.params) {
        params[py::str(p.name)] =
            py::make_tuple(p.def, p.lo, p.hi, p.doc);
      }
      d["params"] = params;
      out.append(d);
    }
    return out;
  });

  m.def("round_to_grid",
        [](const Domain& dom, long long N, const Vec& y) {
          GridPoint g = round_to_grid(dom, N, y);
          return py::make_tuple(g.coords, g.embed());
        },
        py::arg("domain"), py::arg("N"), py::arg("y"));

  m.def("simulate",
        [](const PyModel& m_, long long N, const Vec& y0, double t, std::uint64_t seed,
           const std::vector<double>& sample_times) {
          const Domain& dom = model_domain(m_.model);
          GridPoint start = round_to_grid(dom, N, y0);
          RngSpec spec{seed};
          RngStream stream = spec.stream(0);
          py::dict d;
          std::vector<Vec> samples;
          if (const auto* ct = std::get_if<CtModel>(&m_.model)) {
            CtRunResult r = simulate_ct(*ct, N, start, t, stream, sample_times);
            d["final"] = r.state.embed();
            d["events"] = r.events;
            d["truncations"] = r.truncations;
            d["frozen"] = r.frozen;
            for (const GridPoint& g : r.samples) samples.push_back(g.embed());
          } else {
            std::vector<long long> marks;
            for (double st : sample_times) marks.push_back(static_cast<long long>(std::llround(st)));
            DtRunResult r = simulate_dt(std::get<DtModel>(m_.model), N, start,
                                        static_cast<long long>(std::llround(t)), stream, marks);
            d["final"] = r.state.embed();
            d["steps"] = r.steps;
            for (const GridPoint& g : r.samples) samples.push_back(g.embed());
          }
          d["samples"] = samples;
          return d;
        },
        py::arg("model"), py::arg("N"), py::arg("y0"), py::arg("t"), py::arg("seed") = 0,
        py::arg("sample_times") = std::vector<double>{});

  m.def("marginal_moments",
        [](const PyModel& m_, long long N, const Vec& y0, double t, int replicas,
           std::uint64_t seed, int threads) {
          auto h_set = make_test_function_set(model_domain(m_.model));
          MarginalEstimate est =
              marginal_moments(m_.model, N, y0, t, h_set, replicas, RngSpec{seed}, threads);
          py::dict d;
          for (std::size_t i = 0; i < est.names.size(); ++i)
            d[py::str(est.names[i])] =
                py::make_tuple(est.mean[i], est.variance[i], est.ci_half[i]);
          return d;
        },
        py::arg("model"), py::arg("N"), py::arg("y0"), py::arg("t"), py::arg("replicas") = 200,
        py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("stationary_sample",
        [](const PyModel& m_, long long N, double burn_in, int n_samples, double spacing,
           std::uint64_t seed) {
          StationaryOptions opts;
          opts.burn_in = burn_in;
          opts.n_samples = n_samples;
          opts.spacing = spacing;
          StationaryEstimate est = stationary_sample(m_.model, N, opts, RngSpec{seed});
          py::dict d;
          d["points"] = cloud_points(est.cloud);
          d["weights"] = est.cloud.weights();
          d["split_half_w1"] = est.split_half_w1;
          d["flagged"] = est.flagged;
          d["truncations"] = est.truncations;
          d["frozen"] = est.frozen;
          return d;
        },
        py::arg("model"), py::arg("N"), py::arg("burn_in") = 200.0, py::arg("n_samples") = 1000,
        py::arg("spacing") = 1.0, py::arg("seed") = 0);

  m.def("flow",
        [](const PyModel& m_, const Vec& y0, double t, double dt) {
          FlowConfig cfg;
          cfg.dt = dt;
          return flow(FlowMap::from(m_.model), y0, t, cfg);
        },
        py::arg("model"), py::arg("y0"), py::arg("t"), py::arg("dt") = 1e-3);

  m.def("semiflow_defect",
        [](const PyModel& m_, const Vec& y0, double s, double t, double dt) {
          FlowConfig cfg;
          cfg.dt = dt;
          return semiflow_defect(FlowMap::from(m_.model), y0, s, t, cfg);
        },
        py::arg("model"), py::arg("y0"), py::arg("s"), py::arg("t"), py::arg("dt") = 1e-3);

  m.def("find_fixed_point",
        [](const PyModel& m_, const Vec& y_init, int max_iters) {
          FixedPointResult r = find_fixed_point(FlowMap::from(m_.model), y_init, max_iters);
          py::dict d;
          d["point"] = r.point;
          d["residual"] = r.residual;
          d["iterations"] = r.iterations;
          return d;
        },
        py::arg("model"), py::arg("y_init"), py::arg("max_iters") = 100);

  m.def("detect_limit_set",
        [](const PyModel& m_, const Vec& y0, double transient, double window, double dt) {
          FlowConfig cfg;
          cfg.dt = dt;
          return limit_set_dict(detect_limit_set(FlowMap::from(m_.model), y0, transient, window, cfg));
        },
        py::arg("model"), py::arg("y0"), py::arg("transient") = 200.0, py::arg("window") = 50.0,
        py::arg("dt") = 1e-3);

  m.def("recurrent_set_estimate",
        [](const PyModel& m_, const std::vector<Vec>& starts, double transient, double window,
           double dt) {
          FlowConfig cfg;
          cfg.dt = dt;
          auto rse = recurrent_set_estimate(FlowMap::from(m_.model), starts, transient, window, cfg);
          py::dict d;
          py::list sets;
          for (const LimitSet& ls : rse.sets) sets.append(limit_set_dict(ls));
          d["sets"] = sets;
          d["points"] = rse.points;
          d["unknown_count"] = rse.unknown_count;
          return d;
        },
        py::arg("model"), py::arg("starts"), py::arg("transient") = 200.0,
        py::arg("window") = 50.0, py::arg("dt") = 1e-3);

  py::class_<PointCloudMeasure>(m, "PointCloudMeasure")
      .def(py::init([](const Domain& dom, const std::vector<Vec>& pts, const Vec& weights) {
             if (weights.empty()) return PointCloudMeasure::equal_weight(dom, pts);
             return PointCloudMeasure(dom, pts, weights);
           }),
           py::arg("domain"), py::arg("points"), py::arg("weights") = Vec{})
      .def_property_readonly("points", &cloud_points)
      .def_property_readonly("weights", [](const PointCloudMeasure& m_) { return m_.weights(); })
      .def("__len__", &PointCloudMeasure::size)
      .def("write_csv", &PointCloudMeasure::write_csv, py::arg("path"))
      .def_static("read_csv", &PointCloudMeasure::read_csv, py::arg("domain"), py::arg("path"));

  m.def("dirac", &dirac, py::arg("domain"), py::arg("point"));

  m.def("pushforward",
        [](const PointCloudMeasure& mu, const PyModel& m_, double t, double dt) {
          FlowConfig cfg;
          cfg.dt = dt;
          return pushforward(mu, FlowMap::from(m_.model), t, cfg);
        },
        py::arg("mu"), py::arg("model"), py::arg("t"), py::arg("dt") = 1e-3);

  m.def("w1",
        [](const PointCloudMeasure& mu, const PointCloudMeasure& nu, int resample_n,
           std::uint64_t seed) {
          W1Options opts;
          opts.resample_n = resample_n;
          opts.seed = seed;
          return w1(mu, nu, opts);
        },
        py::arg("mu"), py::arg("nu"), py::arg("resample_n") = 512, py::arg("seed") = 0);

  m.def("w1_bruteforce", &w1_bruteforce, py::arg("mu"), py::arg("nu"));

  m.def("invariance_residual",
        [](const PointCloudMeasure& mu, const PyModel& m_, double t, double dt, int resample_n,
           std::uint64_t seed) {
          FlowConfig cfg;
          cfg.dt = dt;
          W1Options opts;
          opts.resample_n = resample_n;
          opts.seed = seed;
          return invariance_residual(mu, FlowMap::from(m_.model), t, cfg, opts);
        },
        py::arg("mu"), py::arg("model"), py::arg("t"), py::arg("dt") = 1e-3,
        py::arg("resample_n") = 512, py::arg("seed") = 0);

  m.def("test_function_gap",
        [](const PointCloudMeasure& mu, const PyModel& m_, double t, double dt) {
          FlowConfig cfg;
          cfg.dt = dt;
          auto h_set = make_test_function_set(mu.domain());
          return test_function_gap(mu, FlowMap::from(m_.model), t, h_set, cfg);
        },
        py::arg("mu"), py::arg("model"), py::arg("t"), py::arg("dt") = 1e-3);

  m.def("support_distance",
        [](const PointCloudMeasure& mu, const std::vector<Vec>& points) {
          auto [mean, mx] = support_distance(mu, points);
          return py::make_tuple(mean, mx);
        },
        py::arg("mu"), py::arg("points"));

  m.def("verify",
        [](const std::string& experiment, const std::string& model,
           const std::map<std::string, double>& params, const std::vector<long long>& N_list,
           const std::vector<double>& t_list, std::uint64_t seed, int replicas, double burn_in,
           int n_samples, double spacing, double dt, double tolerance, int resample_n,
           const Vec& y0, int threads, const std::string& out_dir) {
          ExperimentPlan plan = plan_from_kwargs(model, params, N_list, t_list, seed, replicas,
                                                 burn_in, n_samples, spacing, dt, tolerance,
                                                 resample_n, y0, threads);
          ReportDocument rep;
          if (experiment == "hypothesis1")
            rep = check_hypothesis1(plan);
          else if (experiment == "theorem")
            rep = check_theorem(plan);
          else if (experiment == "corollary")
            rep = check_corollary(plan);
          else if (experiment == "support")
            rep = check_support(plan);
          else
            throw ModelError("unknown experiment: " + experiment);
          if (!out_dir.empty()) emit_report(rep, out_dir);
          return rep.doc.dump();
        },
        py::arg("experiment"), py::arg("model"),
        py::arg("params") = std::map<std::string, double>{},
        py::arg("N_list") = std::vector<long long>{100, 1000, 10000},
        py::arg("t_list") = std::vector<double>{1.0}, py::arg("seed") = 0,
        py::arg("replicas") = 200, py::arg("burn_in") = 200.0, py::arg("n_samples") = 1000,
        py::arg("spacing") = 1.0, py::arg("dt") = 1e-3, py::arg("tolerance") = -1.0,
        py::arg("resample_n") = 512, py::arg("y0") = Vec{}, py::arg("threads") = 1,
        py::arg("out_dir") = std::string{});

  m.attr("__version__") = "0.1.0";
}
