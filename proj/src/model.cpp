#include "mflab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mflab {

using nlohmann::json;

CtModel::CtModel(Domain domain, std::vector<Jump> jumps, std::string name,
                 std::map<std::string, double> params)
    : domain_(std::move(domain)),
      jumps_(std::move(jumps)),
      name_(std::move(name)),
      params_(std::move(params)) {
  if (jumps_.empty()) throw ModelError("CtModel: needs at least one jump");
  for (const Jump& j : jumps_) {
    if (static_cast<int>(j.delta.size()) != domain_.dim())
      throw ModelError("CtModel: jump dimension mismatch");
    long long s = 0;
    for (long long l : j.delta) s += l;
    if (s != 0) mass_conserving_ = false;
  }
}

Vec CtModel::drift(std::span<const double> y) const {
  const int d = domain_.dim();
  Vec f(static_cast<std::size_t>(d), 0.0);
  const bool close_last = domain_.kind() == DomainKind::simplex && mass_conserving_ && d > 1;
  const int upto = close_last ? d - 1 : d;
  for (const Jump& j : jumps_) {
    const double r = j.rate.eval(y);
    for (int i = 0; i < upto; ++i)
      f[static_cast<std::size_t>(i)] += r * static_cast<double>(j.delta[static_cast<std::size_t>(i)]);
  }
  if (close_last) {
    double s = 0.0;
    for (int i = 0; i < d - 1; ++i) s += f[static_cast<std::size_t>(i)];
    f[static_cast<std::size_t>(d - 1)] = -s;
  }
  return f;
}

DtModel::DtModel(Domain domain, std::vector<std::vector<RateExpr>> kernel, std::string name,
                 std::map<std::string, double> params)
    : domain_(std::move(domain)),
      kernel_(std::move(kernel)),
      name_(std::move(name)),
      params_(std::move(params)) {
  if (domain_.kind() != DomainKind::simplex)
    throw ModelError("DtModel: domain must be a simplex");
  const auto d = static_cast<std::size_t>(domain_.dim());
  if (kernel_.size() != d) throw ModelError("DtModel: kernel must be d x d");
  for (const auto& row : kernel_)
    if (row.size() != d) throw ModelError("DtModel: kernel must be d x d");
}

void DtModel::kernel_row(int i, std::span<const double> m, Vec& row) const {
  const auto& exprs = kernel_[static_cast<std::size_t>(i)];
  row.resize(exprs.size());
  for (std::size_t j = 0; j < exprs.size(); ++j) row[j] = exprs[j].eval(m);
}

Vec DtModel::limit_map(std::span<const double> m) const {
  const int d = domain_.dim();
  Vec out(static_cast<std::size_t>(d), 0.0);
  Vec row;
  for (int i = 0; i < d; ++i) {
    kernel_row(i, m, row);
    double s = 0.0;
    for (double v : row) s += v;
    if (std::abs(s - 1.0) > 1e-9)
      throw ModelError("DtModel '" + name_ + "': kernel row " + std::to_string(i) +
                       " sums to " + fmt_short(s) + " (|dev| > 1e-9)");
    const double mi = m[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] += mi * row[static_cast<std::size_t>(j)];
  }
  double total = 0.0;
  for (double v : out) total += v;
  if (total > 0.0)
    for (double& v : out) v /= total;
  return out;
}

const Domain& model_domain(const Model& m) {
  return std::visit([](const auto& mm) -> const Domain& { return mm.domain(); }, m);
}

const std::string& model_name(const Model& m) {
  return std::visit([](const auto& mm) -> const std::string& { return mm.name(); }, m);
}

// ---------------------------------------------------------------------------
// zoo

namespace {

double zoo_param(const ZooEntry& entry, const std::map<std::string, double>& given,
                 const std::string& key) {
  for (const auto& p : entry.params) {
    if (p.name != key) continue;
    auto it = given.find(key);
    double v = it == given.end() ? p.def : it->second;
    if (v < p.lo || v > p.hi)
      throw ModelError("zoo '" + entry.name + "': parameter " + key + "=" + fmt_short(v) +
                       " outside [" + fmt_short(p.lo) + ", " + fmt_short(p.hi) + "]");
    return v;
  }
  throw ModelError("zoo: unknown parameter " + key);
}

void reject_unknown_params(const ZooEntry& entry, const std::map<std::string, double>& given) {
  for (const auto& [k, v] : given) {
    bool known = false;
    for (const auto& p : entry.params)
      if (p.name == k) known = true;
    if (!known) throw ModelError("zoo '" + entry.name + "': unknown parameter '" + k + "'");
  }
}

const ZooEntry& zoo_entry(const std::string& name) {
  for (const auto& e : zoo_catalog())
    if (e.name == name) return e;
  throw ModelError("zoo: unknown model '" + name + "' (see zoo-list)");
}

}  // namespace

const std::vector<ZooEntry>& zoo_catalog() {
  static const std::vector<ZooEntry> catalog = {
      {"sis",
       "1-D epidemic on [0,1]: infected fraction x0; infection beta*x0*(1-x0), "
       "external infection lambda0*(1-x0), recovery gamma*x0. lambda0 > 0 removes "
       "the absorbing state at 0.",
       {{"beta", 2.0, 1e-12, 100.0, "infection rate"},
        {"gamma", 1.0, 1e-12, 100.0, "recovery rate"},
        {"lambda0", 0.01, 0.0, 1.0, "external infection floor"}}},
      {"sirs",
       "3-state epidemic on the simplex (S,I,R)=(x0,x1,x2): infection "
       "beta*x0*x1 + lambda0*x0, recovery gamma*x1, immunity loss alpha*x2.",
       {{"beta", 3.0, 1e-12, 100.0, "infection rate"},
        {"gamma", 1.0, 1e-12, 100.0, "recovery rate"},
        {"alpha", 0.5, 1e-12, 100.0, "immunity-loss rate"},
        {"lambda0", 0.01, 0.0, 1.0, "external infection floor"}}},
      {"hopf",
       "Planar normal form on [-2,2]^2 with an attracting circular limit cycle "
       "of radius sqrt(mu) and period 2*pi/omega; eta > 0 adds a jump-rate floor "
       "for irreducibility without changing the drift.",
       {{"mu", 0.25, 1e-12, 1.0, "radial gain (cycle radius sqrt(mu))"},
        {"omega", 1.0, 1e-12, 100.0, "angular speed"},
        {"eta", 0.05, 0.0, 1.0, "rate floor"}}},
      {"logistic",
       "2-state synchronous occupancy chain; the limit map on the occupied "
       "fraction m1 is the clamped logistic map m1 -> clamp(r*m1*(1-m1), eps, 1-eps). "
       "eps > 0 removes absorption at m1 = 0.",
       {{"r", 2.5, 1e-12, 4.0, "logistic growth parameter"},
        {"eps", 1e-3, 1e-12, 0.0999999, "clamp floor (in (0, 0.1))"}}},
  };
  return catalog;
}

Model make_zoo_model(const ZooSpec& spec) {
  const ZooEntry& entry = zoo_entry(spec.name);
  reject_unknown_params(entry, spec.params);
  auto P = [&](const char* key) { return zoo_param(entry, spec.params, key); };
  auto num = [](double v) { return fmt_full(v); };

  if (spec.name == "sis") {
    const double beta = P("beta"), gamma = P("gamma"), lambda0 = P("lambda0");
    Domain dom = Domain::box({0.0}, {1.0});
    std::vector<Jump> jumps;
    jumps.push_back({{+1}, RateExpr::parse("max0(" + num(beta) + "*x0*(1 - x0) + " + num(lambda0) +
                                               "*(1 - x0))",
                                           1)});
    jumps.push_back({{-1}, RateExpr::parse(num(gamma) + "*x0", 1)});
    return CtModel(dom, std::move(jumps), "sis",
                   {{"beta", beta}, {"gamma", gamma}, {"lambda0", lambda0}});
  }

  if (spec.name == "sirs") {
    const double beta = P("beta"), gamma = P("gamma"), alpha = P("alpha"), lambda0 = P("lambda0");
    Domain dom = Domain::simplex(3);
    std::vector<Jump> jumps;
    jumps.push_back({{-1, +1, 0},
                     RateExpr::parse(num(beta) + "*x0*x1 + " + num(lambda0) + "*x0", 3)});
    jumps.push_back({{0, -1, +1}, RateExpr::parse(num(gamma) + "*x1", 3)});
    jumps.push_back({{+1, 0, -1}, RateExpr::parse(num(alpha) + "*x2", 3)});
    return CtModel(dom, std::move(jumps), "sirs",
                   {{"beta", beta}, {"gamma", gamma}, {"alpha", alpha}, {"lambda0", lambda0}});
  }

  if (spec.name == "hopf") {
    const double mu = P("mu"), omega = P("omega"), eta = P("eta");
    Domain dom = Domain::box({-2.0, -2.0}, {2.0, 2.0});
    const std::string f1 =
        num(mu) + "*x0 - " + num(omega) + "*x1 - x0*(x0^2 + x1^2)";
    const std::string f2 =
        num(omega) + "*x0 + " + num(mu) + "*x1 - x1*(x0^2 + x1^2)";
    const std::string e = num(eta);
    std::vector<Jump> jumps;
    jumps.push_back({{+1, 0}, RateExpr::parse("max0(" + f1 + ") + " + e, 2)});
    jumps.push_back({{-1, 0}, RateExpr::parse("max0(0 - (" + f1 + ")) + " + e, 2)});
    jumps.push_back({{0, +1}, RateExpr::parse("max0(" + f2 + ") + " + e, 2)});
    jumps.push_back({{0, -1}, RateExpr::parse("max0(0 - (" + f2 + ")) + " + e, 2)});
    return CtModel(dom, std::move(jumps), "hopf", {{"mu", mu}, {"omega", omega}, {"eta", eta}});
  }

  if (spec.name == "logistic") {
    const double r = P("r"), eps = P("eps");
    Domain dom = Domain::simplex(2);
    // clamp(v, eps, 1-eps) = eps + max0(v - eps) - max0(v - (1-eps))
    const std::string v = num(r) + "*x1*(1 - x1)";
    const std::string p = num(eps) + " + max0(" + v + " - " + num(eps) + ") - max0(" + v +
                          " - " + num(1.0 - eps) + ")";
    std::vector<std::vector<RateExpr>> kernel(2);
    for (int i = 0; i < 2; ++i) {
      kernel[static_cast<std::size_t>(i)].push_back(RateExpr::parse("1 - (" + p + ")", 2));
      kernel[static_cast<std::size_t>(i)].push_back(RateExpr::parse(p, 2));
    }
    return DtModel(dom, std::move(kernel), "logistic", {{"r", r}, {"eps", eps}});
  }

  throw ModelError("zoo: unknown model '" + spec.name + "'");
}

// ---------------------------------------------------------------------------
// validation

ValidationReport validate_model(const Model& model, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ModelError("validate_model: n_samples must be >= 1");
  ValidationReport rep;
  rep.samples = n_samples;
  RngStream rng(mix_seed(seed, 0x7a11da7e));
  const Domain& dom = model_domain(model);

  if (const auto* ct = std::get_if<CtModel>(&model)) {
    rep.min_rate = 0.0;
    if (dom.kind() == DomainKind::simplex) {
      for (std::size_t j = 0; j < ct->jumps().size(); ++j) {
        long long s = 0;
        for (long long l : ct->jumps()[j].delta) s += l;
        if (s != 0) {
          rep.mass_conservation = false;
          rep.issues.push_back("jump " + std::to_string(j) +
                               " breaks simplex mass conservation (sum l != 0)");
        }
      }
    }
    for (int s = 0; s < n_samples; ++s) {
      Vec y = dom.sample_uniform(rng);
      for (const Jump& j : ct->jumps()) rep.min_rate = std::min(rep.min_rate, j.rate.eval(y));
    }
    if (rep.min_rate < -1e-12)
      rep.issues.push_back("negative rate value " + fmt_short(rep.min_rate) +
                           " sampled (must be >= -1e-12)");
  } else {
    const auto& dt = std::get<DtModel>(model);
    rep.min_kernel = 0.0;
    Vec row;
    for (int s = 0; s < n_samples; ++s) {
      Vec m = dom.sample_uniform(rng);
      for (int i = 0; i < dom.dim(); ++i) {
        dt.kernel_row(i, m, row);
        double total = 0.0;
        for (double v : row) {
          total += v;
          rep.min_kernel = std::min(rep.min_kernel, v);
        }
        rep.max_row_dev = std::max(rep.max_row_dev, std::abs(total - 1.0));
      }
    }
    if (rep.max_row_dev > 1e-9)
      rep.issues.push_back("kernel row sum deviates by " + fmt_short(rep.max_row_dev) +
                           " (must be <= 1e-9)");
    if (rep.min_kernel < -1e-12)
      rep.issues.push_back("negative kernel entry " + fmt_short(rep.min_kernel) + " sampled");
  }
  rep.pass = rep.issues.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {

Domain domain_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (kind == "box") {
    return Domain::box(j.at("lo").get<Vec>(), j.at("hi").get<Vec>());
  }
  if (kind == "simplex") return Domain::simplex(dim);
  throw ModelError("model json: domain kind must be 'box' or 'simplex'");
}

json domain_to_json(const Domain& d) {
  json j;
  j["kind"] = d.kind() == DomainKind::box ? "box" : "simplex";
  j["dim"] = d.dim();
  if (d.kind() == DomainKind::box) {
    j["lo"] = d.lo();
    j["hi"] = d.hi();
  }
  return j;
}

}  // namespace

Model model_from_json_text(const std::string& text) {
  json j = json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  Domain dom = domain_from_json(j.at("domain"));
  std::string name = j.value("name", std::string("custom"));
  std::map<std::string, double> params;
  if (j.contains("params"))
    for (auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();

  if (kind == "ct") {
    std::vector<Jump> jumps;
    for (const auto& jj : j.at("jumps")) {
      Jump jump;
      jump.delta = jj.at("l").get<std::vector<long long>>();
      jump.rate = RateExpr::parse(jj.at("rate").get<std::string>(), dom.dim());
      jumps.push_back(std::move(jump));
    }
    return CtModel(std::move(dom), std::move(jumps), std::move(name), std::move(params));
  }
  if (kind == "dt") {
    std::vector<std::vector<RateExpr>> kernel;
    for (const auto& row : j.at("kernel")) {
      std::vector<RateExpr> r;
      for (const auto& cell : row) r.push_back(RateExpr::parse(cell.get<std::string>(), dom.dim()));
      kernel.push_back(std::move(r));
    }
    return DtModel(std::move(dom), std::move(kernel), std::move(name), std::move(params));
  }
  throw ModelError("model json: kind must be 'ct' or 'dt'");
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

std::string model_to_json_text(const Model& model) {
  json j;
  j["name"] = model_name(model);
  j["domain"] = domain_to_json(model_domain(model));
  if (const auto* ct = std::get_if<CtModel>(&model)) {
    j["kind"] = "ct";
    json jumps = json::array();
    for (const Jump& jump : ct->jumps()) {
      json jj;
      jj["l"] = jump.delta;
      jj["rate"] = jump.rate.source();
      jumps.push_back(jj);
    }
    j["jumps"] = jumps;
    j["params"] = ct->params();
  } else {
    const auto& dt = std::get<DtModel>(model);
    j["kind"] = "dt";
    json kernel = json::array();
    for (const auto& row : dt.kernel()) {
      json r = json::array();
      for (const RateExpr& e : row) r.push_back(e.source());
      kernel.push_back(r);
    }
    j["kernel"] = kernel;
    j["params"] = dt.params();
  }
  return j.dump(2) + "\n";
}

}  // namespace mflab
