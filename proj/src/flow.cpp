#include "mflab/flow.hpp"

#include <cmath>

namespace mflab {

FlowMap FlowMap::from(const CtModel& model) {
  auto held = std::make_shared<CtModel>(model);
  return FlowMap(Kind::continuous, held->domain(),
                 [held](std::span<const double> y) { return held->drift(y); });
}

FlowMap FlowMap::from(const DtModel& model) {
  auto held = std::make_shared<DtModel>(model);
  return FlowMap(Kind::discrete, held->domain(),
                 [held](std::span<const double> m) { return held->limit_map(m); });
}

FlowMap FlowMap::from(const Model& model) {
  if (const auto* ct = std::get_if<CtModel>(&model)) return from(*ct);
  return from(std::get<DtModel>(model));
}

FlowMap FlowMap::continuous(Domain domain, std::function<Vec(std::span<const double>)> field) {
  return FlowMap(Kind::continuous, std::move(domain), std::move(field));
}

FlowMap FlowMap::discrete(Domain domain, std::function<Vec(std::span<const double>)> map) {
  return FlowMap(Kind::discrete, std::move(domain), std::move(map));
}

namespace {

void project(const Domain& dom, Vec& y, double tol) {
  if (dom.kind() == DomainKind::box) {
    for (int i = 0; i < dom.dim(); ++i) {
      auto idx = static_cast<std::size_t>(i);
      if (y[idx] < dom.lo()[idx]) {
        if (dom.lo()[idx] - y[idx] > tol)
          throw IntegrationError("integration left the box by more than the projection tolerance",
                                 y);
        y[idx] = dom.lo()[idx];
      } else if (y[idx] > dom.hi()[idx]) {
        if (y[idx] - dom.hi()[idx] > tol)
          throw IntegrationError("integration left the box by more than the projection tolerance",
                                 y);
        y[idx] = dom.hi()[idx];
      }
    }
    return;
  }
  double s = 0.0;
  for (double& v : y) {
    if (v < 0.0) {
      if (v < -tol)
        throw IntegrationError("integration left the simplex by more than the projection tolerance",
                               y);
      v = 0.0;
    }
    s += v;
  }
  if (std::abs(s - 1.0) > tol)
    throw IntegrationError("simplex mass drifted beyond the projection tolerance", y);
  if (s > 0.0)
    for (double& v : y) v /= s;
}

void rk4_step(const FlowMap& limit, Vec& y, double h, Vec& k1, Vec& k2, Vec& k3, Vec& k4,
              Vec& tmp) {
  const std::size_t d = y.size();
  k1 = limit(y);
  tmp.resize(d);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  k2 = limit(tmp);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  k3 = limit(tmp);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * k3[i];
  k4 = limit(tmp);
  for (std::size_t i = 0; i < d; ++i)
    y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

Vec flow(const FlowMap& limit, Vec y0, double t, const FlowConfig& cfg) {
  if (t < 0.0) throw ModelError("flow: t must be >= 0");
  if (t == 0.0) return y0;

  if (limit.kind() == FlowMap::Kind::discrete) {
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9 * std::max(1.0, std::abs(t)))
      throw ModelError("flow: discrete limits require integer t");
    auto steps = static_cast<long long>(r);
    Vec y = std::move(y0);
    for (long long s = 0; s < steps; ++s) {
      y = limit(y);
      project(limit.domain(), y, cfg.projection_tol);
    }
    return y;
  }

  if (cfg.dt <= 0.0) throw ModelError("flow: dt must be positive");
  auto n_full = static_cast<long long>(std::floor(t / cfg.dt + 1e-12));
  double rem = t - static_cast<double>(n_full) * cfg.dt;
  if (rem <= 1e-12 * std::max(1.0, t)) rem = 0.0;

  Vec y = std::move(y0);
  Vec k1, k2, k3, k4, tmp;
  for (long long s = 0; s < n_full; ++s) {
    rk4_step(limit, y, cfg.dt, k1, k2, k3, k4, tmp);
    project(limit.domain(), y, cfg.projection_tol);
  }
  if (rem > 0.0) {
    rk4_step(limit, y, rem, k1, k2, k3, k4, tmp);
    project(limit.domain(), y, cfg.projection_tol);
  }
  return y;
}

double semiflow_defect(const FlowMap& limit, std::span<const double> y0, double s, double t,
                       const FlowConfig& cfg) {
  Vec start(y0.begin(), y0.end());
  Vec direct = flow(limit, start, s + t, cfg);
  Vec composed = flow(limit, flow(limit, start, t, cfg), s, cfg);
  return dist2(direct, composed);
}

}  // namespace mflab
