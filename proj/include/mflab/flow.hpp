#pragma once

#include <functional>
#include <memory>

#include "mflab/model.hpp"

namespace mflab {

struct FlowConfig {
  double dt = 1e-3;              // fixed RK4 step
  double projection_tol = 1e-9;  // max violation absorbed by clamping/renormalizing
};

/// The deterministic limit phi: either an ODE drift field (continuous time)
/// or an iterated map (discrete time), together with its domain.
class FlowMap {
 public:
  enum class Kind { continuous, discrete };

  static FlowMap from(const CtModel& model);
  static FlowMap from(const DtModel& model);
  static FlowMap from(const Model& model);
  static FlowMap continuous(Domain domain, std::function<Vec(std::span<const double>)> field);
  static FlowMap discrete(Domain domain, std::function<Vec(std::span<const double>)> map);

  Kind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }

  /// Drift F(y) in the continuous case, map value g(y) in the discrete case.
  Vec operator()(std::span<const double> y) const { return fn_(y); }

 private:
  FlowMap(Kind k, Domain d, std::function<Vec(std::span<const double>)> f)
      : kind_(k), domain_(std::move(d)), fn_(std::move(f)) {}
  Kind kind_;
  Domain domain_;
  std::function<Vec(std::span<const double>)> fn_;
};

/// phi_t(y0). Continuous: classical fixed-step RK4 with the final partial
/// step shortened to land exactly on t; after each step box coordinates are
/// clamped and simplex points renormalized when the violation is within
/// cfg.projection_tol (beyond it, IntegrationError). Discrete: t must be a
/// nonnegative integer (iteration count). flow(y0, 0) returns y0 unchanged.
Vec flow(const FlowMap& limit, Vec y0, double t, const FlowConfig& cfg = {});

/// || flow(y0, s+t) - flow(flow(y0, t), s) ||; integrator-consistency
/// diagnostic for the semi-flow composition axiom.
double semiflow_defect(const FlowMap& limit, std::span<const double> y0, double s, double t,
                       const FlowConfig& cfg = {});

}  // namespace mflab
