#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mflab/flow.hpp"
#include "mflab/limitset.hpp"

namespace mflab {

/// A finitely supported probability measure on a Domain: n support points
/// with nonnegative weights summing to 1 (tolerance 1e-9).
class PointCloudMeasure {
 public:
  PointCloudMeasure(Domain domain, std::vector<Vec> points, Vec weights);

  /// Equal weights 1/n.
  static PointCloudMeasure equal_weight(Domain domain, std::vector<Vec> points);

  const Domain& domain() const { return domain_; }
  std::size_t size() const { return n_; }
  int dim() const { return d_; }
  std::span<const double> point(std::size_t i) const { return {pts_.data() + i * d_, static_cast<std::size_t>(d_)}; }
  double weight(std::size_t i) const { return w_[i]; }
  const Vec& weights() const { return w_; }

  bool equal_weights(double tol = 1e-12) const;

  /// CSV cloud format: header x0,...,x{d-1},weight; one row per atom.
  void write_csv(const std::string& path) const;
  static PointCloudMeasure read_csv(const Domain& domain, const std::string& path);
  std::string to_csv() const;
  static PointCloudMeasure from_csv(const Domain& domain, const std::string& text);

 private:
  Domain domain_;
  std::size_t n_ = 0;
  int d_ = 0;
  Vec pts_;  // row-major n x d
  Vec w_;
};

PointCloudMeasure dirac(const Domain& domain, Vec point);

/// The time-average measure carried by a detected cycle: equal weights on
/// its equal-time samples (flow-invariant up to discretization).
PointCloudMeasure cycle_measure(const Domain& domain, const LimitSet& cycle);

/// Atoms mapped by phi_t, weights unchanged.
PointCloudMeasure pushforward(const PointCloudMeasure& mu, const FlowMap& limit, double t,
                              const FlowConfig& cfg = {});

/// A named bounded-continuous test function with a closed-form Lipschitz
/// bound over the domain.
struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> fn;
  double lipschitz = 0.0;
};

/// Finite surrogate for C_b(E): all coordinates, all products x_i*x_j
/// (i <= j), and Gaussian bumps exp(-|x-c|^2/s^2) with centers on a
/// 3^min(d,2) grid over the bounding box and s = diameter/4.
std::vector<TestFunction> make_test_function_set(const Domain& domain);

struct W1Options;  // wasserstein.hpp

/// rho_t(mu) = W1(phi_t # mu, mu); zero at t = 0 and small exactly when mu
/// is nearly invariant for the flow.
double invariance_residual(const PointCloudMeasure& mu, const FlowMap& limit, double t,
                           const FlowConfig& cfg, const W1Options& w1opts);

/// max_h | int h d(phi_t # mu) - int h d(mu) | over the test-function set.
double test_function_gap(const PointCloudMeasure& mu, const FlowMap& limit, double t,
                         const std::vector<TestFunction>& h_set, const FlowConfig& cfg = {});

/// Weighted mean and max distance from mu's atoms to the nearest point of
/// `points`.
std::pair<double, double> support_distance(const PointCloudMeasure& mu,
                                           const std::vector<Vec>& points);

}  // namespace mflab
