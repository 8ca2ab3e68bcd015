#pragma once

#include "mflab/flow.hpp"

namespace mflab {

/// A detected limit set of the deterministic process: a fixed point, a
/// periodic orbit sampled at M equal time increments, or unknown when no
/// recurrence was found.
struct LimitSet {
  enum class Kind { fixed_point, cycle, unknown };
  Kind kind = Kind::unknown;

  Vec fixed_point;        // kind == fixed_point
  double residual = 0.0;  // ||F(y*)|| or ||g(y*) - y*||

  std::vector<Vec> cycle_points;  // kind == cycle, equal-time samples
  double period = 0.0;
  double closure_error = 0.0;  // ||phi_T(p) - p||; best value seen when unknown

  /// All points carried by the set (1 for fixed points, M for cycles).
  std::vector<Vec> points() const;
};

struct FixedPointResult {
  Vec point;
  double residual = 0.0;
  int iterations = 0;
};

/// Newton iteration on the drift (continuous) or on g - id (discrete) with a
/// forward-difference Jacobian (step 1e-6; differences taken in the simplex
/// tangent space on simplex domains). Stops at ||F|| <= 1e-10. Throws
/// ConvergenceError on iteration exhaustion or a near-singular Jacobian
/// (condition estimate > 1e12).
FixedPointResult find_fixed_point(const FlowMap& limit, Vec y_init, int max_iters = 100);

struct DetectOptions {
  double tau_min = 0.5;              // excludes the trivial tau = 0 minimum
  int cycle_samples = 256;           // M equal-time samples per cycle
  int max_map_period = 64;           // p_max for discrete cycles
  double fixed_point_diameter = 1e-6;
  double scan_accept = 1e-4;         // refined local-min value that counts as recurrence
  double closure_tol = 1e-6;
};

/// Runs the transient, then classifies the omega-limit behaviour of the
/// orbit: a fixed point (refined by Newton), a cycle (first recurrence time
/// refined by golden-section search, resampled at M equal time increments),
/// or unknown.
LimitSet detect_limit_set(const FlowMap& limit, Vec y0, double transient, double window,
                          const FlowConfig& cfg = {}, const DetectOptions& opts = {});

struct RecurrentSetEstimate {
  std::vector<LimitSet> sets;   // deduplicated (Hausdorff distance < 1e-4)
  std::vector<Vec> points;      // union of the kept sets' points
  int unknown_count = 0;
};

/// detect_limit_set plus a Newton solve from every start (unstable fixed
/// points are reachable only through Newton); merged and deduplicated.
RecurrentSetEstimate recurrent_set_estimate(const FlowMap& limit, const std::vector<Vec>& starts,
                                            double transient, double window,
                                            const FlowConfig& cfg = {},
                                            const DetectOptions& opts = {});

/// Hausdorff distance between finite point sets.
double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

}  // namespace mflab
