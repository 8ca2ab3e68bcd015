#pragma once

#include "mflab/measure.hpp"
#include "mflab/model.hpp"
#include "mflab/rng.hpp"
#include "mflab/wasserstein.hpp"

namespace mflab {

/// Nearest lattice point of E^N. Box: componentwise nearest (ties toward
/// lo). Simplex: largest-remainder rounding of N*y (remainder ties go to the
/// lowest index). The result is within d/N of y in l1.
GridPoint round_to_grid(const Domain& domain, long long N, std::span<const double> y);

struct CtRunResult {
  GridPoint state;                 // state at the horizon
  long long events = 0;            // jumps applied
  long long truncations = 0;       // positive-rate jumps censored at the boundary
  bool frozen = false;             // total propensity hit 0 before the horizon
  std::vector<GridPoint> samples;  // states at the requested sample times
};

/// Exact SSA for the N-object chain: propensity of jump k at state y is
/// N * rate_k(y), zeroed when y + l_k/N would leave the domain (counted as a
/// truncation opportunity when the rate was positive). `sample_times` must
/// be ascending; `max_events`, when >= 0, stops the run after that many
/// jumps (test hook).
CtRunResult simulate_ct(const CtModel& model, long long N, const GridPoint& y0, double horizon,
                        RngStream& rng, const std::vector<double>& sample_times = {},
                        long long max_events = -1);

struct DtRunResult {
  GridPoint state;
  long long steps = 0;
  std::vector<GridPoint> samples;
};

/// Synchronous multinomial update: every object in state i picks a
/// destination from K_i.(m) evaluated at the step-start occupancy.
DtRunResult simulate_dt(const DtModel& model, long long N, const GridPoint& m0, long long steps,
                        RngStream& rng, const std::vector<long long>& sample_steps = {});

struct MarginalEstimate {
  std::vector<std::string> names;       // one per test function
  Vec mean, variance, ci_half;          // ci_half = 1.96 * sqrt(variance / replicas)
  int replicas = 0;
  std::vector<Vec> values;              // values[h][replica], kept for trend statistics
};

/// Estimates E[h(Y^N(t)) | Y^N(0) = round_to_grid(y0)] over independent
/// replicas. Replica r runs on rng.stream(r); the reduction is a
/// deterministic fold in replica order regardless of thread count.
MarginalEstimate marginal_moments(const Model& model, long long N, std::span<const double> y0,
                                  double t, const std::vector<TestFunction>& h_set, int replicas,
                                  const RngSpec& rng, int threads = 1);

struct StationaryOptions {
  double burn_in = 200.0;   // time units (ct) or steps (dt)
  int n_samples = 1000;
  double spacing = 1.0;     // time units (ct) or steps (dt)
  double flag_threshold = 0.1;  // split-half W1 above this flags the estimate
  W1Options w1;
};

struct StationaryEstimate {
  PointCloudMeasure cloud;    // equal-weight samples after burn-in
  double split_half_w1 = 0.0; // W1 between the first and second half
  bool flagged = false;
  long long truncations = 0;
  bool frozen = false;
  double total_time = 0.0;    // ct
  long long total_steps = 0;  // dt
};

/// Long-run time sampling of the chain started from the domain centroid
/// (rounded to the grid): empirical proxy for the invariant probability of
/// the ergodic zoo chains.
StationaryEstimate stationary_sample(const Model& model, long long N, const StationaryOptions& opts,
                                     const RngSpec& rng);

/// Runs fn(0..n-1) on up to `threads` workers; results must be written to
/// per-index slots so the outcome is order-independent.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace mflab
