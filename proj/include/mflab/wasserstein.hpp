#pragma once

#include <cstdint>

#include "mflab/measure.hpp"
#include "mflab/rng.hpp"

namespace mflab {

struct W1Options {
  int resample_n = 512;     // equal-weight atoms after resampling (cap 2048)
  std::uint64_t seed = 0;   // stream for systematic resampling
};

inline constexpr int kW1ResampleCap = 2048;

/// Exact Wasserstein-1 distance in 1-D via the quantile coupling
/// (arbitrary weights).
double w1_quantile_1d(const PointCloudMeasure& mu, const PointCloudMeasure& nu);

/// Exact W1 between equal-weight clouds of equal size: minimum-cost perfect
/// matching on the Euclidean cost matrix (shortest-augmenting-path
/// assignment, O(n^3)).
double w1_assignment(const PointCloudMeasure& mu, const PointCloudMeasure& nu);

/// Permutation brute force; test oracle. Requires equal-weight clouds with
/// equal n <= 8.
double w1_bruteforce(const PointCloudMeasure& mu, const PointCloudMeasure& nu);

/// Systematic resampling to n equal-weight atoms. The caller supplies the
/// stream; one uniform is consumed.
PointCloudMeasure systematic_resample(const PointCloudMeasure& mu, int n, RngStream& rng);

/// W1 dispatch: exact single-atom transport when either side is a Dirac;
/// exact quantile coupling in 1-D; otherwise both sides are reduced by
/// systematic resampling to resample_n equal-weight atoms (a shared stream,
/// so identical measures resample identically and rho_0 = 0 exactly) and
/// matched exactly by assignment. Equal-weight clouds already of size
/// resample_n skip the (identity) resampling step.
double w1(const PointCloudMeasure& mu, const PointCloudMeasure& nu, const W1Options& opts = {});

/// Minimum-cost assignment on an n x n cost matrix (row-major); returns the
/// optimal total cost. Jonker-Volgenant style shortest augmenting paths.
double solve_assignment(const std::vector<double>& cost, int n);

}  // namespace mflab
