#include "mflab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mflab {

double w1_quantile_1d(const PointCloudMeasure& mu, const PointCloudMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw ModelError("w1_quantile_1d: measures must be 1-D");
  auto gather = [](const PointCloudMeasure& m) {
    std::vector<std::pair<double, double>> a(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) a[i] = {m.point(i)[0], m.weight(i)};
    std::sort(a.begin(), a.end());
    return a;
  };
  auto a = gather(mu), b = gather(nu);
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double x_prev = 0.0;
  bool have_prev = false;
  while (i < a.size() || j < b.size()) {
    double x;
    if (i < a.size() && (j >= b.size() || a[i].first <= b[j].first))
      x = a[i].first;
    else
      x = b[j].first;
    if (have_prev) total += std::abs(fa - fb) * (x - x_prev);
    while (i < a.size() && a[i].first == x) fa += a[i++].second;
    while (j < b.size() && b[j].first == x) fb += b[j++].second;
    x_prev = x;
    have_prev = true;
  }
  return total;
}

// Hungarian algorithm with potentials (shortest augmenting paths), exact
// minimum-cost perfect matching in O(n^3).
double solve_assignment(const std::vector<double>& cost, int n) {
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur =
            cost[static_cast<std::size_t>(i0 - 1) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j - 1)] -
            u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    total += cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1) *
                      static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(j - 1)];
  return total;
}

namespace {

std::vector<double> cost_matrix(const PointCloudMeasure& mu, const PointCloudMeasure& nu) {
  const auto n = mu.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = dist2(mu.point(i), nu.point(j));
  return cost;
}

}  // namespace

double w1_assignment(const PointCloudMeasure& mu, const PointCloudMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ModelError("w1_assignment: dimension mismatch");
  if (mu.size() != nu.size()) throw ModelError("w1_assignment: clouds must have equal size");
  if (!mu.equal_weights() || !nu.equal_weights())
    throw ModelError("w1_assignment: clouds must be equal-weight");
  const int n = static_cast<int>(mu.size());
  return solve_assignment(cost_matrix(mu, nu), n) / static_cast<double>(n);
}

double w1_bruteforce(const PointCloudMeasure& mu, const PointCloudMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ModelError("w1_bruteforce: dimension mismatch");
  if (mu.size() != nu.size() || mu.size() > 8)
    throw ModelError("w1_bruteforce: requires equal clouds with n <= 8");
  if (!mu.equal_weights() || !nu.equal_weights())
    throw ModelError("w1_bruteforce: clouds must be equal-weight");
  const std::size_t n = mu.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += dist2(mu.point(i), nu.point(perm[i]));
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

PointCloudMeasure systematic_resample(const PointCloudMeasure& mu, int n, RngStream& rng) {
  if (n < 1) throw ModelError("systematic_resample: n must be positive");
  const double u0 = rng.uniform() / static_cast<double>(n);
  std::vector<Vec> picked;
  picked.reserve(static_cast<std::size_t>(n));
  double cum = mu.weight(0);
  std::size_t idx = 0;
  for (int k = 0; k < n; ++k) {
    const double pos = u0 + static_cast<double>(k) / static_cast<double>(n);
    while (pos > cum && idx + 1 < mu.size()) cum += mu.weight(++idx);
    auto p = mu.point(idx);
    picked.emplace_back(p.begin(), p.end());
  }
  return PointCloudMeasure::equal_weight(mu.domain(), std::move(picked));
}

double w1(const PointCloudMeasure& mu, const PointCloudMeasure& nu, const W1Options& opts) {
  if (mu.dim() != nu.dim()) throw ModelError("w1: dimension mismatch");
  if (opts.resample_n > kW1ResampleCap)
    throw ModelError("w1: resample_n exceeds the cap of " + std::to_string(kW1ResampleCap));

  // Single-atom transport is exact in any dimension: everything moves to
  // the lone atom.
  if (nu.size() == 1) {
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) total += mu.weight(i) * dist2(mu.point(i), nu.point(0));
    return total;
  }
  if (mu.size() == 1) return w1(nu, mu, opts);

  if (mu.dim() == 1) return w1_quantile_1d(mu, nu);

  // Equal-weight clouds already at resample_n: systematic resampling is the
  // identity on them, so match directly.
  if (mu.size() == nu.size() && mu.size() == static_cast<std::size_t>(opts.resample_n) &&
      mu.equal_weights() && nu.equal_weights())
    return w1_assignment(mu, nu);

  // Shared stream state: both resamples draw the same systematic offset, so
  // identical measures reduce to identical clouds and rho_0 stays 0 exactly.
  RngStream base(mix_seed(opts.seed, 0x77315e5aull));
  RngStream s1 = base, s2 = base;
  PointCloudMeasure a = systematic_resample(mu, opts.resample_n, s1);
  PointCloudMeasure b = systematic_resample(nu, opts.resample_n, s2);
  return w1_assignment(a, b);
}

}  // namespace mflab
