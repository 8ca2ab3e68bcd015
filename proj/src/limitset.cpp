#include "mflab/limitset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mflab {

std::vector<Vec> LimitSet::points() const {
  if (kind == Kind::fixed_point) return {fixed_point};
  if (kind == Kind::cycle) return cycle_points;
  return {};
}

namespace {

// Orthonormal basis of the simplex tangent space {sum = 0} via Gram-Schmidt
// on {e_i - e_{d-1}}.
std::vector<Vec> simplex_tangent_basis(int d) {
  std::vector<Vec> basis;
  for (int i = 0; i < d - 1; ++i) {
    Vec v(static_cast<std::size_t>(d), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    v[static_cast<std::size_t>(d - 1)] = -1.0;
    for (const Vec& b : basis) {
      double proj = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) proj += v[k] * b[k];
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= proj * b[k];
    }
    double n = norm2(v);
    for (double& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Gauss-Jordan inverse; returns false if a pivot collapses.
bool invert(std::vector<Vec>& a) {
  const std::size_t n = a.size();
  std::vector<Vec> inv(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return false;
    std::swap(a[piv], a[c]);
    std::swap(inv[piv], inv[c]);
    const double p = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= p;
      inv[c][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  a = std::move(inv);
  return true;
}

double inf_norm(const std::vector<Vec>& a) {
  double best = 0.0;
  for (const Vec& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

struct GoldenResult {
  double x;
  double value;
};

// Golden-section minimization on [a, b] down to interval width x_tol.
template <typename F>
GoldenResult golden_section_min(F&& f, double a, double b, double x_tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

}  // namespace

FixedPointResult find_fixed_point(const FlowMap& limit, Vec y_init, int max_iters) {
  const Domain& dom = limit.domain();
  const int d = dom.dim();
  if (static_cast<int>(y_init.size()) != d) throw ModelError("find_fixed_point: dim mismatch");

  const bool discrete = limit.kind() == FlowMap::Kind::discrete;
  auto residual_fn = [&](std::span<const double> y) {
    Vec f = limit(y);
    if (discrete)
      for (std::size_t i = 0; i < f.size(); ++i) f[i] -= y[i];
    return f;
  };

  std::vector<Vec> basis;
  if (dom.kind() == DomainKind::simplex) {
    basis = simplex_tangent_basis(d);
  } else {
    for (int i = 0; i < d; ++i) {
      Vec e(static_cast<std::size_t>(d), 0.0);
      e[static_cast<std::size_t>(i)] = 1.0;
      basis.push_back(std::move(e));
    }
  }
  const std::size_t n = basis.size();
  const double fd_step = 1e-6;
  const double divergence_radius = 100.0 * std::max(1.0, dom.diameter());
  const Vec origin = y_init;

  Vec y = std::move(y_init);
  for (int iter = 0; iter <= max_iters; ++iter) {
    Vec f = residual_fn(y);
    double res = norm2(f);
    if (res <= 1e-10) return {y, res, iter};
    if (iter == max_iters) break;
    if (dist2(y, origin) > divergence_radius)
      throw ConvergenceError("find_fixed_point: iteration diverged");

    // G(z) = B^T F(y + B z); forward differences along the basis directions.
    Vec g(n);
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += basis[r][static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
      g[r] = s;
    }
    std::vector<Vec> jac(n, Vec(n, 0.0));
    for (std::size_t c = 0; c < n; ++c) {
      Vec yp = y;
      for (int i = 0; i < d; ++i) yp[static_cast<std::size_t>(i)] += fd_step * basis[c][static_cast<std::size_t>(i)];
      Vec fp = residual_fn(yp);
      for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
          s += basis[r][static_cast<std::size_t>(i)] * (fp[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(i)]);
        jac[r][c] = s / fd_step;
      }
    }
    const double jac_norm = inf_norm(jac);
    std::vector<Vec> jac_inv = jac;
    if (!invert(jac_inv) || jac_norm * inf_norm(jac_inv) > 1e12)
      throw ConvergenceError("find_fixed_point: singular Jacobian (condition estimate > 1e12)");

    Vec step(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) step[r] -= jac_inv[r][c] * g[c];
    for (std::size_t r = 0; r < n; ++r)
      for (int i = 0; i < d; ++i)
        y[static_cast<std::size_t>(i)] += step[r] * basis[r][static_cast<std::size_t>(i)];
  }
  throw ConvergenceError("find_fixed_point: no convergence within max_iters");
}

namespace {

LimitSet refine_fixed_point(const FlowMap& limit, const Vec& near, const DetectOptions&) {
  LimitSet ls;
  try {
    FixedPointResult fp = find_fixed_point(limit, near);
    ls.kind = LimitSet::Kind::fixed_point;
    ls.fixed_point = fp.point;
    ls.residual = fp.residual;
  } catch (const ConvergenceError&) {
    ls.kind = LimitSet::Kind::unknown;
    ls.closure_error = std::numeric_limits<double>::infinity();
  }
  return ls;
}

LimitSet detect_discrete(const FlowMap& limit, Vec x, double window, const FlowConfig& cfg,
                         const DetectOptions& opts) {
  auto wsteps = std::max<long long>(static_cast<long long>(std::llround(window)),
                                    2LL * opts.max_map_period);
  std::vector<Vec> orbit;
  orbit.push_back(x);
  Vec y = x;
  Vec bb_lo = x, bb_hi = x;
  for (long long s = 0; s < wsteps; ++s) {
    y = flow(limit, y, 1.0, cfg);
    orbit.push_back(y);
    for (std::size_t i = 0; i < y.size(); ++i) {
      bb_lo[i] = std::min(bb_lo[i], y[i]);
      bb_hi[i] = std::max(bb_hi[i], y[i]);
    }
  }
  if (dist2(bb_lo, bb_hi) < opts.fixed_point_diameter) return refine_fixed_point(limit, x, opts);

  LimitSet ls;
  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= opts.max_map_period && p < static_cast<int>(orbit.size()); ++p) {
    const double err = dist2(orbit[static_cast<std::size_t>(p)], x);
    best = std::min(best, err);
    if (err <= 1e-9) {
      ls.kind = LimitSet::Kind::cycle;
      ls.cycle_points.assign(orbit.begin(), orbit.begin() + p);
      ls.period = static_cast<double>(p);
      ls.closure_error = err;
      return ls;
    }
  }
  ls.kind = LimitSet::Kind::unknown;
  ls.closure_error = best;
  return ls;
}

LimitSet detect_continuous(const FlowMap& limit, Vec x, double window, const FlowConfig& cfg,
                           const DetectOptions& opts) {
  // March through the window recording the distance back to the anchor.
  auto nsteps = static_cast<long long>(std::ceil(window / cfg.dt));
  std::vector<double> r(static_cast<std::size_t>(nsteps) + 1);
  std::vector<double> tau(static_cast<std::size_t>(nsteps) + 1);
  Vec y = x;
  Vec bb_lo = x, bb_hi = x;
  r[0] = 0.0;
  tau[0] = 0.0;
  for (long long s = 1; s <= nsteps; ++s) {
    double target = std::min(static_cast<double>(s) * cfg.dt, window);
    y = flow(limit, y, target - tau[static_cast<std::size_t>(s - 1)], cfg);
    tau[static_cast<std::size_t>(s)] = target;
    r[static_cast<std::size_t>(s)] = dist2(y, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
      bb_lo[i] = std::min(bb_lo[i], y[i]);
      bb_hi[i] = std::max(bb_hi[i], y[i]);
    }
  }
  if (dist2(bb_lo, bb_hi) < opts.fixed_point_diameter) return refine_fixed_point(limit, x, opts);

  auto closure_at = [&](double t) { return dist2(flow(limit, x, t, cfg), x); };

  LimitSet ls;
  double best = std::numeric_limits<double>::infinity();
  for (long long s = 1; s + 1 <= nsteps; ++s) {
    auto i = static_cast<std::size_t>(s);
    if (tau[i] < opts.tau_min) continue;
    if (!(r[i] <= r[i - 1] && r[i] <= r[i + 1])) continue;
    // Grid samples rarely dip below the acceptance threshold at step
    // resolution, so refine the bracket first and test the refined minimum.
    GoldenResult g = golden_section_min(closure_at, tau[i - 1], tau[i + 1], 1e-10);
    best = std::min(best, g.value);
    if (g.value > opts.scan_accept) continue;
    const double period = g.x;
    const double closure = g.value;
    if (closure > opts.closure_tol) continue;

    ls.kind = LimitSet::Kind::cycle;
    ls.period = period;
    ls.closure_error = closure;
    const int M = opts.cycle_samples;
    ls.cycle_points.reserve(static_cast<std::size_t>(M));
    Vec p = x;
    const double seg = period / static_cast<double>(M);
    for (int j = 0; j < M; ++j) {
      ls.cycle_points.push_back(p);
      p = flow(limit, p, seg, cfg);
    }
    // sanity: equal-time samples of a genuine cycle are pairwise distinct
    for (std::size_t a = 0; a < ls.cycle_points.size(); ++a)
      for (std::size_t b = a + 1; b < ls.cycle_points.size(); ++b)
        if (dist2(ls.cycle_points[a], ls.cycle_points[b]) <= 1e-8) {
          ls.kind = LimitSet::Kind::unknown;
          ls.cycle_points.clear();
          ls.closure_error = best;
          return ls;
        }
    return ls;
  }
  ls.kind = LimitSet::Kind::unknown;
  ls.closure_error = best;
  return ls;
}

}  // namespace

LimitSet detect_limit_set(const FlowMap& limit, Vec y0, double transient, double window,
                          const FlowConfig& cfg, const DetectOptions& opts) {
  if (transient <= 0.0 || window <= 0.0)
    throw ModelError("detect_limit_set: transient and window must be positive");
  if (limit.kind() == FlowMap::Kind::discrete) {
    Vec x = flow(limit, std::move(y0), std::round(transient), cfg);
    return detect_discrete(limit, std::move(x), window, cfg, opts);
  }
  Vec x = flow(limit, std::move(y0), transient, cfg);
  return detect_continuous(limit, std::move(x), window, cfg, opts);
}

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  auto directed = [](const std::vector<Vec>& from, const std::vector<Vec>& to) {
    double worst = 0.0;
    for (const Vec& p : from) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const Vec& q : to) nearest = std::min(nearest, dist2(p, q));
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed(a, b), directed(b, a));
}

RecurrentSetEstimate recurrent_set_estimate(const FlowMap& limit, const std::vector<Vec>& starts,
                                            double transient, double window, const FlowConfig& cfg,
                                            const DetectOptions& opts) {
  if (starts.empty()) throw ModelError("recurrent_set_estimate: starts must be nonempty");
  RecurrentSetEstimate out;
  std::vector<LimitSet> found;
  for (const Vec& s : starts) {
    LimitSet ls = detect_limit_set(limit, s, transient, window, cfg, opts);
    if (ls.kind == LimitSet::Kind::unknown)
      ++out.unknown_count;
    else
      found.push_back(std::move(ls));
  }
  for (const Vec& s : starts) {
    try {
      FixedPointResult fp = find_fixed_point(limit, s);
      if (!limit.domain().contains(fp.point, 1e-9)) continue;
      LimitSet ls;
      ls.kind = LimitSet::Kind::fixed_point;
      ls.fixed_point = fp.point;
      ls.residual = fp.residual;
      found.push_back(std::move(ls));
    } catch (const ConvergenceError&) {
      // Newton legitimately fails from some starts; nothing to record.
    }
  }
  for (LimitSet& ls : found) {
    bool duplicate = false;
    for (const LimitSet& kept : out.sets)
      if (hausdorff_distance(ls.points(), kept.points()) < 1e-4) duplicate = true;
    if (!duplicate) out.sets.push_back(std::move(ls));
  }
  for (const LimitSet& ls : out.sets)
    for (const Vec& p : ls.points()) out.points.push_back(p);
  return out;
}

}  // namespace mflab
