#include "mflab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

namespace mflab {

GridPoint round_to_grid(const Domain& domain, long long N, std::span<const double> y) {
  if (N < 1) throw ModelError("round_to_grid: N must be positive");
  if (static_cast<int>(y.size()) != domain.dim()) throw ModelError("round_to_grid: dim mismatch");
  const int d = domain.dim();
  std::vector<long long> k(static_cast<std::size_t>(d));

  if (domain.kind() == DomainKind::box) {
    auto kmax = box_grid_max(domain, N);
    for (int i = 0; i < d; ++i) {
      const double v = (y[static_cast<std::size_t>(i)] - domain.lo()[static_cast<std::size_t>(i)]) *
                       static_cast<double>(N);
      // nearest lattice point, ties toward lo
      auto ki = static_cast<long long>(std::ceil(v - 0.5));
      ki = std::clamp(ki, 0LL, kmax[static_cast<std::size_t>(i)]);
      k[static_cast<std::size_t>(i)] = ki;
    }
    return GridPoint(domain, N, std::move(k));
  }

  // largest-remainder rounding of N*y
  std::vector<double> remainder(static_cast<std::size_t>(d));
  long long assigned = 0;
  for (int i = 0; i < d; ++i) {
    const double v = std::max(0.0, y[static_cast<std::size_t>(i)]) * static_cast<double>(N);
    auto f = static_cast<long long>(std::floor(v));
    k[static_cast<std::size_t>(i)] = f;
    remainder[static_cast<std::size_t>(i)] = v - static_cast<double>(f);
    assigned += f;
  }
  long long deficit = N - assigned;
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
  });  // stable: remainder ties resolve to the lowest index
  int pos = 0;
  while (deficit > 0) {
    ++k[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
    --deficit;
    pos = (pos + 1) % d;
  }
  // Degenerate overshoot (y barely above the simplex): take back from the
  // smallest remainders.
  pos = d - 1;
  while (deficit < 0) {
    auto& ki = k[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
    if (ki > 0) {
      --ki;
      ++deficit;
    }
    pos = pos == 0 ? d - 1 : pos - 1;
  }
  return GridPoint(domain, N, std::move(k));
}

namespace {

bool move_stays_on_grid(const Domain& dom, const std::vector<long long>& k,
                        const std::vector<long long>& delta,
                        const std::vector<long long>& kmax, long long coord_sum, long long N,
                        long long delta_sum) {
  if (dom.kind() == DomainKind::box) {
    for (std::size_t i = 0; i < k.size(); ++i) {
      const long long v = k[i] + delta[i];
      if (v < 0 || v > kmax[i]) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k[i] + delta[i] < 0) return false;
  return coord_sum + delta_sum == N;
}

}  // namespace

CtRunResult simulate_ct(const CtModel& model, long long N, const GridPoint& y0, double horizon,
                        RngStream& rng, const std::vector<double>& sample_times,
                        long long max_events) {
  if (horizon < 0.0) throw ModelError("simulate_ct: horizon must be >= 0");
  if (y0.N != N || !(y0.domain == model.domain()))
    throw ModelError("simulate_ct: initial point is not on this model's N-grid");
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (sample_times[i] < sample_times[i - 1])
      throw ModelError("simulate_ct: sample times must be ascending");

  const Domain& dom = model.domain();
  const auto n_jumps = model.jumps().size();
  const auto kmax = dom.kind() == DomainKind::box ? box_grid_max(dom, N) : std::vector<long long>{};
  std::vector<long long> delta_sums(n_jumps, 0);
  for (std::size_t j = 0; j < n_jumps; ++j)
    for (long long l : model.jumps()[j].delta) delta_sums[j] += l;

  CtRunResult out{y0, 0, 0, false, {}};
  std::vector<long long> k = y0.coords;
  long long coord_sum = std::accumulate(k.begin(), k.end(), 0LL);
  Vec y(k.size());
  Vec propensity(n_jumps);
  double time = 0.0;
  std::size_t si = 0;
  const double scale = static_cast<double>(N);

  auto record_until = [&](double up_to) {
    while (si < sample_times.size() && sample_times[si] <= up_to) {
      out.samples.emplace_back(dom, N, k);
      ++si;
    }
  };

  for (;;) {
    if (max_events >= 0 && out.events >= max_events) break;
    for (std::size_t i = 0; i < k.size(); ++i)
      y[i] = dom.kind() == DomainKind::box ? dom.lo()[i] + static_cast<double>(k[i]) / scale
                                           : static_cast<double>(k[i]) / scale;
    double total = 0.0;
    for (std::size_t j = 0; j < n_jumps; ++j) {
      double r = model.jumps()[j].rate.eval(y);
      if (r <= 0.0) {
        propensity[j] = 0.0;
        continue;
      }
      if (!move_stays_on_grid(dom, k, model.jumps()[j].delta, kmax, coord_sum, N, delta_sums[j])) {
        propensity[j] = 0.0;
        ++out.truncations;
        continue;
      }
      propensity[j] = scale * r;
      total += propensity[j];
    }
    if (total <= 0.0) {
      out.frozen = true;
      break;
    }
    const double wait = rng.exponential(total);
    const double t_next = time + wait;
    record_until(std::min(t_next, horizon));
    if (t_next > horizon) {
      time = horizon;
      break;
    }
    double pick = rng.uniform() * total;
    std::size_t chosen = n_jumps - 1;
    for (std::size_t j = 0; j < n_jumps; ++j) {
      pick -= propensity[j];
      if (pick <= 0.0) {
        chosen = j;
        break;
      }
    }
    const auto& delta = model.jumps()[chosen].delta;
    for (std::size_t i = 0; i < k.size(); ++i) k[i] += delta[i];
    coord_sum += delta_sums[chosen];
    ++out.events;
    time = t_next;
  }
  record_until(horizon);
  out.state = GridPoint(dom, N, std::move(k));
  return out;
}

DtRunResult simulate_dt(const DtModel& model, long long N, const GridPoint& m0, long long steps,
                        RngStream& rng, const std::vector<long long>& sample_steps) {
  if (steps < 0) throw ModelError("simulate_dt: steps must be >= 0");
  if (m0.N != N || !(m0.domain == model.domain()))
    throw ModelError("simulate_dt: initial point is not on this model's N-grid");
  const Domain& dom = model.domain();
  const int d = dom.dim();

  DtRunResult out{m0, 0, {}};
  std::vector<long long> counts = m0.coords;
  std::vector<long long> next(static_cast<std::size_t>(d));
  Vec m(static_cast<std::size_t>(d));
  Vec row, cdf(static_cast<std::size_t>(d));
  std::size_t si = 0;

  auto record = [&](long long step) {
    while (si < sample_steps.size() && sample_steps[si] <= step) {
      if (sample_steps[si] == step) out.samples.emplace_back(dom, N, counts);
      ++si;
    }
  };
  record(0);

  for (long long s = 1; s <= steps; ++s) {
    for (int i = 0; i < d; ++i)
      m[static_cast<std::size_t>(i)] =
          static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(N);
    std::fill(next.begin(), next.end(), 0LL);
    for (int i = 0; i < d; ++i) {
      const long long c = counts[static_cast<std::size_t>(i)];
      if (c == 0) continue;
      model.kernel_row(i, m, row);
      double total = 0.0;
      for (int j = 0; j < d; ++j) {
        double p = std::max(0.0, row[static_cast<std::size_t>(j)]);
        total += p;
        cdf[static_cast<std::size_t>(j)] = total;
      }
      if (total <= 0.0) {  // defensive: keep the objects in place
        next[static_cast<std::size_t>(i)] += c;
        continue;
      }
      for (long long obj = 0; obj < c; ++obj) {
        const double u = rng.uniform() * total;
        int dest = d - 1;
        for (int j = 0; j < d; ++j) {
          if (u <= cdf[static_cast<std::size_t>(j)]) {
            dest = j;
            break;
          }
        }
        ++next[static_cast<std::size_t>(dest)];
      }
    }
    counts = next;
    out.steps = s;
    record(s);
  }
  out.state = GridPoint(dom, N, std::move(counts));
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto workers = static_cast<std::size_t>(std::min<long long>(threads, static_cast<long long>(n)));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

MarginalEstimate marginal_moments(const Model& model, long long N, std::span<const double> y0,
                                  double t, const std::vector<TestFunction>& h_set, int replicas,
                                  const RngSpec& rng, int threads) {
  if (replicas < 2) throw ModelError("marginal_moments: replicas must be >= 2");
  const Domain& dom = model_domain(model);
  GridPoint start = round_to_grid(dom, N, y0);

  long long dt_steps = 0;
  if (std::holds_alternative<DtModel>(model)) {
    dt_steps = static_cast<long long>(std::llround(t));
    if (std::abs(t - static_cast<double>(dt_steps)) > 1e-9)
      throw ModelError("marginal_moments: discrete models require integer t");
  }

  std::vector<Vec> endpoints(static_cast<std::size_t>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
    RngStream stream = rng.stream(r);
    if (const auto* ct = std::get_if<CtModel>(&model)) {
      CtRunResult res = simulate_ct(*ct, N, start, t, stream);
      endpoints[r] = res.state.embed();
    } else {
      DtRunResult res = simulate_dt(std::get<DtModel>(model), N, start, dt_steps, stream);
      endpoints[r] = res.state.embed();
    }
  });

  MarginalEstimate est;
  est.replicas = replicas;
  for (const TestFunction& h : h_set) {
    Vec vals(static_cast<std::size_t>(replicas));
    for (std::size_t r = 0; r < vals.size(); ++r) vals[r] = h.fn(endpoints[r]);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(replicas);
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    double var = 0.0;
    if (*lo != *hi) {  // identical values (e.g. t = 0) have exactly zero spread
      for (double v : vals) var += sq(v - mean);
      var /= static_cast<double>(replicas - 1);
    }
    est.names.push_back(h.name);
    est.mean.push_back(mean);
    est.variance.push_back(var);
    est.ci_half.push_back(1.96 * std::sqrt(var / static_cast<double>(replicas)));
    est.values.push_back(std::move(vals));
  }
  return est;
}

StationaryEstimate stationary_sample(const Model& model, long long N,
                                     const StationaryOptions& opts, const RngSpec& rng) {
  if (opts.n_samples < 2) throw ModelError("stationary_sample: n_samples must be >= 2");
  if (opts.spacing <= 0.0) throw ModelError("stationary_sample: spacing must be positive");
  const Domain& dom = model_domain(model);
  GridPoint start = round_to_grid(dom, N, dom.centroid());
  RngStream chain = rng.stream(0);

  std::vector<GridPoint> samples;
  long long truncations = 0;
  bool frozen = false;
  double total_time = 0.0;
  long long total_steps = 0;

  if (const auto* ct = std::get_if<CtModel>(&model)) {
    std::vector<double> times(static_cast<std::size_t>(opts.n_samples));
    for (int i = 0; i < opts.n_samples; ++i)
      times[static_cast<std::size_t>(i)] = opts.burn_in + static_cast<double>(i + 1) * opts.spacing;
    const double horizon = times.back();
    CtRunResult res = simulate_ct(*ct, N, start, horizon, chain, times);
    samples = std::move(res.samples);
    truncations = res.truncations;
    frozen = res.frozen;
    total_time = horizon;
  } else {
    const auto& dt = std::get<DtModel>(model);
    auto burn = static_cast<long long>(std::llround(opts.burn_in));
    auto spacing = static_cast<long long>(std::llround(opts.spacing));
    if (std::abs(opts.burn_in - static_cast<double>(burn)) > 1e-9 ||
        std::abs(opts.spacing - static_cast<double>(spacing)) > 1e-9)
      throw ModelError("stationary_sample: discrete chains need integer burn_in and spacing");
    if (spacing < 1) throw ModelError("stationary_sample: discrete spacing must be >= 1 step");
    std::vector<long long> steps(static_cast<std::size_t>(opts.n_samples));
    for (int i = 0; i < opts.n_samples; ++i)
      steps[static_cast<std::size_t>(i)] = burn + static_cast<long long>(i + 1) * spacing;
    DtRunResult res = simulate_dt(dt, N, start, steps.back(), chain, steps);
    samples = std::move(res.samples);
    total_steps = steps.back();
  }

  std::vector<Vec> pts;
  pts.reserve(samples.size());
  for (const GridPoint& g : samples) pts.push_back(g.embed());
  PointCloudMeasure cloud = PointCloudMeasure::equal_weight(dom, std::move(pts));

  const std::size_t half = cloud.size() / 2;
  std::vector<Vec> first, second;
  for (std::size_t i = 0; i < half; ++i) first.emplace_back(cloud.point(i).begin(), cloud.point(i).end());
  for (std::size_t i = half; i < cloud.size(); ++i)
    second.emplace_back(cloud.point(i).begin(), cloud.point(i).end());
  W1Options w1opts = opts.w1;
  w1opts.seed = mix_seed(rng.seed, 0x5b117ull);
  const double split = w1(PointCloudMeasure::equal_weight(dom, std::move(first)),
                          PointCloudMeasure::equal_weight(dom, std::move(second)), w1opts);

  StationaryEstimate est{std::move(cloud), split, split > opts.flag_threshold,
                         truncations, frozen, total_time, total_steps};
  return est;
}

}  // namespace mflab
