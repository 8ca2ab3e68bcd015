#include "mflab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mflab/wasserstein.hpp"

namespace mflab {

PointCloudMeasure::PointCloudMeasure(Domain domain, std::vector<Vec> points, Vec weights)
    : domain_(std::move(domain)) {
  if (points.empty()) throw ModelError("PointCloudMeasure: needs at least one atom");
  if (points.size() != weights.size())
    throw ModelError("PointCloudMeasure: points/weights size mismatch");
  n_ = points.size();
  d_ = domain_.dim();
  pts_.reserve(n_ * static_cast<std::size_t>(d_));
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    if (static_cast<int>(points[i].size()) != d_)
      throw ModelError("PointCloudMeasure: point dimension mismatch");
    if (!domain_.contains(points[i], 1e-9))
      throw ModelError("PointCloudMeasure: support point outside the domain");
    if (weights[i] < 0.0) throw ModelError("PointCloudMeasure: negative weight");
    total += weights[i];
    pts_.insert(pts_.end(), points[i].begin(), points[i].end());
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ModelError("PointCloudMeasure: weights sum to " + fmt_short(total) + ", not 1");
  w_ = std::move(weights);
}

PointCloudMeasure PointCloudMeasure::equal_weight(Domain domain, std::vector<Vec> points) {
  const double w = 1.0 / static_cast<double>(points.size());
  Vec weights(points.size(), w);
  return PointCloudMeasure(std::move(domain), std::move(points), std::move(weights));
}

bool PointCloudMeasure::equal_weights(double tol) const {
  const double w = 1.0 / static_cast<double>(n_);
  for (double v : w_)
    if (std::abs(v - w) > tol) return false;
  return true;
}

std::string PointCloudMeasure::to_csv() const {
  std::string out;
  for (int j = 0; j < d_; ++j) {
    out += "x" + std::to_string(j) + ",";
  }
  out += "weight\n";
  for (std::size_t i = 0; i < n_; ++i) {
    auto p = point(i);
    for (int j = 0; j < d_; ++j) {
      out += fmt_full(p[static_cast<std::size_t>(j)]);
      out += ',';
    }
    out += fmt_full(w_[i]);
    out += '\n';
  }
  return out;
}

void PointCloudMeasure::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << to_csv();
}

PointCloudMeasure PointCloudMeasure::from_csv(const Domain& domain, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("cloud csv: empty input");
  std::vector<Vec> points;
  Vec weights;
  const auto d = static_cast<std::size_t>(domain.dim());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    Vec vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != d + 1) throw Error("cloud csv: wrong column count");
    weights.push_back(vals.back());
    vals.pop_back();
    points.push_back(std::move(vals));
  }
  return PointCloudMeasure(domain, std::move(points), std::move(weights));
}

PointCloudMeasure PointCloudMeasure::read_csv(const Domain& domain, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open cloud csv: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv(domain, ss.str());
}

PointCloudMeasure dirac(const Domain& domain, Vec point) {
  std::vector<Vec> pts;
  pts.push_back(std::move(point));
  return PointCloudMeasure(domain, std::move(pts), Vec{1.0});
}

PointCloudMeasure cycle_measure(const Domain& domain, const LimitSet& cycle) {
  if (cycle.kind != LimitSet::Kind::cycle)
    throw ModelError("cycle_measure: limit set is not a cycle");
  return PointCloudMeasure::equal_weight(domain, cycle.cycle_points);
}

PointCloudMeasure pushforward(const PointCloudMeasure& mu, const FlowMap& limit, double t,
                              const FlowConfig& cfg) {
  std::vector<Vec> pts;
  pts.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.point(i);
    pts.push_back(flow(limit, Vec(p.begin(), p.end()), t, cfg));
  }
  return PointCloudMeasure(mu.domain(), std::move(pts), mu.weights());
}

std::vector<TestFunction> make_test_function_set(const Domain& domain) {
  std::vector<TestFunction> set;
  const int d = domain.dim();
  const Vec blo = domain.bounding_lo();
  const Vec bhi = domain.bounding_hi();
  Vec cmax(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    cmax[static_cast<std::size_t>(i)] = std::max(std::abs(blo[static_cast<std::size_t>(i)]),
                                                 std::abs(bhi[static_cast<std::size_t>(i)]));

  for (int i = 0; i < d; ++i) {
    set.push_back({"x" + std::to_string(i),
                   [i](std::span<const double> y) { return y[static_cast<std::size_t>(i)]; }, 1.0});
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      double lip = i == j ? 2.0 * cmax[static_cast<std::size_t>(i)]
                          : std::hypot(cmax[static_cast<std::size_t>(i)], cmax[static_cast<std::size_t>(j)]);
      set.push_back({"x" + std::to_string(i) + "*x" + std::to_string(j),
                     [i, j](std::span<const double> y) {
                       return y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
                     },
                     lip});
    }
  }

  // Gaussian bumps: centers on a 3-per-axis grid over the first min(d,2)
  // bounding-box axes (fractions 1/4, 1/2, 3/4), remaining axes at the
  // centroid of the bounding box.
  const double s = std::max(domain.diameter() / 4.0, 1e-12);
  const double lip_bump = std::sqrt(2.0) * std::exp(-0.5) / s;
  const int axes = std::min(d, 2);
  const double fractions[3] = {0.25, 0.5, 0.75};
  int n_centers = 1;
  for (int a = 0; a < axes; ++a) n_centers *= 3;
  for (int c = 0; c < n_centers; ++c) {
    Vec center(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
      center[static_cast<std::size_t>(i)] =
          0.5 * (blo[static_cast<std::size_t>(i)] + bhi[static_cast<std::size_t>(i)]);
    int rem = c;
    std::string label = "bump(";
    for (int a = 0; a < axes; ++a) {
      const double f = fractions[rem % 3];
      rem /= 3;
      center[static_cast<std::size_t>(a)] =
          blo[static_cast<std::size_t>(a)] +
          f * (bhi[static_cast<std::size_t>(a)] - blo[static_cast<std::size_t>(a)]);
    }
    for (int i = 0; i < d; ++i) {
      if (i) label += ';';  // keep CSV cells comma-free
      label += fmt_short(center[static_cast<std::size_t>(i)]);
    }
    label += ')';
    const double inv_s2 = 1.0 / (s * s);
    set.push_back({label,
                   [center, inv_s2](std::span<const double> y) {
                     double q = 0.0;
                     for (std::size_t i = 0; i < center.size(); ++i) q += sq(y[i] - center[i]);
                     return std::exp(-q * inv_s2);
                   },
                   lip_bump});
  }
  return set;
}

double invariance_residual(const PointCloudMeasure& mu, const FlowMap& limit, double t,
                           const FlowConfig& cfg, const W1Options& w1opts) {
  if (t < 0.0) throw ModelError("invariance_residual: t must be >= 0");
  if (t == 0.0) return 0.0;  // pushforward at 0 is the identity
  PointCloudMeasure pushed = pushforward(mu, limit, t, cfg);
  return w1(pushed, mu, w1opts);
}

double test_function_gap(const PointCloudMeasure& mu, const FlowMap& limit, double t,
                         const std::vector<TestFunction>& h_set, const FlowConfig& cfg) {
  if (t < 0.0) throw ModelError("test_function_gap: t must be >= 0");
  if (t == 0.0) return 0.0;
  PointCloudMeasure pushed = pushforward(mu, limit, t, cfg);
  double worst = 0.0;
  for (const TestFunction& h : h_set) {
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      before += mu.weight(i) * h.fn(mu.point(i));
      after += pushed.weight(i) * h.fn(pushed.point(i));
    }
    worst = std::max(worst, std::abs(after - before));
  }
  return worst;
}

std::pair<double, double> support_distance(const PointCloudMeasure& mu,
                                           const std::vector<Vec>& points) {
  if (points.empty()) throw ModelError("support_distance: point set must be nonempty");
  double mean = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vec& q : points) nearest = std::min(nearest, dist2(mu.point(i), q));
    mean += mu.weight(i) * nearest;
    worst = std::max(worst, nearest);
  }
  return {mean, worst};
}

}  // namespace mflab
