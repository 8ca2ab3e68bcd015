#include "mflab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mflab {

Domain Domain::box(Vec lo, Vec hi) {
  if (lo.empty() || lo.size() != hi.size()) throw ModelError("box: lo/hi size mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw ModelError("box: requires lo[i] < hi[i]");
  Domain d;
  d.kind_ = DomainKind::box;
  d.dim_ = static_cast<int>(lo.size());
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

Domain Domain::simplex(int dim) {
  if (dim < 1) throw ModelError("simplex: dim must be positive");
  Domain d;
  d.kind_ = DomainKind::simplex;
  d.dim_ = dim;
  return d;
}

bool Domain::contains(std::span<const double> y, double tol) const {
  if (static_cast<int>(y.size()) != dim_) return false;
  if (kind_ == DomainKind::box) {
    for (int i = 0; i < dim_; ++i)
      if (y[i] < lo_[i] - tol || y[i] > hi_[i] + tol) return false;
    return true;
  }
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    if (y[i] < -tol) return false;
    s += y[i];
  }
  return std::abs(s - 1.0) <= std::max(tol, 1e-12);
}

double Domain::diameter() const {
  if (kind_ == DomainKind::box) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += sq(hi_[i] - lo_[i]);
    return std::sqrt(s);
  }
  return dim_ > 1 ? std::sqrt(2.0) : 0.0;  // vertex-to-vertex distance
}

Vec Domain::centroid() const {
  Vec c(static_cast<std::size_t>(dim_));
  if (kind_ == DomainKind::box) {
    for (int i = 0; i < dim_; ++i) c[i] = 0.5 * (lo_[i] + hi_[i]);
  } else {
    std::fill(c.begin(), c.end(), 1.0 / dim_);
  }
  return c;
}

Vec Domain::bounding_lo() const {
  if (kind_ == DomainKind::box) return lo_;
  return Vec(static_cast<std::size_t>(dim_), 0.0);
}

Vec Domain::bounding_hi() const {
  if (kind_ == DomainKind::box) return hi_;
  return Vec(static_cast<std::size_t>(dim_), 1.0);
}

Vec Domain::sample_uniform(RngStream& rng) const {
  Vec y(static_cast<std::size_t>(dim_));
  if (kind_ == DomainKind::box) {
    for (int i = 0; i < dim_; ++i) y[i] = lo_[i] + rng.uniform() * (hi_[i] - lo_[i]);
    return y;
  }
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    y[i] = rng.exponential(1.0);
    s += y[i];
  }
  for (int i = 0; i < dim_; ++i) y[i] /= s;
  return y;
}

bool Domain::operator==(const Domain& other) const {
  return kind_ == other.kind_ && dim_ == other.dim_ && lo_ == other.lo_ && hi_ == other.hi_;
}

std::vector<long long> box_grid_max(const Domain& d, long long N) {
  std::vector<long long> kmax(static_cast<std::size_t>(d.dim()));
  for (int i = 0; i < d.dim(); ++i)
    kmax[static_cast<std::size_t>(i)] =
        static_cast<long long>(std::floor((d.hi()[i] - d.lo()[i]) * static_cast<double>(N) + 1e-9));
  return kmax;
}

GridPoint::GridPoint(Domain d, long long n, std::vector<long long> k)
    : domain(std::move(d)), N(n), coords(std::move(k)) {
  if (N < 1) throw ModelError("GridPoint: N must be positive");
  if (static_cast<int>(coords.size()) != domain.dim())
    throw ModelError("GridPoint: coordinate count != domain dim");
  if (domain.kind() == DomainKind::box) {
    auto kmax = box_grid_max(domain, N);
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (coords[i] < 0 || coords[i] > kmax[i])
        throw ModelError("GridPoint: lattice index outside box");
  } else {
    long long s = 0;
    for (long long c : coords) {
      if (c < 0) throw ModelError("GridPoint: negative simplex count");
      s += c;
    }
    if (s != N) throw ModelError("GridPoint: simplex counts must sum to N");
  }
}

Vec GridPoint::embed() const {
  Vec y(coords.size());
  const auto n = static_cast<double>(N);
  if (domain.kind() == DomainKind::box) {
    for (std::size_t i = 0; i < coords.size(); ++i)
      y[i] = domain.lo()[i] + static_cast<double>(coords[i]) / n;
  } else {
    for (std::size_t i = 0; i < coords.size(); ++i)
      y[i] = static_cast<double>(coords[i]) / n;
  }
  return y;
}

}  // namespace mflab
