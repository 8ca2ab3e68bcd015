#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mflab/common.hpp"
#include "mflab/rng.hpp"

namespace mflab {

enum class DomainKind { box, simplex };

/// Compact state space: an axis-aligned box in R^d or the probability
/// simplex {y >= 0, sum y = 1} in R^d. The metric is Euclidean.
class Domain {
 public:
  static Domain box(Vec lo, Vec hi);
  static Domain simplex(int dim);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  bool contains(std::span<const double> y, double tol = 0.0) const;
  double diameter() const;
  Vec centroid() const;

  /// Axis-aligned bounding box (the box itself, or [0,1]^d for the simplex).
  Vec bounding_lo() const;
  Vec bounding_hi() const;

  /// Uniform sample (Lebesgue on boxes, Dirichlet(1,..,1) on the simplex).
  Vec sample_uniform(RngStream& rng) const;

  bool operator==(const Domain& other) const;

 private:
  Domain() = default;
  DomainKind kind_ = DomainKind::box;
  int dim_ = 0;
  Vec lo_, hi_;  // box only
};

/// A lattice point of E^N: box y = lo + k/N, simplex y = k/N with sum k = N.
struct GridPoint {
  Domain domain;
  long long N = 0;
  std::vector<long long> coords;

  GridPoint(Domain d, long long n, std::vector<long long> k);

  Vec embed() const;
  bool operator==(const GridPoint& other) const {
    return N == other.N && coords == other.coords && domain == other.domain;
  }
};

/// Largest valid lattice index per axis for a box domain.
std::vector<long long> box_grid_max(const Domain& d, long long N);

}  // namespace mflab
