// Test-only oracles: independent computations the implementation is checked
// against. Nothing here calls the library's solvers.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

/// Stable positive root of a*x^2 + b*x + c with a < 0 (drift quadratics).
inline double quadratic_positive_root(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) throw std::runtime_error("oracle: negative discriminant");
  const double q = -0.5 * (b + (b >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc));
  const double r1 = q / a, r2 = c / q;
  return std::max(r1, r2);
}

/// sis drift F(m) = beta*m*(1-m) + lambda0*(1-m) - gamma*m; interior zero.
inline double sis_fixed_point(double beta, double gamma, double lambda0) {
  return quadratic_positive_root(-beta, beta - gamma - lambda0, lambda0);
}

/// Bisection to |b - a| <= tol; requires a sign change.
inline double bisect(const std::function<double(double)>& f, double a, double b,
                     double tol = 1e-14) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw std::runtime_error("oracle: bisection needs a sign change");
  for (int i = 0; i < 200 && b - a > tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

inline double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

/// The clamped logistic map on the occupied fraction.
inline double logistic_map(double r, double eps, double x) {
  return clamp(r * x * (1.0 - x), eps, 1.0 - eps);
}

struct TwoCycle {
  double a, b;
};

/// Attracting 2-cycle of the clamped logistic map located by bisection on
/// g(g(x)) - x inside brackets where the clamp is inactive.
inline TwoCycle logistic_two_cycle(double r, double eps) {
  auto g2 = [&](double x) { return logistic_map(r, eps, logistic_map(r, eps, x)) - x; };
  TwoCycle c{};
  c.a = bisect(g2, 0.4, 1.0 - 1.0 / r - 1e-6);  // below the unstable fixed point
  c.b = bisect(g2, 1.0 - 1.0 / r + 1e-6, 0.95);
  return c;
}

/// Unstable fixed point of the clamped logistic map by bisection on g(x)-x.
inline double logistic_fixed_point(double r, double eps) {
  auto g1 = [&](double x) { return logistic_map(r, eps, x) - x; };
  return bisect(g1, 0.5, 0.95);
}

/// Reference largest-remainder rounding (remainder ties -> lowest index).
inline std::vector<long long> largest_remainder(const std::vector<double>& y, long long N) {
  const std::size_t d = y.size();
  std::vector<long long> k(d);
  std::vector<std::pair<double, std::size_t>> rem(d);
  long long assigned = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const double v = std::max(0.0, y[i]) * static_cast<double>(N);
    k[i] = static_cast<long long>(std::floor(v));
    rem[i] = {-(v - std::floor(v)), i};  // sort ascending = remainder descending
    assigned += k[i];
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& p, const auto& q) {
    if (p.first != q.first) return p.first < q.first;
    return p.second < q.second;
  });
  long long deficit = N - assigned;
  std::size_t pos = 0;
  while (deficit > 0) {
    ++k[rem[pos % d].second];
    --deficit;
    ++pos;
  }
  return k;
}

/// Stationary occupancy of state 1/N for the two-state constant-rate chain.
inline double birth_death_mass(double up, double down) { return up / (up + down); }

// frozen derived constants, verified against the oracles in the tests
inline constexpr double kSisFixedPoint = 0.5049028943116219;    // sis(2, 1, 0.01)
inline constexpr double kLogistic32CycleA = 0.5130445095326300; // logistic(3.2) 2-cycle
inline constexpr double kLogistic32CycleB = 0.7994554904673700;
inline constexpr double kLogistic32Unstable = 0.6875;           // 1 - 1/r

}  // namespace oracle
