#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mflab {

using Vec = std::vector<double>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Expression text could not be parsed; `offset` is the byte position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset(offset) {}
  std::size_t offset;
};

/// A model violates a structural contract (bad kernel row, bad domain, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// The integrator left the domain by more than the projection tolerance.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, Vec state)
      : Error(what), state(std::move(state)) {}
  Vec state;
};

/// Newton (or another iterative solver) failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

inline double sq(double x) { return x * x; }

inline double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += sq(a[i] - b[i]);
  return std::sqrt(s);
}

inline double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += sq(x);
  return std::sqrt(s);
}

inline Vec vsub(std::span<const double> a, std::span<const double> b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec vadd(std::span<const double> a, std::span<const double> b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec vscale(std::span<const double> a, double c) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

/// "%.17g" round-trips doubles exactly through text.
std::string fmt_full(double x);
/// "%.12g", used for human-facing report numbers.
std::string fmt_short(double x);

}  // namespace mflab
