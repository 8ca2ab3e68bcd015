#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mflab/domain.hpp"
#include "mflab/expr.hpp"

namespace mflab {

/// One jump of a density-dependent model: the chain moves by delta/N at
/// propensity N * rate(y).
struct Jump {
  std::vector<long long> delta;
  RateExpr rate;
};

/// Continuous-time N-object model. The deterministic limit is the drift
/// field F(y) = sum_k rate_k(y) * delta_k.
class CtModel {
 public:
  CtModel(Domain domain, std::vector<Jump> jumps, std::string name = "custom",
          std::map<std::string, double> params = {});

  const Domain& domain() const { return domain_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }

  /// Drift field at y. On simplex models whose jumps all conserve mass the
  /// last component is closed as -(sum of the others) so the tangency
  /// invariant sum_i F_i = 0 holds exactly in floating point.
  Vec drift(std::span<const double> y) const;

  /// True when every jump satisfies sum_i delta_i = 0.
  bool mass_conserving() const { return mass_conserving_; }

 private:
  Domain domain_;
  std::vector<Jump> jumps_;
  std::string name_;
  std::map<std::string, double> params_;
  bool mass_conserving_ = true;
};

/// Discrete-time occupancy chain on the simplex: each object in state i
/// moves to state j with probability K_ij(m) given occupancy m. The
/// deterministic limit is the iterated map g(m)_j = sum_i m_i K_ij(m).
class DtModel {
 public:
  DtModel(Domain domain, std::vector<std::vector<RateExpr>> kernel, std::string name = "custom",
          std::map<std::string, double> params = {});

  const Domain& domain() const { return domain_; }
  const std::vector<std::vector<RateExpr>>& kernel() const { return kernel_; }
  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }

  /// One application of the limit map; throws ModelError if a kernel row sum
  /// deviates from 1 by more than 1e-9 at m. Output is renormalized onto the
  /// simplex.
  Vec limit_map(std::span<const double> m) const;

  /// Row K_i.(m) evaluated into `row` (no renormalization, no checks).
  void kernel_row(int i, std::span<const double> m, Vec& row) const;

 private:
  Domain domain_;
  std::vector<std::vector<RateExpr>> kernel_;
  std::string name_;
  std::map<std::string, double> params_;
};

using Model = std::variant<CtModel, DtModel>;

const Domain& model_domain(const Model& m);
const std::string& model_name(const Model& m);

/// A zoo request: name in {sis, sirs, hopf, logistic} plus parameters
/// (missing parameters take the documented defaults).
struct ZooSpec {
  std::string name;
  std::map<std::string, double> params;
};

struct ZooParamDoc {
  std::string name;
  double def;
  double lo, hi;  // closed/open per doc text
  std::string doc;
};

struct ZooEntry {
  std::string name;
  std::string doc;
  std::vector<ZooParamDoc> params;
};

const std::vector<ZooEntry>& zoo_catalog();
Model make_zoo_model(const ZooSpec& spec);

struct ValidationReport {
  bool pass = true;
  int samples = 0;
  double min_rate = 0.0;          // CtModel: most negative rate value seen
  double max_row_dev = 0.0;       // DtModel: worst |row sum - 1|
  double min_kernel = 0.0;        // DtModel: most negative kernel entry
  bool mass_conservation = true;  // simplex CtModel: all jumps sum to 0
  std::vector<std::string> issues;
};

/// Samples uniform domain points and audits rate nonnegativity,
/// row-stochasticity and simplex mass conservation. Failures are reported,
/// never thrown.
ValidationReport validate_model(const Model& model, int n_samples, std::uint64_t seed);

/// JSON model files:
///   {name, kind: "ct"|"dt", domain: {kind, dim, lo, hi},
///    jumps: [{l: [ints], rate: "expr"}], kernel: [["expr", ...], ...],
///    params: {...}}
Model model_from_json_text(const std::string& text);
Model load_model_file(const std::string& path);
std::string model_to_json_text(const Model& model);

}  // namespace mflab
