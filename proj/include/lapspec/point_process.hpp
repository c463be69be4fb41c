#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapspec/levy_measure.hpp"
#include "lapspec/random.hpp"

namespace lapspec {

/// How a (possibly infinite) Poisson point process is cut down to a finite
/// sample.
struct TruncationPolicy {
  /// Points with |x| < delta are discarded. Must be positive for AlphaStable.
  double delta = 0.0;
  std::size_t max_points = std::numeric_limits<std::size_t>::max();
  /// Rejects AlphaStable with alpha >= 1, whose points are not summable.
  bool laplacian_use = true;
};

/// delta = 1e-3 for infinite-mass measures, no cutoff otherwise.
TruncationPolicy default_truncation(const LevyMeasure& m);

struct TruncationInfo {
  double delta = 0.0;
  std::size_t max_points = 0;
  /// Mean absolute sum of the discarded points (an error bar on sums).
  double truncated_tail_mass_estimate = 0.0;
};

/// Finite realization of a Poisson point process, sorted by decreasing |x|
/// with ties broken by sign (positive first) and then by draw order.
struct PointProcessSample {
  std::vector<double> weights;
  TruncationInfo truncation;
};

/// Thrown when a measure is asked to drive a Laplacian but its points are not
/// almost surely summable.
class NotSummableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

PointProcessSample sample_point_process(const LevyMeasure& m, const TruncationPolicy& trunc,
                                        RandomStream& rng);

/// Appends the retained points to `out` (cleared first). Allocation-free hot
/// path used by the tree sampler and the population solver.
void sample_point_process_into(const LevyMeasure& m, const TruncationPolicy& trunc,
                               RandomStream& rng, std::vector<double>& out);

/// Sum of u(w) over the points; Campbell's formula gives its mean as the
/// integral of u against m.
double sum_weights(const PointProcessSample& sample, const std::function<double(double)>& u);

/// Thrown when a quadrature used by id_characteristic_function fails to
/// reach its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// exp(i t b + integral of (e^{itx} - 1 - itx/(1+x^2)) dm(x)).
std::complex<double> id_characteristic_function(const LevyMeasure& m, double b, double t);

struct SumConditionResult {
  bool holds = false;
  /// Integral of min(1, |x|) dm; +infinity when it diverges.
  double integral_value = 0.0;
};

struct DecayResult {
  double epsilon = 0.0;
  double C = 0.0;
  bool holds = false;
};

/// Check of the summability and tail-decay requirements a measure must meet
/// before its Laplacian limit (and the RDE) is meaningful.
struct C1Report {
  SumConditionResult sum_condition;
  DecayResult decay;
  std::string notes;

  bool passes() const { return sum_condition.holds && decay.holds; }
  nlohmann::json to_json() const;
};

C1Report verify_c1(const LevyMeasure& m);

}  // namespace lapspec
