#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "lapspec/levy_measure.hpp"
#include "lapspec/point_process.hpp"
#include "lapspec/stieltjes.hpp"

namespace lapspec {

enum class RdeVariant {
  /// s = -(z - sum_j y_j / (s_j y_j - 1))^{-1}: diagonal built from the same edges.
  dependent,
  /// s = -(z + sum_j y~_j + sum_j y_j^2 s_j)^{-1}: diagonal from an independent copy.
  independent,
};

struct RdeConfig {
  std::size_t pop_size = 100000;
  std::size_t iterations = 200;
  std::size_t burn_in = 100;
  /// Probability that an element keeps its old value in a sweep.
  double damping = 0.0;
  /// default_truncation(m) when empty.
  std::optional<TruncationPolicy> truncation;
  RdeVariant variant = RdeVariant::dependent;
  /// Run a coupled shadow population and record the distance trace.
  bool track_convergence = true;
  double tolerance = 1e-3;
  std::size_t workers = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

/// N_pop random Stieltjes transforms evaluated on a fixed list of points.
/// Storage is element-major: value(i, j) is element i at point j.
class Population {
 public:
  Population(std::vector<Complex> points, std::size_t size);

  std::size_t size() const { return size_; }
  std::size_t grid_size() const { return points_.size(); }
  const std::vector<Complex>& points() const { return points_; }

  const Complex& value(std::size_t i, std::size_t j) const { return values_[i * points_.size() + j]; }
  Complex& value(std::size_t i, std::size_t j) { return values_[i * points_.size() + j]; }
  const Complex* element(std::size_t i) const { return values_.data() + i * points_.size(); }
  Complex* element(std::size_t i) { return values_.data() + i * points_.size(); }

  /// Throws std::logic_error unless every value has Im > 0 and |s| <= 1/Im z.
  void check_herglotz() const;

 private:
  std::vector<Complex> points_;
  std::size_t size_;
  std::vector<Complex> values_;
};

/// Every entry is -1/z.
Population init_population(const ZGrid& grid, std::size_t size);
Population init_population(const std::vector<Complex>& points, std::size_t size);

struct RdeStepStats {
  /// Times |s_j y_j - 1| fell below the 1e-14 floor (must stay zero).
  std::size_t guard_hits = 0;
};

/// One synchronous sweep. Element i draws its point process, its indices into
/// `pop` and its damping coin from stream derive_stream_id(kRdeSweep, sweep, i),
/// so two populations advanced with the same (seed, sweep) are coupled.
/// Throws std::logic_error on a Herglotz violation.
Population iterate_rde(const Population& pop, const LevyMeasure& m, const RdeConfig& cfg,
                       std::uint64_t seed, std::uint64_t sweep, RdeStepStats* stats = nullptr);

/// Raised by solve_rde for measures that fail verify_c1.
class C1RefusalError : public std::invalid_argument {
 public:
  C1RefusalError(const std::string& what, C1Report report)
      : std::invalid_argument(what), report_(std::move(report)) {}
  const C1Report& report() const { return report_; }

 private:
  C1Report report_;
};

/// Population dynamics for the limit s_m(z) = E s(z). The mean averages the
/// post-burn-in population means; std_error is the final population's
/// standard deviation over sqrt(N_pop). Metadata holds the config, measure,
/// distance trace between the main population and a shadow population started
/// one sweep ahead, the converged flag, guard hits and a tail bias bound.
StieltjesEstimate solve_rde(const LevyMeasure& m, const ZGrid& grid, const RdeConfig& cfg,
                            std::uint64_t seed);

/// Fixed point s = integral dG(x) / (x - z - s) for the standard Gaussian G,
/// by damped iteration with 64-node Gauss-Hermite quadrature until the
/// residual |F(s) - s| < tol (recorded as metadata max_residual). Throws
/// std::runtime_error after 10^4 iterations without reaching `tol`.
StieltjesEstimate solve_free_convolution(const ZGrid& grid, double tol = 1e-12);

/// Mean over elements of the sup over the selected points of |a_i(z) - b_i(z)|.
/// An empty index list selects every point.
double population_distance(const Population& a, const Population& b,
                           const std::vector<std::size_t>& indices = {});

}  // namespace lapspec
