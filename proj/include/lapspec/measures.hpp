#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lapspec/levy_measure.hpp"
#include "lapspec/stieltjes.hpp"

namespace lapspec {

struct WeightedAtom {
  double location;
  double weight;
};

struct Histogram {
  std::vector<double> edges;  // strictly increasing, size = counts.size() + 1
  std::vector<double> counts;
};

/// A probability measure on the real line, either atomic (sorted by location,
/// duplicates merged) or a histogram normalised by its total count.
class MeasureEstimate {
 public:
  /// Throws if a weight is not positive or the total mass is zero. Weights
  /// are kept as given; total_mass() reports their sum.
  static MeasureEstimate from_atoms(std::vector<WeightedAtom> atoms);
  /// Uniform weights 1/n on the samples.
  static MeasureEstimate empirical(std::span<const double> samples);
  static MeasureEstimate from_histogram(Histogram h);
  /// `bins` equal bins over [min - pad, max + pad] of the samples.
  static MeasureEstimate histogram_of(std::span<const double> samples, std::size_t bins = 200,
                                      double pad = 0.5);

  bool is_atomic() const { return std::holds_alternative<std::vector<WeightedAtom>>(data_); }
  const std::vector<WeightedAtom>& atoms() const;
  const Histogram& histogram() const;
  double total_mass() const { return total_mass_; }

  /// Right-continuous CDF; linear inside histogram bins.
  double cdf(double x) const;
  /// Locations where the CDF may jump or bend.
  std::vector<double> breakpoints() const;

  /// (location, weight) or (bin_left, bin_right, count) rows.
  std::string to_csv() const;

 private:
  std::variant<std::vector<WeightedAtom>, Histogram> data_;
  double total_mass_ = 0.0;
};

enum class DistanceMetric { kolmogorov, sup_grid, total_variation };

struct DistanceReport {
  DistanceMetric metric;
  double value = 0.0;
  /// Location (or grid index) where the maximum is attained.
  double argmax = 0.0;
  std::string resolution;

  nlohmann::json to_json() const;
};

std::string to_string(DistanceMetric m);

Complex stieltjes_of_measure(const MeasureEstimate& mu, Complex z);

struct DensityCurve {
  double eta = 0.0;
  std::vector<double> energy;
  std::vector<double> density;
  /// Trapezoid integral over the covered energies.
  double integral = 0.0;
  /// 1 - integral: Cauchy tails outside the window, not renormalised away.
  double normalization_deficit = 0.0;
};

/// rho_eta(E) = Im s(E + i eta) / pi on the grid line Im z = eta.
DensityCurve density_from_stieltjes(const StieltjesEstimate& est, double eta);

DistanceReport kolmogorov_distance(const MeasureEstimate& a, const MeasureEstimate& b);
/// Half the l1 distance of atom weights; both inputs must be atomic.
DistanceReport total_variation_distance(const MeasureEstimate& a, const MeasureEstimate& b);
/// max over z of |s1(z) - s2(z)|; throws std::invalid_argument on grid mismatch.
DistanceReport sup_grid_distance(const StieltjesEstimate& s1, const StieltjesEstimate& s2);

/// Sum of w_i |x_i|^r (midpoints for histograms).
double moment(const MeasureEstimate& mu, double r);

struct RowSumFit {
  std::size_t sample_count = 0;
  std::vector<double> t_grid;
  /// max_t |phi_emp(t) - phi(t)|.
  double max_cf_deviation = 0.0;
  /// max_t ||phi_emp(t)| - |phi(t)||.
  double max_modulus_deviation = 0.0;
  /// Point-mass measures only: TV between rounded samples and Poisson(lambda).
  std::optional<double> poisson_total_variation;

  nlohmann::json to_json() const;
};

/// Compares the empirical characteristic function of the samples with the
/// infinitely divisible one on 33 points of [-5, 5]. Needs >= 1000 samples.
RowSumFit row_sum_fit(std::span<const double> samples, const LevyMeasure& m, double b);

/// Poisson(mean) probability mass at k.
double poisson_pmf(double mean, std::uint64_t k);

}  // namespace lapspec
