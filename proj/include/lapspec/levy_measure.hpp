#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace lapspec {

/// Density alpha |x|^{-1-alpha} (theta on x > 0, 1 - theta on x < 0).
struct AlphaStable {
  double alpha;
  double theta;
};

/// lambda times a unit atom at x = 1.
struct PointMass {
  double lambda;
};

/// lambda times the centred Gaussian law with variance 1/lambda.
struct ScaledGaussian {
  double lambda;
};

struct Atom {
  double location;
  double mass;
};

struct FiniteDiscrete {
  std::vector<Atom> atoms;
};

/// Intensity measure m of a Poisson point process on R \ {0}; the jump part
/// (0, b, m) of an infinitely divisible law.
class LevyMeasure {
 public:
  using Variant = std::variant<AlphaStable, PointMass, ScaledGaussian, FiniteDiscrete>;

  /// Throws std::invalid_argument when the parameters are outside their domain.
  explicit LevyMeasure(Variant v);

  static LevyMeasure alpha_stable(double alpha, double theta);
  static LevyMeasure point_mass(double lambda);
  static LevyMeasure scaled_gaussian(double lambda);
  static LevyMeasure finite_discrete(std::vector<Atom> atoms);

  const Variant& variant() const { return v_; }
  std::string kind() const;

  bool is_finite() const { return !std::holds_alternative<AlphaStable>(v_); }
  /// m(R \ {0}); +infinity for AlphaStable.
  double total_mass() const;
  /// m({|x| >= t}) for t > 0.
  double tail_mass(double t) const;
  /// Integral of |x| over {0 < |x| < delta}; +infinity when it diverges.
  double abs_mass_below(double delta) const;
  /// Integral of min(1, |x|) dm; +infinity when it diverges.
  double abs_min_one_integral() const;

  nlohmann::json to_json() const;
  static LevyMeasure from_json(const nlohmann::json& j);

 private:
  Variant v_;
};

}  // namespace lapspec
