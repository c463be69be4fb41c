#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace lapspec {

using Complex = std::complex<double>;

/// Finite set of evaluation points in the upper half plane.
class ZGrid {
 public:
  static constexpr double kDefaultEtaMin = 0.25;

  /// Throws std::invalid_argument on duplicates or Im z < eta_min.
  explicit ZGrid(std::vector<Complex> points, double eta_min = kDefaultEtaMin);

  /// Re in [re_min, re_max] with the given step (inclusive), for each Im
  /// value. Ordered by Im first, then Re.
  static ZGrid rectangular(double re_min, double re_max, double re_step,
                           const std::vector<double>& im_values,
                           double eta_min = kDefaultEtaMin);
  /// Re in [-8, 4] step 0.25, Im in {0.5, 1.0}.
  static ZGrid default_grid();

  std::size_t size() const { return points_.size(); }
  const Complex& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Complex>& points() const { return points_; }
  double eta_min() const { return eta_min_; }

  /// Indices whose points satisfy im_min <= Im z <= im_max.
  std::vector<std::size_t> select_im(double im_min, double im_max) const;

  /// True when both grids hold the same points in the same order (to 1e-12).
  bool same_points(const ZGrid& other) const;

  nlohmann::json to_json() const;

 private:
  std::vector<Complex> points_;
  double eta_min_;
};

/// Grid-indexed deterministic estimate of a Stieltjes transform.
struct StieltjesEstimate {
  ZGrid grid;
  std::vector<Complex> mean;
  std::vector<double> std_error;
  /// Iterations (solvers) or samples (matrix runs) behind each point.
  std::vector<std::size_t> iterations;
  nlohmann::json metadata = nlohmann::json::object();

  explicit StieltjesEstimate(ZGrid g)
      : grid(std::move(g)),
        mean(grid.size()),
        std_error(grid.size(), 0.0),
        iterations(grid.size(), 0) {}

  /// Records (Re z, Im z, Re s, Im s, stderr, iterations), 17 significant
  /// digits, one header line.
  std::string to_csv() const;
  static StieltjesEstimate from_csv(const std::string& text);
};

/// 1/z without the overflow guards of the library complex division; callers
/// only pass values bounded away from zero and infinity.
inline Complex reciprocal(Complex w) {
  const double n = w.real() * w.real() + w.imag() * w.imag();
  return {w.real() / n, -w.imag() / n};
}

}  // namespace lapspec
