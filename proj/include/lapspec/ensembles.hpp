#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lapspec/levy_measure.hpp"
#include "lapspec/random.hpp"

namespace lapspec {

/// |xi| Pareto on [1, inf) with P(|xi| > t) = t^{-alpha}, sign + with
/// probability theta; entries divided by a_n = n^{1/alpha}.
struct LevyPareto {
  double alpha;
  double theta;
};

/// Adjacency of G(n, lambda/n).
struct ErdosRenyi {
  double lambda;
};

/// Bernoulli(lambda/n) times N(0,1)/sqrt(lambda).
struct SparseGaussian {
  double lambda;
};

struct EnsembleSpec {
  std::variant<LevyPareto, ErdosRenyi, SparseGaussian> law;
  std::size_t n = 2;

  /// Throws std::invalid_argument: alpha outside (0,1), theta outside [0,1],
  /// lambda <= 0, n < 2 or n <= lambda.
  void validate() const;
  std::string kind() const;
  /// a_n for LevyPareto, 1 otherwise.
  double scaling() const;
  /// Intensity measure m of the limiting row point process.
  LevyMeasure limit_measure() const;
  /// n * P(|A_12| >= t), in closed form.
  double scaled_entry_tail(double t) const;
  /// One off-diagonal entry A_12 (already normalised).
  double sample_entry(RandomStream& rng) const;

  nlohmann::json to_json() const;
  static EnsembleSpec from_json(const nlohmann::json& j);
};

/// Dense real symmetric matrix; only the lower triangle (diagonal included)
/// is stored, so symmetry holds by construction.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), packed_(n * (n + 1) / 2, 0.0) {}

  std::size_t n() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return packed_[offset(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { packed_[offset(i, j)] = v; }
  const std::vector<double>& packed() const { return packed_; }

  double trace() const;
  double frobenius_norm_squared() const;
  /// Row-major n x n copy.
  std::vector<double> dense() const;
  /// One "i j value" line per stored nonzero with i >= j, 17 digits.
  std::string to_triples() const;

 private:
  static std::size_t offset(std::size_t i, std::size_t j) {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  std::vector<double> packed_;
};

/// L = A - D with D_ii the row sums of A; rows sum to zero.
class LaplacianMatrix {
 public:
  explicit LaplacianMatrix(SymmetricMatrix m) : m_(std::move(m)) {}
  const SymmetricMatrix& matrix() const { return m_; }
  std::size_t n() const { return m_.n(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  SymmetricMatrix m_;
};

SymmetricMatrix sample_matrix(const EnsembleSpec& spec, RandomStream& rng);

/// Throws std::invalid_argument if A has a nonzero diagonal entry.
LaplacianMatrix laplacian(const SymmetricMatrix& a);

std::vector<double> row_sums(const SymmetricMatrix& a);

/// Same off-diagonal part as A, but the diagonal is minus i.i.d. row sums
/// of fresh, independent entries drawn from the law of `spec`. The rows of
/// the result do not sum to zero.
SymmetricMatrix independent_diagonal_laplacian(const SymmetricMatrix& a, const EnsembleSpec& spec,
                                               RandomStream& rng);

}  // namespace lapspec
