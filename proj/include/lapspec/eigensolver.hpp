#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapspec/ensembles.hpp"
#include "lapspec/measures.hpp"
#include "lapspec/stieltjes.hpp"

namespace lapspec {

/// Symmetric tridiagonal matrix: diagonal (n) and subdiagonal (n - 1).
struct TridiagonalForm {
  std::vector<double> diagonal;
  std::vector<double> subdiagonal;
};

class EigenConvergenceError : public std::runtime_error {
 public:
  EigenConvergenceError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  /// Index of the eigenvalue that failed to converge.
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Householder reduction to tridiagonal form (orthogonal similarity, the
/// transform itself is not kept).
TridiagonalForm tridiagonalize(const SymmetricMatrix& m);

/// Implicit-shift QL with Wilkinson shifts. Deflates when
/// |e_i| <= eps (|d_i| + |d_{i+1}|) or |e_i| <= eps ||T||; at most 50 sweeps per
/// eigenvalue.
/// Returns the eigenvalues in non-increasing order.
std::vector<double> tridiagonal_eigenvalues(TridiagonalForm t);

/// Eigenvalues sorted non-increasing.
class Spectrum {
 public:
  Spectrum() = default;
  /// Sorts its input.
  explicit Spectrum(std::vector<double> eigenvalues);

  const std::vector<double>& eigenvalues() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// One eigenvalue per line, 17 significant digits.
  std::string to_text() const;

 private:
  std::vector<double> values_;
};

/// Throws std::invalid_argument on non-finite input, EigenConvergenceError
/// if QL stalls.
Spectrum spectrum(const SymmetricMatrix& m);
/// Laplacian overload: deflates the all-ones direction with one Householder
/// reflection first; that eigenvalue is the Rayleigh quotient sum(L)/n.
Spectrum spectrum(const LaplacianMatrix& l);

/// Uniform atoms 1/n on the eigenvalues.
MeasureEstimate esm(const Spectrum& s);

/// (1/n) sum_i 1/(lambda_i - z); throws std::invalid_argument if Im z <= 0.
Complex empirical_stieltjes(const Spectrum& s, Complex z);

/// Relative errors of the trace and squared Frobenius norm reproduced by the
/// eigenvalues, and whether they are sorted.
struct SpectrumCheck {
  double trace_relative_error = 0.0;
  double frobenius_relative_error = 0.0;
  bool sorted = true;
};

SpectrumCheck check_spectrum(const SymmetricMatrix& m, const Spectrum& s);

}  // namespace lapspec
