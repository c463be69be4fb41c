#include "lapspec/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "lapspec/eigensolver.hpp"

namespace lapspec {

namespace {

// Orthonormal Hermite recurrence at x; returns log(sum_k q_k(x)^2) so that
// large nodes do not overflow.
double log_christoffel_sum(double x, std::size_t n) {
  double q_prev = 0.0;
  double q = std::pow(std::numbers::pi, -0.25);
  double log_scale = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sum += q * q;
    const double next =
        (x * q - std::sqrt(0.5 * static_cast<double>(k)) * q_prev) / std::sqrt(0.5 * static_cast<double>(k + 1));
    q_prev = q;
    q = next;
    if (std::abs(q) > 1e100) {
      q *= 1e-100;
      q_prev *= 1e-100;
      sum *= 1e-200;
      log_scale += 200.0 * std::numbers::ln10;
    }
  }
  return std::log(sum) + log_scale;
}

GaussHermiteRule build_rule(std::size_t n) {
  TridiagonalForm jacobi;
  jacobi.diagonal.assign(n, 0.0);
  jacobi.subdiagonal.resize(n - 1);
  for (std::size_t k = 1; k < n; ++k) jacobi.subdiagonal[k - 1] = std::sqrt(0.5 * static_cast<double>(k));
  std::vector<double> nodes = tridiagonal_eigenvalues(std::move(jacobi));  // non-increasing
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Symmetrize: the rule is exactly symmetric about 0.
    const double x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
    rule.nodes[i] = x;
    rule.weights[i] = std::exp(-log_christoffel_sum(x, n));
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(n));
  return *slot;
}

}  // namespace lapspec
