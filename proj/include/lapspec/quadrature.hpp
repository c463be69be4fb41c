#pragma once

#include <cstddef>
#include <vector>

namespace lapspec {

/// Nodes and weights of the n-point Gauss-Hermite rule for the weight
/// exp(-x^2) on the real line. Weights sum to sqrt(pi).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights come
/// from the Christoffel function of the orthonormal Hermite polynomials.
/// Rules are cached per n; safe to call from several threads.
const GaussHermiteRule& gauss_hermite(std::size_t n);

}  // namespace lapspec
