#pragma once

// Independent reference computations used by the tests. None of these share
// code with the library beyond the basic value types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

using Complex = std::complex<double>;

/// det(M - xI) by LU with partial pivoting; M is row-major n x n.
inline double shifted_determinant(const std::vector<double>& m, std::size_t n, double x) {
  std::vector<double> a = m;
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] -= x;
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a[r * n + k]) > std::abs(a[piv * n + k])) piv = r;
    if (a[piv * n + k] == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
      det = -det;
    }
    det *= a[k * n + k];
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r * n + k] / a[k * n + k];
      for (std::size_t c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
    }
  }
  return det;
}

/// Eigenvalues (descending) of a small symmetric matrix from sign changes of
/// det(M - xI) inside the Gershgorin interval, refined by bisection. The scan
/// is refined until n roots are found; assumes simple eigenvalues.
inline std::vector<double> bisection_eigenvalues(const std::vector<double>& m, std::size_t n) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) r += std::abs(m[i * n + j]);
    lo = std::min(lo, m[i * n + i] - r);
    hi = std::max(hi, m[i * n + i] + r);
  }
  lo -= 1e-3;
  hi += 1e-3;
  for (std::size_t steps = 4096; steps <= (std::size_t{1} << 24); steps *= 4) {
    std::vector<double> roots;
    const double h = (hi - lo) / static_cast<double>(steps);
    double x0 = lo, f0 = shifted_determinant(m, n, x0);
    for (std::size_t s = 1; s <= steps; ++s) {
      const double x1 = lo + h * static_cast<double>(s);
      const double f1 = shifted_determinant(m, n, x1);
      if (f0 == 0.0) {
        roots.push_back(x0);
      } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
        double a = x0, b = x1, fa = f0;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
          const double c = 0.5 * (a + b);
          const double fc = shifted_determinant(m, n, c);
          if ((fc < 0.0) == (fa < 0.0)) {
            a = c;
            fa = fc;
          } else {
            b = c;
          }
        }
        roots.push_back(0.5 * (a + b));
      }
      x0 = x1;
      f0 = f1;
    }
    if (roots.size() == n) {
      std::sort(roots.begin(), roots.end(), std::greater<>());
      return roots;
    }
  }
  return {};
}

/// Exact total variation between Binomial(trials, p) and Poisson(mean).
inline double binomial_poisson_tv(std::uint64_t trials, double p, double mean) {
  const boost::math::binomial_distribution<> bin(static_cast<double>(trials), p);
  const boost::math::poisson_distribution<> poi(mean);
  double tv = 0.0, poisson_seen = 0.0;
  for (std::uint64_t k = 0; k <= trials; ++k) {
    const double pb = boost::math::pdf(bin, static_cast<double>(k));
    const double pp = boost::math::pdf(poi, static_cast<double>(k));
    tv += std::abs(pb - pp);
    poisson_seen += pp;
    if (k > 200 && pb < 1e-300) break;
  }
  tv += 1.0 - poisson_seen;
  return 0.5 * tv;
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Adaptive Gauss-Kronrod over the real line of a complex integrand.
inline Complex integrate_line(const std::function<Complex(double)>& f, double a = -INFINITY,
                              double b = INFINITY) {
  using boost::math::quadrature::gauss_kronrod;
  const double re = gauss_kronrod<double, 61>::integrate([&](double x) { return f(x).real(); }, a, b, 15, 1e-13);
  const double im = gauss_kronrod<double, 61>::integrate([&](double x) { return f(x).imag(); }, a, b, 15, 1e-13);
  return {re, im};
}

/// Standard normal density.
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace oracle
