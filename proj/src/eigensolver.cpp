#include "lapspec/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "text_format.hpp"

namespace lapspec {

namespace {

constexpr int kMaxSweepsPerEigenvalue = 50;

struct Reflector {
  double beta = 0.0;   // H = I - beta v v^T; beta == 0 means identity
  double alpha = 0.0;  // H x = alpha e_1
};

// Builds v in place from x = row[first..n): v = x - alpha e_1.
Reflector make_reflector(double* x, std::size_t len) {
  double tail = 0.0;
  for (std::size_t j = 1; j < len; ++j) tail += x[j] * x[j];
  Reflector r;
  if (tail == 0.0) {
    r.alpha = x[0];
    return r;
  }
  const double sigma = std::sqrt(x[0] * x[0] + tail);
  r.alpha = x[0] >= 0.0 ? -sigma : sigma;
  r.beta = 1.0 / (sigma * (sigma + std::abs(x[0])));
  x[0] -= r.alpha;
  return r;
}

// Four-way split dot product; fixed association, so results are reproducible.
inline double dot(const double* a, const double* b, std::size_t len) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  for (; j < len; ++j) s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

TridiagonalForm tridiagonalize(const SymmetricMatrix& m) {
  const std::size_t n = m.n();
  TridiagonalForm t;
  t.diagonal.resize(n);
  t.subdiagonal.resize(n > 0 ? n - 1 : 0);
  if (n == 0) return t;
  if (n == 1) {
    t.diagonal[0] = m(0, 0);
    return t;
  }

  std::vector<double> a = m.dense();
  auto row = [&](std::size_t i) { return a.data() + i * n; };

  std::vector<double> v(n), w(n), p(n), v_next(n), p_next(n);
  Reflector h;
  bool have_reflector = false;  // v/h for step k already built by step k-1
  bool have_product = false;    // p = A22 v for step k already accumulated

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t first = k + 1;
    const std::size_t len = n - first;
    t.diagonal[k] = row(k)[k];
    if (!have_reflector) {
      std::copy(row(k) + first, row(k) + n, v.begin() + first);
      h = make_reflector(v.data() + first, len);
    }
    t.subdiagonal[k] = h.alpha;
    if (h.beta == 0.0) {
      have_reflector = have_product = false;
      continue;
    }
    if (!have_product)
      for (std::size_t i = first; i < n; ++i) p[i] = dot(row(i) + first, v.data() + first, len);

    // w = beta p - (beta^2 / 2)(p.v) v
    double pv = 0.0;
    for (std::size_t i = first; i < n; ++i) pv += p[i] * v[i];
    const double kappa = 0.5 * h.beta * h.beta * pv;
    for (std::size_t i = first; i < n; ++i) w[i] = h.beta * p[i] - kappa * v[i];

    // A22 -= v w^T + w v^T. Row `first` goes first so the next reflector is
    // known before the remaining rows are touched; each of those rows then
    // also feeds the next matrix-vector product.
    {
      double* r = row(first);
      const double vi = v[first], wi = w[first];
      for (std::size_t j = first; j < n; ++j) r[j] -= vi * w[j] + wi * v[j];
    }
    Reflector h_next;
    const bool next_step = k + 3 < n;
    if (next_step) {
      std::copy(row(first) + first + 1, row(first) + n, v_next.begin() + first + 1);
      h_next = make_reflector(v_next.data() + first + 1, n - first - 1);
    }
    const bool fuse = next_step && h_next.beta != 0.0;
    for (std::size_t i = first + 1; i < n; ++i) {
      double* r = row(i);
      const double vi = v[i], wi = w[i];
      for (std::size_t j = first; j < n; ++j) r[j] -= vi * w[j] + wi * v[j];
      if (fuse) p_next[i] = dot(r + first + 1, v_next.data() + first + 1, n - first - 1);
    }
    if (next_step) {
      std::swap(v, v_next);
      std::swap(p, p_next);
      h = h_next;
      have_reflector = true;
      have_product = fuse;
    }
  }
  t.diagonal[n - 2] = row(n - 2)[n - 2];
  t.subdiagonal[n - 2] = row(n - 1)[n - 2];
  t.diagonal[n - 1] = row(n - 1)[n - 1];
  return t;
}

std::vector<double> tridiagonal_eigenvalues(TridiagonalForm t) {
  std::vector<double>& d = t.diagonal;
  const std::size_t n = d.size();
  std::vector<double> e(n, 0.0);
  std::copy(t.subdiagonal.begin(), t.subdiagonal.end(), e.begin());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Clusters of eigenvalues at rounding level (the Laplacian kernel of a
  // graph with many components) never satisfy the purely relative test, so
  // couplings below eps * ||T|| are dropped as well.
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, std::abs(d[i]) + std::abs(e[i]));
  const double floor = eps * norm;

  for (std::size_t l = 0; l < n; ++l) {
    int sweeps = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= floor) break;
      }
      if (m != l) {
        if (sweeps++ == kMaxSweepsPerEigenvalue)
          throw EigenConvergenceError(
              "implicit QL did not converge for eigenvalue index " + std::to_string(l) + " (d = " +
                  detail::g17(d[l]) + ", next d = " + detail::g17(d[l + 1]) + ", e = " + detail::g17(e[l]) + ")",
              l);
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

Spectrum::Spectrum(std::vector<double> eigenvalues) : values_(std::move(eigenvalues)) {
  std::sort(values_.begin(), values_.end(), std::greater<>());
}

std::string Spectrum::to_text() const {
  std::string out;
  for (double x : values_) out += detail::g17(x) + "\n";
  return out;
}

Spectrum spectrum(const SymmetricMatrix& m) {
  if (m.n() == 0) throw std::invalid_argument("spectrum: empty matrix");
  for (double x : m.packed())
    if (!std::isfinite(x)) throw std::invalid_argument("spectrum: matrix has NaN or Inf entries");
  return Spectrum(tridiagonal_eigenvalues(tridiagonalize(m)));
}

namespace {

// Sum with Neumaier compensation.
double compensated_sum(const double* x, std::size_t len) {
  double s = 0.0, c = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const double t = s + x[j];
    c += std::abs(s) >= std::abs(x[j]) ? (s - t) + x[j] : (x[j] - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

// The all-ones vector spans a known (near) kernel direction. Reflecting it
// onto e_0 first and reading the eigenvalue off as the Rayleigh quotient of
// the stored matrix keeps the kernel eigenvalue at the size of the row sums
// instead of eps ||L||, which matters for heavy-tailed entries. The coupling
// of e_0 to the rest is of row-sum size and is dropped (second-order effect).
Spectrum spectrum(const LaplacianMatrix& l) {
  const SymmetricMatrix& m = l.matrix();
  const std::size_t n = m.n();
  if (n < 2) return spectrum(m);
  for (double x : m.packed())
    if (!std::isfinite(x)) throw std::invalid_argument("spectrum: matrix has NaN or Inf entries");

  std::vector<double> a = m.dense();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = compensated_sum(a.data() + i * n, n);
  const double kernel_value = compensated_sum(r.data(), n) / static_cast<double>(n);

  std::vector<double> v(n, 1.0);
  const Reflector h = make_reflector(v.data(), n);
  std::vector<double> p(n), w(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = dot(a.data() + i * n, v.data(), n);
  const double pv = dot(p.data(), v.data(), n);
  const double kappa = 0.5 * h.beta * h.beta * pv;
  for (std::size_t i = 0; i < n; ++i) w[i] = h.beta * p[i] - kappa * v[i];

  SymmetricMatrix b(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 1; j <= i; ++j) b.set(i - 1, j - 1, a[i * n + j] - v[i] * w[j] - w[i] * v[j]);
  std::vector<double> values = tridiagonal_eigenvalues(tridiagonalize(b));
  values.push_back(kernel_value);
  return Spectrum(std::move(values));
}

MeasureEstimate esm(const Spectrum& s) { return MeasureEstimate::empirical(s.eigenvalues()); }

Complex empirical_stieltjes(const Spectrum& s, Complex z) {
  if (!(z.imag() > 0.0)) throw std::invalid_argument("empirical_stieltjes: Im z must be positive");
  Complex acc = 0.0;
  for (double x : s.eigenvalues()) acc += reciprocal(Complex(x - z.real(), -z.imag()));
  return acc / static_cast<double>(s.size());
}

SpectrumCheck check_spectrum(const SymmetricMatrix& m, const Spectrum& s) {
  SpectrumCheck c;
  double tr = 0.0, sq = 0.0;
  for (double x : s.eigenvalues()) {
    tr += x;
    sq += x * x;
  }
  const double fro2 = m.frobenius_norm_squared();
  const double mtr = m.trace();
  const double tr_scale = std::max(std::abs(mtr), std::sqrt(fro2));
  c.trace_relative_error = tr_scale > 0.0 ? std::abs(tr - mtr) / tr_scale : std::abs(tr);
  c.frobenius_relative_error = fro2 > 0.0 ? std::abs(sq - fro2) / fro2 : sq;
  c.sorted = std::is_sorted(s.eigenvalues().begin(), s.eigenvalues().end(), std::greater<>());
  return c;
}

}  // namespace lapspec
