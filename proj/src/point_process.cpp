#include "lapspec/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lapspec/quadrature.hpp"

namespace lapspec {

namespace {

using cplx = std::complex<double>;

constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kAlphaOneBand = 1e-7;
constexpr double kHermiteTolerance = 1e-10;
constexpr std::size_t kHermiteFirst = 64;
constexpr std::size_t kHermiteMax = 1024;

// Decreasing |x|, positive before negative on ties; stable sort keeps draw
// order for exact duplicates.
bool weight_before(double a, double b) {
  const double aa = std::abs(a), ab = std::abs(b);
  if (aa != ab) return aa > ab;
  return a > 0.0 && b < 0.0;
}

double draw_atom(const LevyMeasure::Variant& v, double total, RandomStream& rng) {
  if (std::holds_alternative<PointMass>(v)) return 1.0;
  if (const auto* g = std::get_if<ScaledGaussian>(&v)) return rng.normal() / std::sqrt(g->lambda);
  const auto& atoms = std::get<FiniteDiscrete>(v).atoms;
  double u = rng.uniform() * total;
  for (const auto& a : atoms) {
    if (u < a.mass) return a.location;
    u -= a.mass;
  }
  return atoms.back().location;
}

// Integral over x > 0 of (e^{itx} - 1 - itx/(1+x^2)) alpha x^{-1-alpha} dx.
cplx stable_half_exponent(double alpha, double t) {
  if (t == 0.0) return 0.0;
  const double at = std::abs(t);
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  if (std::abs(alpha - 1.0) < kAlphaOneBand) {
    return {-0.5 * std::numbers::pi * at, t * (1.0 - kEulerGamma) - t * std::log(at)};
  }
  // -Gamma(1-alpha) (-it)^alpha - i t alpha pi / (2 cos(pi alpha / 2)); the
  // same expression holds on both sides of alpha = 1.
  const cplx minus_it_pow = std::polar(std::pow(at, alpha), -0.5 * std::numbers::pi * alpha * sgn);
  const cplx jump = -std::tgamma(1.0 - alpha) * minus_it_pow;
  const double drift = -t * alpha * std::numbers::pi / (2.0 * std::cos(0.5 * std::numbers::pi * alpha));
  return jump + cplx(0.0, drift);
}

// lambda * E[e^{itY} - 1 - itY/(1+Y^2)], Y ~ N(0, 1/lambda), by Gauss-Hermite
// with doubling until successive estimates agree.
cplx gaussian_exponent(double lambda, double t) {
  const double scale = std::sqrt(2.0 / lambda);
  auto estimate = [&](std::size_t n) {
    const auto& rule = gauss_hermite(n);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double y = scale * rule.nodes[k];
      const cplx f(std::cos(t * y) - 1.0, std::sin(t * y) - t * y / (1.0 + y * y));
      acc += rule.weights[k] * f;
    }
    return lambda * acc / std::sqrt(std::numbers::pi);
  };
  cplx previous = estimate(kHermiteFirst);
  double residual = 0.0;
  for (std::size_t n = 2 * kHermiteFirst; n <= kHermiteMax; n *= 2) {
    const cplx current = estimate(n);
    residual = std::abs(current - previous);
    if (residual < kHermiteTolerance) return current;
    previous = current;
  }
  throw QuadratureError("Gauss-Hermite quadrature did not converge for t = " + std::to_string(t),
                        residual);
}

}  // namespace

TruncationPolicy default_truncation(const LevyMeasure& m) {
  TruncationPolicy p;
  p.delta = m.is_finite() ? 0.0 : 1e-3;
  return p;
}

void sample_point_process_into(const LevyMeasure& m, const TruncationPolicy& trunc,
                               RandomStream& rng, std::vector<double>& out) {
  out.clear();
  if (trunc.max_points == 0) return;
  const auto& v = m.variant();
  if (const auto* a = std::get_if<AlphaStable>(&v)) {
    if (trunc.laplacian_use && a->alpha >= 1.0)
      throw NotSummableError("alpha_stable with alpha >= 1 has non-summable points; "
                             "the Laplacian diagonal is undefined");
    if (!(trunc.delta > 0.0))
      throw std::invalid_argument("sample_point_process: infinite-mass measure needs delta > 0");
    // eps_k Gamma_k^{-1/alpha}: already sorted by decreasing modulus.
    const double inv_alpha = 1.0 / a->alpha;
    double gamma = 0.0;
    while (out.size() < trunc.max_points) {
      gamma += rng.exponential();
      const double r = std::pow(gamma, -inv_alpha);
      if (r < trunc.delta) break;
      out.push_back(rng.uniform() < a->theta ? r : -r);
    }
    return;
  }
  const double mass = m.total_mass();
  const std::uint64_t count = rng.poisson(mass);
  for (std::uint64_t k = 0; k < count; ++k) {
    const double y = draw_atom(v, mass, rng);
    if (std::abs(y) >= trunc.delta && y != 0.0) out.push_back(y);
  }
  if (!std::holds_alternative<PointMass>(v)) std::stable_sort(out.begin(), out.end(), weight_before);
  if (out.size() > trunc.max_points) out.resize(trunc.max_points);
}

PointProcessSample sample_point_process(const LevyMeasure& m, const TruncationPolicy& trunc,
                                        RandomStream& rng) {
  PointProcessSample s;
  s.truncation.delta = trunc.delta;
  s.truncation.max_points = trunc.max_points;

  if (m.is_finite() && trunc.max_points != std::numeric_limits<std::size_t>::max()) {
    // Keep the points dropped by the cap so their realized mass can be reported.
    TruncationPolicy uncapped = trunc;
    uncapped.max_points = std::numeric_limits<std::size_t>::max();
    sample_point_process_into(m, uncapped, rng, s.weights);
    double dropped = 0.0;
    for (std::size_t i = trunc.max_points; i < s.weights.size(); ++i) dropped += std::abs(s.weights[i]);
    if (s.weights.size() > trunc.max_points) s.weights.resize(trunc.max_points);
    s.truncation.truncated_tail_mass_estimate = m.abs_mass_below(trunc.delta) + dropped;
    return s;
  }

  sample_point_process_into(m, trunc, rng, s.weights);
  double cutoff = trunc.delta;
  if (!m.is_finite() && s.weights.size() == trunc.max_points && !s.weights.empty())
    cutoff = std::max(cutoff, std::abs(s.weights.back()));
  s.truncation.truncated_tail_mass_estimate = m.abs_mass_below(cutoff);
  return s;
}

double sum_weights(const PointProcessSample& sample, const std::function<double(double)>& u) {
  double s = 0.0;
  for (double w : sample.weights) s += u(w);
  return s;
}

std::complex<double> id_characteristic_function(const LevyMeasure& m, double b, double t) {
  if (t == 0.0) return 1.0;
  const auto& v = m.variant();
  cplx exponent(0.0, t * b);
  if (const auto* a = std::get_if<AlphaStable>(&v)) {
    exponent += a->theta * stable_half_exponent(a->alpha, t) +
                (1.0 - a->theta) * stable_half_exponent(a->alpha, -t);
  } else if (const auto* p = std::get_if<PointMass>(&v)) {
    exponent += p->lambda * (std::exp(cplx(0.0, t)) - 1.0 - cplx(0.0, 0.5 * t));
  } else if (const auto* g = std::get_if<ScaledGaussian>(&v)) {
    exponent += gaussian_exponent(g->lambda, t);
  } else {
    for (const auto& atom : std::get<FiniteDiscrete>(v).atoms) {
      const double x = atom.location;
      exponent += atom.mass * (std::exp(cplx(0.0, t * x)) - 1.0 - cplx(0.0, t * x / (1.0 + x * x)));
    }
  }
  return std::exp(exponent);
}

nlohmann::json C1Report::to_json() const {
  nlohmann::json sum = {{"holds", sum_condition.holds}};
  if (std::isfinite(sum_condition.integral_value))
    sum["integral_value"] = sum_condition.integral_value;
  else
    sum["integral_value"] = "inf";
  return {{"sum_condition", sum},
          {"decay", {{"epsilon", decay.epsilon}, {"C", decay.C}, {"holds", decay.holds}}},
          {"passes", passes()},
          {"notes", notes}};
}

C1Report verify_c1(const LevyMeasure& m) {
  C1Report r;
  r.sum_condition.integral_value = m.abs_min_one_integral();
  r.sum_condition.holds = std::isfinite(r.sum_condition.integral_value);

  const auto& v = m.variant();
  constexpr double kTMin = 0.25;
  if (const auto* a = std::get_if<AlphaStable>(&v)) {
    // m(|x| >= t) = t^{-alpha} exactly.
    r.decay = {a->alpha, 1.0, true};
    if (!r.sum_condition.holds)
      r.notes = "alpha >= 1: the integral of min(1,|x|) dm diverges, so the points are not "
                "almost surely summable and the loop weights of the limiting tree are undefined";
    else
      r.notes = "alpha in (0,1): summable points, tail exponent alpha";
  } else if (const auto* p = std::get_if<PointMass>(&v)) {
    // Tail is lambda on (1/4, 1] and 0 beyond; sup of tail * t is lambda.
    r.decay = {1.0, p->lambda > 0.0 ? p->lambda : 1.0, true};
    r.notes = "bounded support: any epsilon > 0 is admissible";
  } else if (const auto* g = std::get_if<ScaledGaussian>(&v)) {
    // C = sup_{t > 1/4} t * m(|x| >= t); the product is unimodal in t.
    auto f = [&](double t) { return t * m.tail_mass(t); };
    double lo = kTMin, hi = kTMin + 40.0 / std::sqrt(g->lambda);
    constexpr double kInvPhi = 0.6180339887498949;
    for (int it = 0; it < 200; ++it) {
      const double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
      if (f(x1) < f(x2)) lo = x1; else hi = x2;
    }
    const double c = std::max(f(0.5 * (lo + hi)), f(kTMin));
    r.decay = {1.0, c * (1.0 + 1e-9), true};
    r.notes = "Gaussian tails dominate every power: any epsilon > 0 is admissible";
  } else {
    double c = 0.0;
    for (const auto& atom : std::get<FiniteDiscrete>(v).atoms) {
      const double t = std::abs(atom.location);
      if (t > kTMin) c = std::max(c, t * m.tail_mass(t));
    }
    r.decay = {1.0, c > 0.0 ? c : 1.0, true};
    r.notes = "bounded support: any epsilon > 0 is admissible";
  }
  return r;
}

}  // namespace lapspec
