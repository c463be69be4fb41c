#include "lapspec/rde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "lapspec/parallel.hpp"
#include "lapspec/quadrature.hpp"
#include "lapspec/random.hpp"

namespace lapspec {

namespace {

constexpr double kDenominatorFloor = 1e-14;
constexpr double kHerglotzSlack = 1e-12;
constexpr std::size_t kBlock = 256;
constexpr std::size_t kMemoryBudget = std::size_t{512} << 20;
constexpr std::size_t kFreeConvolutionNodes = 64;
constexpr std::size_t kFreeConvolutionMaxIterations = 10000;

bool in_herglotz_region(Complex s, Complex z) {
  return s.imag() > 0.0 && std::abs(s) * z.imag() <= 1.0 + kHerglotzSlack;
}

[[noreturn]] void herglotz_violation(Complex s, Complex z) {
  throw std::logic_error("RDE value left the Herglotz region: s = (" + std::to_string(s.real()) +
                         ", " + std::to_string(s.imag()) + ") at z = (" + std::to_string(z.real()) +
                         ", " + std::to_string(z.imag()) + ")");
}

// One synchronous sweep from `in` into `out`; draws for element i come only
// from stream (kind, sweep, i), never from the points of the population.
void sweep_into(const Population& in, Population& out, const LevyMeasure& m,
                const TruncationPolicy& policy, const RdeConfig& cfg, std::uint64_t seed,
                std::uint64_t kind, std::uint64_t sweep, std::atomic<std::size_t>& guard_hits) {
  const std::size_t n = in.size();
  const std::size_t g = in.grid_size();
  const auto& points = in.points();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, cfg.workers, [&](std::size_t b) {
    std::vector<double> ys, ytilde;
    std::vector<std::size_t> idx;
    std::vector<Complex> acc(g);
    std::size_t hits = 0;
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      RandomStream rng(seed, derive_stream_id(kind, sweep, i));
      Complex* dst = out.element(i);
      if (cfg.damping > 0.0 && rng.uniform() < cfg.damping) {
        std::copy(in.element(i), in.element(i) + g, dst);
        continue;
      }
      sample_point_process_into(m, policy, rng, ys);
      idx.resize(ys.size());
      for (auto& k : idx) k = rng.index(n);
      std::fill(acc.begin(), acc.end(), Complex(0.0));

      if (cfg.variant == RdeVariant::dependent) {
        for (std::size_t k = 0; k < ys.size(); ++k) {
          const double y = ys[k];
          const Complex* s = in.element(idx[k]);
          for (std::size_t j = 0; j < g; ++j) {
            Complex den = s[j] * y - 1.0;
            if (std::abs(den) < kDenominatorFloor) {
              ++hits;
              den = kDenominatorFloor;
            }
            acc[j] += y * reciprocal(den);
          }
        }
        for (std::size_t j = 0; j < g; ++j) {
          dst[j] = -reciprocal(points[j] - acc[j]);
          if (!in_herglotz_region(dst[j], points[j])) herglotz_violation(dst[j], points[j]);
        }
      } else {
        sample_point_process_into(m, policy, rng, ytilde);
        double drift = 0.0;
        for (double y : ytilde) drift += y;
        for (std::size_t k = 0; k < ys.size(); ++k) {
          const double y2 = ys[k] * ys[k];
          const Complex* s = in.element(idx[k]);
          for (std::size_t j = 0; j < g; ++j) acc[j] += y2 * s[j];
        }
        for (std::size_t j = 0; j < g; ++j) {
          dst[j] = -reciprocal(points[j] + drift + acc[j]);
          if (!in_herglotz_region(dst[j], points[j])) herglotz_violation(dst[j], points[j]);
        }
      }
    }
    if (hits) guard_hits += hits;
  });
}

TruncationPolicy policy_for(const LevyMeasure& m, const RdeConfig& cfg) {
  TruncationPolicy p = cfg.truncation ? *cfg.truncation : default_truncation(m);
  p.laplacian_use = true;
  return p;
}

// Per-element sup over all points of |a_i - b_i|.
void element_sups(const Population& a, const Population& b, std::vector<double>& out) {
  out.assign(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Complex* x = a.element(i);
    const Complex* y = b.element(i);
    double best = 0.0;
    for (std::size_t j = 0; j < a.grid_size(); ++j) best = std::max(best, std::abs(x[j] - y[j]));
    out[i] = best;
  }
}

const char* variant_name(RdeVariant v) {
  return v == RdeVariant::dependent ? "dependent" : "independent";
}

}  // namespace

void RdeConfig::validate() const {
  if (pop_size < 2) throw std::invalid_argument("RdeConfig: pop_size must be >= 2");
  if (iterations < 1) throw std::invalid_argument("RdeConfig: iterations must be >= 1");
  if (burn_in >= iterations) throw std::invalid_argument("RdeConfig: burn_in must be < iterations");
  if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("RdeConfig: damping must lie in [0, 1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("RdeConfig: tolerance must be positive");
  if (truncation && truncation->delta < 0.0) throw std::invalid_argument("RdeConfig: negative delta");
}

nlohmann::json RdeConfig::to_json() const {
  nlohmann::json j{{"pop_size", pop_size},
                   {"iterations", iterations},
                   {"burn_in", burn_in},
                   {"damping", damping},
                   {"variant", variant_name(variant)},
                   {"track_convergence", track_convergence},
                   {"tolerance", tolerance},
                   {"workers", workers}};
  if (truncation) {
    j["truncation"] = {{"delta", truncation->delta}};
    if (truncation->max_points != std::numeric_limits<std::size_t>::max())
      j["truncation"]["max_points"] = truncation->max_points;
  } else {
    j["truncation"] = "default";
  }
  return j;
}

Population::Population(std::vector<Complex> points, std::size_t size)
    : points_(std::move(points)), size_(size), values_(size * points_.size()) {}

void Population::check_herglotz() const {
  for (std::size_t i = 0; i < size_; ++i)
    for (std::size_t j = 0; j < points_.size(); ++j)
      if (!in_herglotz_region(value(i, j), points_[j])) herglotz_violation(value(i, j), points_[j]);
}

Population init_population(const std::vector<Complex>& points, std::size_t size) {
  for (const auto& z : points)
    if (!(z.imag() > 0.0)) throw std::invalid_argument("init_population: Im z must be positive");
  Population p(points, size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < points.size(); ++j) p.value(i, j) = -reciprocal(points[j]);
  return p;
}

Population init_population(const ZGrid& grid, std::size_t size) {
  return init_population(grid.points(), size);
}

Population iterate_rde(const Population& pop, const LevyMeasure& m, const RdeConfig& cfg,
                       std::uint64_t seed, std::uint64_t sweep, RdeStepStats* stats) {
  if (!(cfg.damping >= 0.0 && cfg.damping < 1.0))
    throw std::invalid_argument("iterate_rde: damping must lie in [0, 1)");
  Population out(pop.points(), pop.size());
  std::atomic<std::size_t> hits{0};
  sweep_into(pop, out, m, policy_for(m, cfg), cfg, seed, stream_kind::kRdeSweep, sweep, hits);
  if (stats) stats->guard_hits += hits.load();
  return out;
}

StieltjesEstimate solve_rde(const LevyMeasure& m, const ZGrid& grid, const RdeConfig& cfg,
                            std::uint64_t seed) {
  cfg.validate();
  const C1Report c1 = verify_c1(m);
  if (!c1.passes())
    throw C1RefusalError(
        "solve_rde: measure " + m.kind() +
            " fails the summability/decay check (integral of min(1,|x|) finite and "
            "m(|x| > t) <= C t^-eps for large t); the Laplacian limit and its RDE are "
            "only established under that condition. " + c1.notes,
        c1);

  const TruncationPolicy policy = policy_for(m, cfg);
  const std::size_t n = cfg.pop_size;
  const std::size_t total_points = grid.size();
  const std::size_t arrays = cfg.track_convergence ? 4 : 2;
  const std::size_t chunk =
      std::clamp<std::size_t>(kMemoryBudget / (n * sizeof(Complex) * arrays), 1, total_points);
  const std::size_t chunks = (total_points + chunk - 1) / chunk;
  const std::size_t averaged = cfg.iterations - cfg.burn_in;

  StieltjesEstimate est(grid);
  std::atomic<std::size_t> hits{0};
  // sups[t * n + i]: running max over chunks of |main_i - shadow_i| after sweep t.
  std::vector<float> sups;
  std::vector<double> trace;
  if (cfg.track_convergence) {
    if (chunks > 1) sups.assign(cfg.iterations * n, 0.0f);
    trace.assign(cfg.iterations, 0.0);
  }
  std::vector<double> element_sup;

  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = c * chunk;
    const std::size_t hi = std::min(total_points, lo + chunk);
    std::vector<Complex> pts(grid.points().begin() + lo, grid.points().begin() + hi);
    const std::size_t g = pts.size();

    Population main = init_population(pts, n);
    Population next(pts, n);
    std::optional<Population> shadow, shadow_next;
    if (cfg.track_convergence) {
      shadow.emplace(pts, n);
      shadow_next.emplace(pts, n);
      sweep_into(main, *shadow, m, policy, cfg, seed, stream_kind::kRdeShadowStart, 0, hits);
    }

    std::vector<Complex> x0(g), sum_of_means(g, 0.0);
    for (std::size_t j = 0; j < g; ++j) x0[j] = -reciprocal(pts[j]);

    for (std::size_t t = 0; t < cfg.iterations; ++t) {
      sweep_into(main, next, m, policy, cfg, seed, stream_kind::kRdeSweep, t, hits);
      std::swap(main, next);
      if (cfg.track_convergence) {
        sweep_into(*shadow, *shadow_next, m, policy, cfg, seed, stream_kind::kRdeSweep, t, hits);
        std::swap(*shadow, *shadow_next);
        element_sups(main, *shadow, element_sup);
        if (chunks > 1) {
          float* row = sups.data() + t * n;
          for (std::size_t i = 0; i < n; ++i) row[i] = std::max(row[i], static_cast<float>(element_sup[i]));
        } else {
          double s = 0.0;
          for (double v : element_sup) s += v;
          trace[t] = s / static_cast<double>(n);
        }
      }
      if (t >= cfg.burn_in) {
        // Shifted sums: exactly x0 when every element equals x0.
        std::vector<Complex> diff(g, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const Complex* s = main.element(i);
          for (std::size_t j = 0; j < g; ++j) diff[j] += s[j] - x0[j];
        }
        for (std::size_t j = 0; j < g; ++j) sum_of_means[j] += diff[j] / static_cast<double>(n);
      }
    }

    for (std::size_t j = 0; j < g; ++j) {
      est.mean[lo + j] = x0[j] + sum_of_means[j] / static_cast<double>(averaged);
      Complex centre = 0.0;
      for (std::size_t i = 0; i < n; ++i) centre += main.value(i, j) - x0[j];
      centre = x0[j] + centre / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += std::norm(main.value(i, j) - centre);
      est.std_error[lo + j] = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
      est.iterations[lo + j] = cfg.iterations;
      if (!in_herglotz_region(est.mean[lo + j], pts[j])) herglotz_violation(est.mean[lo + j], pts[j]);
    }
  }

  if (cfg.track_convergence && chunks > 1)
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += sups[t * n + i];
      trace[t] = s / static_cast<double>(n);
    }

  auto& md = est.metadata;
  md["solver"] = "rde";
  md["config"] = cfg.to_json();
  md["measure"] = m.to_json();
  md["seed"] = seed;
  md["c1"] = c1.to_json();
  md["guard_hits"] = hits.load();
  md["grid_chunks"] = chunks;
  md["truncation"] = {{"delta", policy.delta}};
  if (policy.delta > 0.0) md["truncation"]["abs_mass_below_delta"] = m.abs_mass_below(policy.delta);
  if (policy.max_points != std::numeric_limits<std::size_t>::max())
    md["truncation"]["max_points"] = policy.max_points;
  if (cfg.track_convergence) {
    md["distance_trace"] = trace;
    md["final_distance"] = trace.back();
    md["converged"] = trace.back() < cfg.tolerance;
  } else {
    md["converged"] = nullptr;
  }
  return est;
}

StieltjesEstimate solve_free_convolution(const ZGrid& grid, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_free_convolution: tol must be positive");
  const GaussHermiteRule& rule = gauss_hermite(kFreeConvolutionNodes);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  std::vector<double> x(rule.nodes.size()), w(rule.nodes.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = std::sqrt(2.0) * rule.nodes[k];
    w[k] = rule.weights[k] * inv_sqrt_pi;
  }

  auto image = [&](Complex z, Complex s) {
    Complex f = 0.0;
    const Complex shift = z + s;
    for (std::size_t k = 0; k < x.size(); ++k) f += w[k] * reciprocal(x[k] - shift);
    return f;
  };

  StieltjesEstimate est(grid);
  double max_residual = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Complex z = grid[j];
    Complex s = -reciprocal(z);
    std::size_t it = 0;
    for (;; ++it) {
      if (it == kFreeConvolutionMaxIterations)
        throw std::runtime_error("solve_free_convolution: no convergence after 10^4 iterations at z = (" +
                                 std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
      // Stop on the residual |F(s) - s|; the damped step is half of it.
      const Complex f = image(z, s);
      const double residual = std::abs(f - s);
      if (residual < tol) {
        max_residual = std::max(max_residual, residual);
        break;
      }
      s = 0.5 * s + 0.5 * f;
      if (!(s.imag() >= 0.0))
        throw std::runtime_error("solve_free_convolution: iterate left the upper half plane");
    }
    est.mean[j] = s;
    est.iterations[j] = it + 1;
  }
  est.metadata["solver"] = "free_convolution";
  est.metadata["quadrature_nodes"] = kFreeConvolutionNodes;
  est.metadata["tolerance"] = tol;
  // max over z of |F(s) - s| at the returned s
  est.metadata["max_residual"] = max_residual;
  return est;
}

double population_distance(const Population& a, const Population& b,
                           const std::vector<std::size_t>& indices) {
  if (a.size() != b.size() || a.grid_size() != b.grid_size())
    throw std::invalid_argument("population_distance: size mismatch");
  if (a.size() == 0) return 0.0;
  std::vector<std::size_t> sel = indices;
  if (sel.empty()) {
    sel.resize(a.grid_size());
    for (std::size_t j = 0; j < sel.size(); ++j) sel[j] = j;
  }
  for (std::size_t j : sel)
    if (j >= a.grid_size()) throw std::out_of_range("population_distance: point index out of range");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = 0.0;
    for (std::size_t j : sel) best = std::max(best, std::abs(a.value(i, j) - b.value(i, j)));
    total += best;
  }
  return total / static_cast<double>(a.size());
}

}  // namespace lapspec
