#include "lapspec/ensembles.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "text_format.hpp"

namespace lapspec {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

void EnsembleSpec::validate() const {
  if (n < 2) throw std::invalid_argument("ensemble: n must be at least 2");
  std::visit(overloaded{
                 [](const LevyPareto& p) {
                   if (!(p.alpha > 0.0 && p.alpha < 1.0))
                     throw std::invalid_argument(
                         "levy_pareto: alpha must lie in (0, 1); for alpha in [1, 2) the row "
                         "sums are not summable and the Laplacian limit does not exist");
                   if (!(p.theta >= 0.0 && p.theta <= 1.0))
                     throw std::invalid_argument("levy_pareto: theta must lie in [0, 1]");
                 },
                 [this](const ErdosRenyi& e) {
                   if (!(e.lambda > 0.0)) throw std::invalid_argument("erdos_renyi: lambda > 0 required");
                   if (!(static_cast<double>(n) > e.lambda))
                     throw std::invalid_argument("erdos_renyi: n must exceed lambda");
                 },
                 [this](const SparseGaussian& g) {
                   if (!(g.lambda > 0.0)) throw std::invalid_argument("sparse_gaussian: lambda > 0 required");
                   if (!(static_cast<double>(n) > g.lambda))
                     throw std::invalid_argument("sparse_gaussian: n must exceed lambda");
                 },
             },
             law);
}

std::string EnsembleSpec::kind() const {
  return std::visit(overloaded{
                        [](const LevyPareto&) { return std::string("levy_pareto"); },
                        [](const ErdosRenyi&) { return std::string("erdos_renyi"); },
                        [](const SparseGaussian&) { return std::string("sparse_gaussian"); },
                    },
                    law);
}

double EnsembleSpec::scaling() const {
  if (const auto* p = std::get_if<LevyPareto>(&law))
    return std::pow(static_cast<double>(n), 1.0 / p->alpha);
  return 1.0;
}

LevyMeasure EnsembleSpec::limit_measure() const {
  return std::visit(overloaded{
                        [](const LevyPareto& p) { return LevyMeasure::alpha_stable(p.alpha, p.theta); },
                        [](const ErdosRenyi& e) { return LevyMeasure::point_mass(e.lambda); },
                        [](const SparseGaussian& g) { return LevyMeasure::scaled_gaussian(g.lambda); },
                    },
                    law);
}

double EnsembleSpec::scaled_entry_tail(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("scaled_entry_tail: t must be positive");
  const double nn = static_cast<double>(n);
  return std::visit(overloaded{
                        [&](const LevyPareto& p) { return std::min(nn, std::pow(t, -p.alpha)); },
                        [&](const ErdosRenyi& e) { return t <= 1.0 ? e.lambda : 0.0; },
                        [&](const SparseGaussian& g) {
                          return g.lambda * std::erfc(t * std::sqrt(0.5 * g.lambda));
                        },
                    },
                    law);
}

double EnsembleSpec::sample_entry(RandomStream& rng) const {
  const double nn = static_cast<double>(n);
  return std::visit(overloaded{
                        [&](const LevyPareto& p) {
                          // |xi| / a_n = (U n)^{-1/alpha}
                          const double mag = std::pow(rng.uniform() * nn, -1.0 / p.alpha);
                          return rng.uniform() < p.theta ? mag : -mag;
                        },
                        [&](const ErdosRenyi& e) { return rng.uniform() < e.lambda / nn ? 1.0 : 0.0; },
                        [&](const SparseGaussian& g) {
                          if (rng.uniform() >= g.lambda / nn) return 0.0;
                          return rng.normal() / std::sqrt(g.lambda);
                        },
                    },
                    law);
}

nlohmann::json EnsembleSpec::to_json() const {
  nlohmann::json j = {{"kind", kind()}, {"n", n}};
  std::visit(overloaded{
                 [&](const LevyPareto& p) {
                   j["alpha"] = p.alpha;
                   j["theta"] = p.theta;
                 },
                 [&](const ErdosRenyi& e) { j["lambda"] = e.lambda; },
                 [&](const SparseGaussian& g) { j["lambda"] = g.lambda; },
             },
             law);
  return j;
}

EnsembleSpec EnsembleSpec::from_json(const nlohmann::json& j) {
  EnsembleSpec s;
  s.n = j.at("n").get<std::size_t>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "levy_pareto")
    s.law = LevyPareto{j.at("alpha").get<double>(), j.value("theta", 0.5)};
  else if (kind == "erdos_renyi")
    s.law = ErdosRenyi{j.at("lambda").get<double>()};
  else if (kind == "sparse_gaussian")
    s.law = SparseGaussian{j.at("lambda").get<double>()};
  else
    throw std::invalid_argument("unknown ensemble kind '" + kind + "'");
  s.validate();
  return s;
}

double SymmetricMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double SymmetricMatrix::frobenius_norm_squared() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < i; ++j) s += 2.0 * (*this)(i, j) * (*this)(i, j);
    s += (*this)(i, i) * (*this)(i, i);
  }
  return s;
}

std::vector<double> SymmetricMatrix::dense() const {
  std::vector<double> out(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) out[i * n_ + j] = out[j * n_ + i] = (*this)(i, j);
  return out;
}

std::string SymmetricMatrix::to_triples() const {
  std::string out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (const double v = (*this)(i, j); v != 0.0) out += std::to_string(i) + " " + std::to_string(j) + " " + detail::g17(v) + "\n";
  return out;
}

SymmetricMatrix sample_matrix(const EnsembleSpec& spec, RandomStream& rng) {
  spec.validate();
  SymmetricMatrix a(spec.n);
  for (std::size_t i = 1; i < spec.n; ++i)
    for (std::size_t j = 0; j < i; ++j) a.set(i, j, spec.sample_entry(rng));
  return a;
}

LaplacianMatrix laplacian(const SymmetricMatrix& a) {
  const std::size_t n = a.n();
  for (std::size_t i = 0; i < n; ++i)
    if (a(i, i) != 0.0) throw std::invalid_argument("laplacian: input must have a zero diagonal");
  SymmetricMatrix l = a;
  const auto sums = row_sums(a);
  for (std::size_t i = 0; i < n; ++i) l.set(i, i, -sums[i]);
  return LaplacianMatrix(std::move(l));
}

std::vector<double> row_sums(const SymmetricMatrix& a) {
  const std::size_t n = a.n();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum s;
    for (std::size_t j = 0; j < n; ++j) s.add(a(i, j));
    out[i] = s.value();
  }
  return out;
}

SymmetricMatrix independent_diagonal_laplacian(const SymmetricMatrix& a, const EnsembleSpec& spec,
                                               RandomStream& rng) {
  if (spec.n != a.n()) throw std::invalid_argument("independent_diagonal_laplacian: size mismatch");
  spec.validate();
  SymmetricMatrix out = a;
  const std::size_t n = a.n();
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum s;
    for (std::size_t k = 0; k + 1 < n; ++k) s.add(spec.sample_entry(rng));
    out.set(i, i, -s.value());
  }
  return out;
}

}  // namespace lapspec
