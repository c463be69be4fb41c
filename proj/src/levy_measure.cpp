#include "lapspec/levy_measure.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lapspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const LevyMeasure::Variant& v) {
  std::visit(overloaded{
                 [](const AlphaStable& a) {
                   if (!(a.alpha > 0.0 && a.alpha < 2.0))
                     throw std::invalid_argument("alpha_stable: alpha must lie in (0, 2)");
                   if (!(a.theta >= 0.0 && a.theta <= 1.0))
                     throw std::invalid_argument("alpha_stable: theta must lie in [0, 1]");
                 },
                 [](const PointMass& p) {
                   if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
                     throw std::invalid_argument("point_mass: lambda must be finite and >= 0");
                 },
                 [](const ScaledGaussian& g) {
                   if (!(g.lambda > 0.0) || !std::isfinite(g.lambda))
                     throw std::invalid_argument("scaled_gaussian: lambda must be finite and > 0");
                 },
                 [](const FiniteDiscrete& f) {
                   for (const auto& a : f.atoms) {
                     if (a.location == 0.0 || !std::isfinite(a.location))
                       throw std::invalid_argument("finite_discrete: atom location must be finite and nonzero");
                     if (!(a.mass > 0.0) || !std::isfinite(a.mass))
                       throw std::invalid_argument("finite_discrete: atom mass must be finite and > 0");
                   }
                 },
             },
             v);
}

// E|Y| 1{|Y| < delta} for Y ~ N(0, 1/lambda).
double gaussian_abs_below(double lambda, double delta) {
  const double sigma = 1.0 / std::sqrt(lambda);
  return sigma * std::sqrt(2.0 / std::numbers::pi) * -std::expm1(-0.5 * delta * delta * lambda);
}

}  // namespace

LevyMeasure::LevyMeasure(Variant v) : v_(std::move(v)) { validate(v_); }

LevyMeasure LevyMeasure::alpha_stable(double alpha, double theta) {
  return LevyMeasure(AlphaStable{alpha, theta});
}
LevyMeasure LevyMeasure::point_mass(double lambda) { return LevyMeasure(PointMass{lambda}); }
LevyMeasure LevyMeasure::scaled_gaussian(double lambda) {
  return LevyMeasure(ScaledGaussian{lambda});
}
LevyMeasure LevyMeasure::finite_discrete(std::vector<Atom> atoms) {
  return LevyMeasure(FiniteDiscrete{std::move(atoms)});
}

std::string LevyMeasure::kind() const {
  return std::visit(overloaded{
                        [](const AlphaStable&) { return std::string("alpha_stable"); },
                        [](const PointMass&) { return std::string("point_mass"); },
                        [](const ScaledGaussian&) { return std::string("scaled_gaussian"); },
                        [](const FiniteDiscrete&) { return std::string("finite_discrete"); },
                    },
                    v_);
}

double LevyMeasure::total_mass() const {
  return std::visit(overloaded{
                        [](const AlphaStable&) { return kInf; },
                        [](const PointMass& p) { return p.lambda; },
                        [](const ScaledGaussian& g) { return g.lambda; },
                        [](const FiniteDiscrete& f) {
                          double s = 0.0;
                          for (const auto& a : f.atoms) s += a.mass;
                          return s;
                        },
                    },
                    v_);
}

double LevyMeasure::tail_mass(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("tail_mass: t must be positive");
  return std::visit(overloaded{
                        [t](const AlphaStable& a) { return std::pow(t, -a.alpha); },
                        [t](const PointMass& p) { return t <= 1.0 ? p.lambda : 0.0; },
                        [t](const ScaledGaussian& g) {
                          return g.lambda * std::erfc(t * std::sqrt(0.5 * g.lambda));
                        },
                        [t](const FiniteDiscrete& f) {
                          double s = 0.0;
                          for (const auto& a : f.atoms)
                            if (std::abs(a.location) >= t) s += a.mass;
                          return s;
                        },
                    },
                    v_);
}

double LevyMeasure::abs_mass_below(double delta) const {
  if (delta <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [delta](const AlphaStable& a) {
                          if (a.alpha >= 1.0) return kInf;
                          return a.alpha / (1.0 - a.alpha) * std::pow(delta, 1.0 - a.alpha);
                        },
                        [delta](const PointMass& p) { return delta > 1.0 ? p.lambda : 0.0; },
                        [delta](const ScaledGaussian& g) {
                          return g.lambda * gaussian_abs_below(g.lambda, delta);
                        },
                        [delta](const FiniteDiscrete& f) {
                          double s = 0.0;
                          for (const auto& a : f.atoms)
                            if (std::abs(a.location) < delta) s += a.mass * std::abs(a.location);
                          return s;
                        },
                    },
                    v_);
}

double LevyMeasure::abs_min_one_integral() const {
  return std::visit(overloaded{
                        [](const AlphaStable& a) {
                          // alpha/(1-alpha) from (0,1) plus 1 from [1, inf)
                          if (a.alpha >= 1.0) return kInf;
                          return 1.0 / (1.0 - a.alpha);
                        },
                        [](const PointMass& p) { return p.lambda; },
                        [](const ScaledGaussian& g) {
                          return g.lambda * (gaussian_abs_below(g.lambda, 1.0) +
                                             std::erfc(std::sqrt(0.5 * g.lambda)));
                        },
                        [](const FiniteDiscrete& f) {
                          double s = 0.0;
                          for (const auto& a : f.atoms)
                            s += a.mass * std::min(1.0, std::abs(a.location));
                          return s;
                        },
                    },
                    v_);
}

nlohmann::json LevyMeasure::to_json() const {
  return std::visit(overloaded{
                        [](const AlphaStable& a) {
                          return nlohmann::json{
                              {"kind", "alpha_stable"}, {"alpha", a.alpha}, {"theta", a.theta}};
                        },
                        [](const PointMass& p) {
                          return nlohmann::json{{"kind", "point_mass"}, {"lambda", p.lambda}};
                        },
                        [](const ScaledGaussian& g) {
                          return nlohmann::json{{"kind", "scaled_gaussian"}, {"lambda", g.lambda}};
                        },
                        [](const FiniteDiscrete& f) {
                          nlohmann::json atoms = nlohmann::json::array();
                          for (const auto& a : f.atoms) atoms.push_back({a.location, a.mass});
                          return nlohmann::json{{"kind", "finite_discrete"}, {"atoms", atoms}};
                        },
                    },
                    v_);
}

LevyMeasure LevyMeasure::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "alpha_stable")
    return alpha_stable(j.at("alpha").get<double>(), j.value("theta", 0.5));
  if (kind == "point_mass") return point_mass(j.at("lambda").get<double>());
  if (kind == "scaled_gaussian") return scaled_gaussian(j.at("lambda").get<double>());
  if (kind == "finite_discrete") {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    return finite_discrete(std::move(atoms));
  }
  throw std::invalid_argument("unknown measure kind '" + kind + "'");
}

}  // namespace lapspec
