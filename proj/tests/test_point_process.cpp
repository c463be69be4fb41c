#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "lapspec/point_process.hpp"
#include "oracles.hpp"

using namespace lapspec;
using Complex = std::complex<double>;

namespace {

struct Moments {
  double mean = 0, sd = 0;
};

Moments campbell(const LevyMeasure& m, const std::function<double(double)>& u, int k, std::uint64_t seed) {
  const auto trunc = default_truncation(m);
  double s = 0, s2 = 0;
  for (int i = 0; i < k; ++i) {
    RandomStream rng(seed, derive_stream_id(stream_kind::kPointProcess, i));
    const double v = sum_weights(sample_point_process(m, trunc, rng), u);
    s += v;
    s2 += v * v;
  }
  Moments r;
  r.mean = s / k;
  r.sd = std::sqrt(std::max(0.0, s2 / k - r.mean * r.mean));
  return r;
}

// Integral over x > 0 of (e^{itx} - 1 - itx/(1+x^2)) alpha x^{-1-alpha} dx,
// for t > 0, from Fourier integrals: the cosine part is integrated by parts.
Complex stable_half_exponent_oracle(double alpha, double t) {
  boost::math::quadrature::ooura_fourier_sin<double> sin_integrator;
  const auto one_minus_cos = sin_integrator.integrate([&](double x) { return std::pow(x, -alpha); }, t);
  const auto sine = sin_integrator.integrate([&](double x) { return std::pow(x, -1.0 - alpha); }, t);
  boost::math::quadrature::exp_sinh<double> es;
  const double compensator =
      es.integrate([&](double x) { return std::pow(x, -alpha) / (1.0 + x * x); }, 0.0, INFINITY);
  const double re = -t * one_minus_cos.first;  // alpha * (t / alpha) * ...
  const double im = alpha * sine.first - alpha * t * compensator;
  return {re, im};
}

}  // namespace

TEST_CASE("empty process for zero intensity") {
  RandomStream rng(1, 1);
  const auto s = sample_point_process(LevyMeasure::point_mass(0.0), {}, rng);
  CHECK(s.weights.empty());
  CHECK(s.truncation.truncated_tail_mass_estimate == 0.0);
  CHECK(sum_weights(s, [](double x) { return x; }) == 0.0);
}

TEST_CASE("point mass count is Poisson(2) in mean") {
  const auto m = LevyMeasure::point_mass(2.0);
  const auto r = campbell(m, [](double) { return 1.0; }, 100000, 11);
  CHECK(std::abs(r.mean - 2.0) <= 3 * r.sd / std::sqrt(100000.0));
}

TEST_CASE("count law passes a chi-square fit to Poisson at the 1% level") {
  for (const auto& m : {LevyMeasure::point_mass(2.0), LevyMeasure::scaled_gaussian(3.0),
                        LevyMeasure::finite_discrete({{1.0, 0.5}, {-2.0, 1.0}})}) {
    const double mass = m.total_mass();
    const int k = 20000;
    const int cells = 10;  // 0..8 and >= 9
    std::vector<double> observed(cells, 0.0);
    RandomStream rng(9, 9);
    for (int i = 0; i < k; ++i) {
      const auto s = sample_point_process(m, default_truncation(m), rng);
      ++observed[std::min<std::size_t>(s.weights.size(), cells - 1)];
    }
    const boost::math::poisson_distribution<> poi(mass);
    double chi2 = 0.0, tail = 1.0;
    for (int c = 0; c < cells; ++c) {
      const double p = c + 1 < cells ? boost::math::pdf(poi, c) : tail;
      tail -= p;
      const double e = p * k;
      chi2 += (observed[c] - e) * (observed[c] - e) / e;
    }
    const double critical = boost::math::quantile(boost::math::chi_squared(cells - 1), 0.99);
    CHECK_MESSAGE(chi2 < critical, m.kind() << " chi2 " << chi2);
  }
}

TEST_CASE("largest alpha-stable point follows the Frechet law") {
  const auto m = LevyMeasure::alpha_stable(0.5, 1.0);
  TruncationPolicy p;
  p.delta = 1e-3;
  std::vector<double> largest;
  for (int i = 0; i < 10000; ++i) {
    RandomStream rng(21, i);
    const auto s = sample_point_process(m, p, rng);
    REQUIRE(!s.weights.empty());
    largest.push_back(s.weights.front());
  }
  const double d = oracle::ks_statistic(largest, [](double x) { return std::exp(-1.0 / std::sqrt(x)); });
  CHECK(d < 1.628 / std::sqrt(10000.0));
}

TEST_CASE("samples are sorted by decreasing modulus and respect the cutoff") {
  const std::vector<LevyMeasure> ms = {LevyMeasure::alpha_stable(0.7, 0.3), LevyMeasure::scaled_gaussian(5.0),
                                       LevyMeasure::finite_discrete({{1.0, 1.0}, {-1.0, 1.0}, {0.5, 2.0}})};
  for (const auto& m : ms)
    for (int i = 0; i < 500; ++i) {
      RandomStream rng(4, i);
      TruncationPolicy p = default_truncation(m);
      p.delta = std::max(p.delta, 0.05);
      const auto s = sample_point_process(m, p, rng);
      for (std::size_t k = 0; k < s.weights.size(); ++k) {
        CHECK(std::abs(s.weights[k]) >= p.delta);
        if (k + 1 < s.weights.size()) {
          const double a = s.weights[k], b = s.weights[k + 1];
          CHECK(std::abs(a) >= std::abs(b));
          if (std::abs(a) == std::abs(b)) CHECK(!(a < 0 && b > 0));
        }
      }
    }
}

TEST_CASE("Campbell means for sums of points") {
  SUBCASE("point mass, identity") {
    const auto r = campbell(LevyMeasure::point_mass(2.0), [](double x) { return x; }, 100000, 31);
    CHECK(std::abs(r.mean - 2.0) <= 3 * r.sd / std::sqrt(100000.0));
  }
  SUBCASE("scaled gaussian, square") {
    const auto r = campbell(LevyMeasure::scaled_gaussian(4.0), [](double x) { return x * x; }, 100000, 32);
    CHECK(std::abs(r.mean - 1.0) <= 3 * r.sd / std::sqrt(100000.0));
  }
  SUBCASE("scaled gaussian, absolute value") {
    // lambda E|N(0, 1/lambda)| = sqrt(2 lambda / pi)
    const auto r = campbell(LevyMeasure::scaled_gaussian(4.0), [](double x) { return std::abs(x); }, 100000, 33);
    CHECK(std::abs(r.mean - std::sqrt(8.0 / std::numbers::pi)) <= 3 * r.sd / std::sqrt(100000.0));
  }
}

TEST_CASE("doubling the alpha-stable point cap leaves the top points unchanged in law") {
  const auto m = LevyMeasure::alpha_stable(0.5, 0.5);
  for (std::size_t rank = 0; rank < 5; ++rank) {
    std::vector<double> small, large;
    for (int i = 0; i < 4000; ++i) {
      TruncationPolicy p{1e-3, 8, true};
      RandomStream r1(50, i), r2(51, i);
      small.push_back(std::abs(sample_point_process(m, p, r1).weights.at(rank)));
      p.max_points = 16;
      large.push_back(std::abs(sample_point_process(m, p, r2).weights.at(rank)));
    }
    // five ranks at an overall 1% level: Bonferroni, 0.2% each
    const double c = std::sqrt(-0.5 * std::log(0.002 / 2));
    CHECK(oracle::ks_two_sample(small, large) < c * std::sqrt(2.0 / 4000));
  }
  // same stream: the capped sample is a prefix of the larger one
  for (int i = 0; i < 100; ++i) {
    RandomStream r1(52, i), r2(52, i);
    const auto a = sample_point_process(m, {1e-3, 8, true}, r1).weights;
    const auto b = sample_point_process(m, {1e-3, 16, true}, r2).weights;
    REQUIRE(a.size() <= b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  }
}

TEST_CASE("sampling errors") {
  RandomStream rng(1, 1);
  CHECK_THROWS_AS(sample_point_process(LevyMeasure::alpha_stable(1.2, 0.5), {1e-3, 10, true}, rng), NotSummableError);
  CHECK_NOTHROW(sample_point_process(LevyMeasure::alpha_stable(1.2, 0.5), {1e-1, 10, false}, rng));
  CHECK_THROWS_AS(sample_point_process(LevyMeasure::alpha_stable(0.5, 0.5), {0.0, 10, true}, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(LevyMeasure::point_mass(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(LevyMeasure::alpha_stable(2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(LevyMeasure::finite_discrete({{0.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("tail and truncated masses in closed form") {
  const auto as = LevyMeasure::alpha_stable(0.5, 0.3);
  CHECK(std::isinf(as.total_mass()));
  CHECK(as.tail_mass(4.0) == doctest::Approx(0.5));
  CHECK(as.abs_mass_below(1e-2) == doctest::Approx(0.5 * std::pow(1e-2, 0.5) / 0.5));
  const auto pm = LevyMeasure::point_mass(3.0);
  CHECK(pm.total_mass() == 3.0);
  CHECK(pm.tail_mass(1.0) == 3.0);
  CHECK(pm.tail_mass(1.5) == 0.0);
  const auto sg = LevyMeasure::scaled_gaussian(4.0);
  CHECK(sg.tail_mass(0.5) == doctest::Approx(4.0 * std::erfc(0.5 * std::sqrt(2.0))));
  const auto fd = LevyMeasure::finite_discrete({{2.0, 1.5}, {-0.5, 0.25}});
  CHECK(fd.total_mass() == doctest::Approx(1.75));
  CHECK(fd.tail_mass(1.0) == doctest::Approx(1.5));
}

TEST_CASE("measure json round trip") {
  for (const auto& m : {LevyMeasure::alpha_stable(0.5, 0.25), LevyMeasure::point_mass(2.0),
                        LevyMeasure::scaled_gaussian(7.0), LevyMeasure::finite_discrete({{1.0, 2.0}, {-3.0, 0.5}})}) {
    const auto j = m.to_json();
    CHECK(LevyMeasure::from_json(j).to_json() == j);
  }
  CHECK(LevyMeasure::point_mass(2.0).to_json()["kind"] == "point_mass");
}

TEST_CASE("characteristic function examples") {
  CHECK(id_characteristic_function(LevyMeasure::alpha_stable(0.5, 0.5), 0.0, 0.0) == Complex(1.0));
  CHECK(id_characteristic_function(LevyMeasure::scaled_gaussian(2.0), 0.0, 0.0) == Complex(1.0));
  for (double lambda : {0.5, 2.0, 6.0})
    for (double t : {-3.0, -0.7, 0.4, 1.0, 2.5}) {
      const Complex poisson = std::exp(lambda * (std::exp(Complex(0, t)) - 1.0));
      CHECK(std::abs(id_characteristic_function(LevyMeasure::point_mass(lambda), lambda / 2, t) - poisson) < 1e-13);
      const double modulus = std::exp(lambda * (std::exp(-t * t / (2 * lambda)) - 1.0));
      CHECK(std::abs(std::abs(id_characteristic_function(LevyMeasure::scaled_gaussian(lambda), 0.0, t)) - modulus) <
            1e-10);
    }
}

TEST_CASE("scaled gaussian exponent matches adaptive quadrature") {
  for (double lambda : {0.5, 2.0, 100.0})
    for (double t : {-4.0, 0.3, 2.0, 5.0}) {
      const double sd = 1.0 / std::sqrt(lambda);
      const Complex ref = oracle::integrate_line([&](double x) {
        const double dens = oracle::normal_pdf(x / sd) / sd;
        return lambda * dens * (std::exp(Complex(0, t * x)) - 1.0 - Complex(0, t * x / (1 + x * x)));
      });
      const Complex got = std::log(id_characteristic_function(LevyMeasure::scaled_gaussian(lambda), 0.0, t));
      CHECK_MESSAGE(std::abs(got - ref) < 1e-8, "lambda " << lambda << " t " << t);
    }
}

TEST_CASE("alpha-stable exponent matches Fourier-integral oracle") {
  for (double alpha : {0.3, 0.5, 0.8})
    for (double theta : {0.0, 0.4, 1.0})
      for (double t : {0.5, 1.0, 3.0}) {
        const Complex pos = stable_half_exponent_oracle(alpha, t);
        const Complex neg = std::conj(pos);  // the x < 0 half at t equals the conjugate
        const Complex ref = theta * pos + (1 - theta) * neg;
        const auto m = LevyMeasure::alpha_stable(alpha, theta);
        const Complex got = std::log(id_characteristic_function(m, 0.0, t));
        CHECK_MESSAGE(std::abs(got - ref) < 1e-6 * std::max(1.0, std::abs(ref)),
                      "alpha " << alpha << " theta " << theta << " t " << t << " got " << got << " ref " << ref);
        const Complex at_minus = id_characteristic_function(m, 0.3, -t);
        CHECK(std::abs(at_minus - std::conj(id_characteristic_function(m, 0.3, t))) < 1e-12);
      }
}

TEST_CASE("characteristic function modulus and conjugate symmetry") {
  const std::vector<LevyMeasure> ms = {LevyMeasure::alpha_stable(0.5, 0.2), LevyMeasure::alpha_stable(1.0, 0.7),
                                       LevyMeasure::alpha_stable(1.5, 0.5), LevyMeasure::point_mass(3.0),
                                       LevyMeasure::scaled_gaussian(2.0),
                                       LevyMeasure::finite_discrete({{1.0, 1.0}, {-2.5, 0.5}})};
  for (const auto& m : ms)
    for (double t = -5.0; t <= 5.0; t += 0.37) {
      const Complex v = id_characteristic_function(m, 0.7, t);
      CHECK(std::abs(v) <= 1.0 + 1e-12);
      CHECK(std::abs(id_characteristic_function(m, 0.7, -t) - std::conj(v)) < 1e-12);
    }
}

TEST_CASE("condition C1 reports") {
  const auto pm = verify_c1(LevyMeasure::point_mass(2.0));
  CHECK(pm.passes());
  CHECK(pm.sum_condition.integral_value == doctest::Approx(2.0));
  const auto bad = verify_c1(LevyMeasure::alpha_stable(1.2, 0.5));
  CHECK_FALSE(bad.sum_condition.holds);
  CHECK(std::isinf(bad.sum_condition.integral_value));
  CHECK_FALSE(bad.passes());
  const auto sg = verify_c1(LevyMeasure::scaled_gaussian(1.0));
  CHECK(sg.passes());
  // E min(1, |Z|) = 2 (phi(0) - phi(1)) + P(|Z| > 1)
  const double expected = 2 * (oracle::normal_pdf(0.0) - oracle::normal_pdf(1.0)) + std::erfc(1 / std::sqrt(2.0));
  CHECK(sg.sum_condition.integral_value == doctest::Approx(expected).epsilon(1e-10));
  const auto as = verify_c1(LevyMeasure::alpha_stable(0.5, 0.5));
  CHECK(as.passes());
  CHECK(as.sum_condition.integral_value == doctest::Approx(2.0));
}

TEST_CASE("reported decay pairs bound the tail on t > 1/4") {
  const std::vector<LevyMeasure> ms = {LevyMeasure::alpha_stable(0.5, 0.5), LevyMeasure::point_mass(2.0),
                                       LevyMeasure::scaled_gaussian(0.3), LevyMeasure::scaled_gaussian(5.0),
                                       LevyMeasure::finite_discrete({{3.0, 0.5}, {-0.5, 4.0}})};
  for (const auto& m : ms) {
    const auto r = verify_c1(m);
    REQUIRE(r.decay.holds);
    for (double t = 0.26; t < 50; t *= 1.05)
      CHECK_MESSAGE(m.tail_mass(t) <= r.decay.C * std::pow(t, -r.decay.epsilon) * (1 + 1e-12), m.kind() << " t " << t);
  }
}
