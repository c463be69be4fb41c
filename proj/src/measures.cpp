#include "lapspec/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lapspec/point_process.hpp"
#include "text_format.hpp"

namespace lapspec {

// ---------------------------------------------------------------- ZGrid

ZGrid::ZGrid(std::vector<Complex> points, double eta_min)
    : points_(std::move(points)), eta_min_(eta_min) {
  if (!(eta_min_ > 0.0)) throw std::invalid_argument("ZGrid: eta_min must be positive");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].imag() >= eta_min_))
      throw std::invalid_argument("ZGrid: point with Im z below eta_min = " + detail::g17(eta_min_));
    for (std::size_t j = 0; j < i; ++j)
      if (points_[i] == points_[j]) throw std::invalid_argument("ZGrid: duplicate point");
  }
}

ZGrid ZGrid::rectangular(double re_min, double re_max, double re_step,
                         const std::vector<double>& im_values, double eta_min) {
  if (!(re_step > 0.0) || re_max < re_min)
    throw std::invalid_argument("ZGrid::rectangular: need re_step > 0 and re_min <= re_max");
  const auto count = static_cast<std::size_t>(std::floor((re_max - re_min) / re_step + 1e-9)) + 1;
  std::vector<Complex> pts;
  for (double im : im_values)
    for (std::size_t k = 0; k < count; ++k)
      pts.emplace_back(re_min + static_cast<double>(k) * re_step, im);
  return ZGrid(std::move(pts), eta_min);
}

ZGrid ZGrid::default_grid() { return rectangular(-8.0, 4.0, 0.25, {0.5, 1.0}); }

std::vector<std::size_t> ZGrid::select_im(double im_min, double im_max) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].imag() >= im_min && points_[i].imag() <= im_max) idx.push_back(i);
  return idx;
}

bool ZGrid::same_points(const ZGrid& other) const {
  if (points_.size() != other.points_.size()) return false;
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (std::abs(points_[i] - other.points_[i]) > 1e-12) return false;
  return true;
}

nlohmann::json ZGrid::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& z : points_) pts.push_back({z.real(), z.imag()});
  return {{"eta_min", eta_min_}, {"points", pts}};
}

// ---------------------------------------------------------------- StieltjesEstimate

std::string StieltjesEstimate::to_csv() const {
  std::string out = "re_z,im_z,re_s,im_s,stderr,iterations\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += detail::g17(grid[i].real()) + "," + detail::g17(grid[i].imag()) + "," +
           detail::g17(mean[i].real()) + "," + detail::g17(mean[i].imag()) + "," +
           detail::g17(std_error[i]) + "," + std::to_string(iterations[i]) + "\n";
  }
  return out;
}

StieltjesEstimate StieltjesEstimate::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("stieltjes csv: empty input");
  std::vector<Complex> z, s;
  std::vector<double> se;
  std::vector<std::size_t> it;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw std::invalid_argument("stieltjes csv: expected 6 columns: " + line);
    z.emplace_back(std::stod(cells[0]), std::stod(cells[1]));
    s.emplace_back(std::stod(cells[2]), std::stod(cells[3]));
    se.push_back(std::stod(cells[4]));
    it.push_back(std::stoull(cells[5]));
  }
  double eta = ZGrid::kDefaultEtaMin;
  for (const auto& p : z) eta = std::min(eta, p.imag());
  StieltjesEstimate est{ZGrid(std::move(z), eta)};
  est.mean = std::move(s);
  est.std_error = std::move(se);
  est.iterations = std::move(it);
  return est;
}

// ---------------------------------------------------------------- MeasureEstimate

MeasureEstimate MeasureEstimate::from_atoms(std::vector<WeightedAtom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("MeasureEstimate: no atoms");
  for (const auto& a : atoms)
    if (!(a.weight > 0.0) || !std::isfinite(a.location))
      throw std::invalid_argument("MeasureEstimate: atoms need finite locations and positive weights");
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const WeightedAtom& a, const WeightedAtom& b) { return a.location < b.location; });
  std::vector<WeightedAtom> merged;
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().location == a.location)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  MeasureEstimate m;
  for (const auto& a : merged) m.total_mass_ += a.weight;
  m.data_ = std::move(merged);
  return m;
}

MeasureEstimate MeasureEstimate::empirical(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("MeasureEstimate: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<WeightedAtom> atoms;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    if (!std::isfinite(sorted[i])) throw std::invalid_argument("MeasureEstimate: non-finite sample");
    atoms.push_back({sorted[i], static_cast<double>(j - i) / n});
    i = j;
  }
  MeasureEstimate m;
  m.data_ = std::move(atoms);
  m.total_mass_ = 1.0;  // counts sum to n
  return m;
}

MeasureEstimate MeasureEstimate::from_histogram(Histogram h) {
  if (h.edges.size() != h.counts.size() + 1 || h.counts.empty())
    throw std::invalid_argument("histogram: need counts.size() + 1 edges");
  for (std::size_t i = 1; i < h.edges.size(); ++i)
    if (!(h.edges[i] > h.edges[i - 1])) throw std::invalid_argument("histogram: edges must increase");
  double total = 0.0;
  for (double c : h.counts) {
    if (c < 0.0) throw std::invalid_argument("histogram: negative count");
    total += c;
  }
  if (!(total > 0.0)) throw std::invalid_argument("histogram: empty");
  for (double& c : h.counts) c /= total;
  MeasureEstimate m;
  m.data_ = std::move(h);
  m.total_mass_ = 1.0;
  return m;
}

MeasureEstimate MeasureEstimate::histogram_of(std::span<const double> samples, std::size_t bins,
                                              double pad) {
  if (samples.empty() || bins == 0) throw std::invalid_argument("histogram_of: no samples or bins");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - pad, hi = *hi_it + pad;
  if (!(hi > lo)) throw std::invalid_argument("histogram_of: degenerate range");
  Histogram h;
  h.edges.resize(bins + 1);
  h.counts.assign(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  for (double x : samples) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    h.counts[std::min(b, bins - 1)] += 1.0;
  }
  return from_histogram(std::move(h));
}

const std::vector<WeightedAtom>& MeasureEstimate::atoms() const {
  if (!is_atomic()) throw std::logic_error("MeasureEstimate: not atomic");
  return std::get<std::vector<WeightedAtom>>(data_);
}

const Histogram& MeasureEstimate::histogram() const {
  if (is_atomic()) throw std::logic_error("MeasureEstimate: not a histogram");
  return std::get<Histogram>(data_);
}

double MeasureEstimate::cdf(double x) const {
  if (is_atomic()) {
    const auto& a = atoms();
    double s = 0.0;
    for (const auto& atom : a) {
      if (atom.location > x) break;
      s += atom.weight;
    }
    return s / total_mass_;
  }
  const auto& h = histogram();
  double s = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (x >= h.edges[i + 1]) {
      s += h.counts[i];
    } else {
      if (x > h.edges[i]) s += h.counts[i] * (x - h.edges[i]) / (h.edges[i + 1] - h.edges[i]);
      break;
    }
  }
  return s;
}

std::vector<double> MeasureEstimate::breakpoints() const {
  std::vector<double> out;
  if (is_atomic())
    for (const auto& a : atoms()) out.push_back(a.location);
  else
    out = histogram().edges;
  return out;
}

std::string MeasureEstimate::to_csv() const {
  std::string out;
  if (is_atomic()) {
    out = "location,weight\n";
    for (const auto& a : atoms()) out += detail::g17(a.location) + "," + detail::g17(a.weight) + "\n";
  } else {
    out = "bin_left,bin_right,count\n";
    const auto& h = histogram();
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      out += detail::g17(h.edges[i]) + "," + detail::g17(h.edges[i + 1]) + "," + detail::g17(h.counts[i]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- distances

std::string to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::kolmogorov: return "kolmogorov";
    case DistanceMetric::sup_grid: return "sup_grid";
    case DistanceMetric::total_variation: return "total_variation";
  }
  return "unknown";
}

nlohmann::json DistanceReport::to_json() const {
  return {{"metric", to_string(metric)}, {"value", value}, {"argmax", argmax}, {"resolution", resolution}};
}

Complex stieltjes_of_measure(const MeasureEstimate& mu, Complex z) {
  if (!(z.imag() > 0.0)) throw std::invalid_argument("stieltjes_of_measure: Im z must be positive");
  Complex acc = 0.0;
  if (mu.is_atomic()) {
    for (const auto& a : mu.atoms()) acc += a.weight * reciprocal(Complex(a.location - z.real(), -z.imag()));
    return acc / mu.total_mass();
  }
  const auto& h = mu.histogram();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double mid = 0.5 * (h.edges[i] + h.edges[i + 1]);
    acc += h.counts[i] * reciprocal(Complex(mid - z.real(), -z.imag()));
  }
  return acc;
}

DensityCurve density_from_stieltjes(const StieltjesEstimate& est, double eta) {
  DensityCurve c;
  c.eta = eta;
  std::vector<std::pair<double, double>> line;
  for (std::size_t i = 0; i < est.grid.size(); ++i)
    if (std::abs(est.grid[i].imag() - eta) < 1e-12)
      line.emplace_back(est.grid[i].real(), std::max(0.0, est.mean[i].imag()) / std::numbers::pi);
  if (line.empty()) throw std::invalid_argument("density_from_stieltjes: grid has no line Im z = " + detail::g17(eta));
  std::sort(line.begin(), line.end());
  for (const auto& [e, rho] : line) {
    c.energy.push_back(e);
    c.density.push_back(rho);
  }
  for (std::size_t i = 1; i < line.size(); ++i)
    c.integral += 0.5 * (c.density[i] + c.density[i - 1]) * (c.energy[i] - c.energy[i - 1]);
  c.normalization_deficit = 1.0 - c.integral;
  return c;
}

DistanceReport kolmogorov_distance(const MeasureEstimate& a, const MeasureEstimate& b) {
  DistanceReport r;
  r.metric = DistanceMetric::kolmogorov;
  if (a.is_atomic() && b.is_atomic()) {
    // Merge walk over the sorted supports; both CDFs are right-continuous
    // step functions, so the sup is attained at a support point.
    const auto& x = a.atoms();
    const auto& y = b.atoms();
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0;
    while (i < x.size() || j < y.size()) {
      double loc;
      if (j == y.size() || (i < x.size() && x[i].location <= y[j].location))
        loc = x[i].location;
      else
        loc = y[j].location;
      while (i < x.size() && x[i].location == loc) fa += x[i++].weight / a.total_mass();
      while (j < y.size() && y[j].location == loc) fb += y[j++].weight / b.total_mass();
      if (const double d = std::abs(fa - fb); d > r.value) {
        r.value = d;
        r.argmax = loc;
      }
    }
    r.resolution = "merged atom locations";
    return r;
  }
  std::vector<double> pts = a.breakpoints();
  const auto pb = b.breakpoints();
  pts.insert(pts.end(), pb.begin(), pb.end());
  std::sort(pts.begin(), pts.end());
  for (double p : pts)
    if (const double d = std::abs(a.cdf(p) - b.cdf(p)); d > r.value) {
      r.value = d;
      r.argmax = p;
    }
  r.resolution = "merged atom/edge locations";
  return r;
}

DistanceReport total_variation_distance(const MeasureEstimate& a, const MeasureEstimate& b) {
  DistanceReport r;
  r.metric = DistanceMetric::total_variation;
  const auto& x = a.atoms();
  const auto& y = b.atoms();
  std::size_t i = 0, j = 0;
  double sum = 0.0, largest = -1.0;
  while (i < x.size() || j < y.size()) {
    double wa = 0.0, wb = 0.0, loc;
    if (j == y.size() || (i < x.size() && x[i].location < y[j].location)) {
      loc = x[i].location;
      wa = x[i++].weight / a.total_mass();
    } else if (i == x.size() || y[j].location < x[i].location) {
      loc = y[j].location;
      wb = y[j++].weight / b.total_mass();
    } else {
      loc = x[i].location;
      wa = x[i++].weight / a.total_mass();
      wb = y[j++].weight / b.total_mass();
    }
    const double d = std::abs(wa - wb);
    sum += d;
    if (d > largest) {
      largest = d;
      r.argmax = loc;
    }
  }
  r.value = 0.5 * sum;
  r.resolution = "shared atomic support";
  return r;
}

DistanceReport sup_grid_distance(const StieltjesEstimate& s1, const StieltjesEstimate& s2) {
  if (!s1.grid.same_points(s2.grid)) throw std::invalid_argument("sup_grid_distance: grids differ");
  DistanceReport r;
  r.metric = DistanceMetric::sup_grid;
  for (std::size_t i = 0; i < s1.grid.size(); ++i)
    if (const double d = std::abs(s1.mean[i] - s2.mean[i]); d > r.value) {
      r.value = d;
      r.argmax = static_cast<double>(i);
    }
  r.resolution = std::to_string(s1.grid.size()) + " grid points";
  return r;
}

double moment(const MeasureEstimate& mu, double r) {
  double s = 0.0;
  if (mu.is_atomic()) {
    for (const auto& a : mu.atoms()) s += a.weight * std::pow(std::abs(a.location), r);
    return s / mu.total_mass();
  }
  const auto& h = mu.histogram();
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    s += h.counts[i] * std::pow(std::abs(0.5 * (h.edges[i] + h.edges[i + 1])), r);
  return s;
}

// ---------------------------------------------------------------- row sums

double poisson_pmf(double mean, std::uint64_t k) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kk = static_cast<double>(k);
  return std::exp(kk * std::log(mean) - mean - std::lgamma(kk + 1.0));
}

nlohmann::json RowSumFit::to_json() const {
  nlohmann::json j = {{"sample_count", sample_count},
                      {"t_points", t_grid.size()},
                      {"max_cf_deviation", max_cf_deviation},
                      {"max_modulus_deviation", max_modulus_deviation}};
  if (poisson_total_variation) j["poisson_total_variation"] = *poisson_total_variation;
  return j;
}

RowSumFit row_sum_fit(std::span<const double> samples, const LevyMeasure& m, double b) {
  constexpr std::size_t kMinSamples = 1000;
  constexpr std::size_t kTPoints = 33;
  if (samples.size() < kMinSamples)
    throw std::invalid_argument("row_sum_fit: need at least 1000 samples, got " + std::to_string(samples.size()));
  RowSumFit fit;
  fit.sample_count = samples.size();
  const double n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < kTPoints; ++k) {
    const double t = -5.0 + 10.0 * static_cast<double>(k) / static_cast<double>(kTPoints - 1);
    fit.t_grid.push_back(t);
    double c = 0.0, s = 0.0;
    for (double x : samples) {
      c += std::cos(t * x);
      s += std::sin(t * x);
    }
    const Complex emp(c / n, s / n);
    const Complex ref = id_characteristic_function(m, b, t);
    fit.max_cf_deviation = std::max(fit.max_cf_deviation, std::abs(emp - ref));
    fit.max_modulus_deviation = std::max(fit.max_modulus_deviation, std::abs(std::abs(emp) - std::abs(ref)));
  }
  if (const auto* p = std::get_if<PointMass>(&m.variant())) {
    // Empirical law of the rounded samples against Poisson(lambda).
    std::vector<double> counts;
    double outside = 0.0;
    for (double x : samples) {
      const double r = std::round(x);
      if (r < 0.0) {
        outside += 1.0;
        continue;
      }
      const auto k = static_cast<std::size_t>(r);
      if (k >= counts.size()) counts.resize(k + 1, 0.0);
      counts[k] += 1.0;
    }
    double tv = outside / n;
    double covered = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double pk = poisson_pmf(p->lambda, k);
      covered += pk;
      tv += std::abs(counts[k] / n - pk);
    }
    tv += std::max(0.0, 1.0 - covered);
    fit.poisson_total_variation = 0.5 * tv;
  }
  return fit;
}

}  // namespace lapspec
