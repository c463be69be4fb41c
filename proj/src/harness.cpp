#include "lapspec/harness.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lapspec/eigensolver.hpp"
#include "lapspec/measures.hpp"
#include "lapspec/parallel.hpp"
#include "lapspec/point_process.hpp"
#include "lapspec/pwitl.hpp"
#include "lapspec/rde.hpp"
#include "text_format.hpp"

namespace lapspec::harness {

namespace fs = std::filesystem;
using detail::g17;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x))
    throw ConfigError("config key '" + key + "': expected a finite number, got '" + v + "'");
  return x;
}

std::string iso_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Collects output files so the manifest can list their digests.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    files_.push_back({{"file", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
  }
  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  const fs::path& dir() const { return dir_; }
  const nlohmann::json& files() const { return files_; }

 private:
  fs::path dir_;
  nlohmann::json files_ = nlohmann::json::array();
};

void check_keys(const Config& c, const std::set<std::string>& allowed, const std::string& command) {
  for (const auto& [k, v] : c)
    if (k != "seed" && !allowed.count(k))
      throw ConfigError("config key '" + k + "' is not used by " + command);
}

const std::set<std::string> kMeasureKeys = {"measure", "lambda", "alpha", "theta", "atoms"};
const std::set<std::string> kEnsembleKeys = {"ensemble", "lambda", "alpha", "theta", "n"};
const std::set<std::string> kGridKeys = {"grid.re_min", "grid.re_max", "grid.re_step", "grid.im",
                                         "grid.eta_min"};

std::set<std::string> keys(std::initializer_list<std::set<std::string>> groups,
                           std::initializer_list<std::string> extra) {
  std::set<std::string> out(extra);
  for (const auto& g : groups) out.insert(g.begin(), g.end());
  return out;
}

std::vector<Complex> parse_points(const std::string& text) {
  std::vector<Complex> out;
  for (const auto& item : split(text, ';')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ConfigError("config key 'points': expected 're:im;re:im', got '" + text + "'");
    out.emplace_back(parse_double("points", parts[0]), parse_double("points", parts[1]));
  }
  if (out.empty()) throw ConfigError("config key 'points': empty list");
  return out;
}

struct MeanAndError {
  std::vector<Complex> mean;
  std::vector<double> std_error;
};

// samples[k * width + j]: k-th sample at point j.
MeanAndError column_stats(const std::vector<Complex>& samples, std::size_t width) {
  const std::size_t count = samples.size() / width;
  MeanAndError r{std::vector<Complex>(width, 0.0), std::vector<double>(width, 0.0)};
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t j = 0; j < width; ++j) r.mean[j] += samples[k * width + j];
  for (auto& m : r.mean) m /= static_cast<double>(count);
  if (count > 1) {
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t j = 0; j < width; ++j) r.std_error[j] += std::norm(samples[k * width + j] - r.mean[j]);
    for (auto& e : r.std_error) e = std::sqrt(e / static_cast<double>(count - 1) / static_cast<double>(count));
  }
  return r;
}

// --- commands --------------------------------------------------------------

int cmd_sample_spectrum(const RunOptions& o, Outputs& out, nlohmann::json& report, std::ostream&) {
  check_keys(o.config, keys({kEnsembleKeys, kGridKeys}, {"samples", "diagonal"}), o.command);
  const Settings s(o.config);
  const EnsembleSpec spec = ensemble_from_config(s);
  const ZGrid grid = grid_from_config(s);
  const std::size_t samples = s.count("samples", 20);
  const std::string diagonal = s.text("diagonal", "dependent");
  if (diagonal != "dependent" && diagonal != "independent")
    throw ConfigError("config key 'diagonal': expected dependent|independent, got '" + diagonal + "'");
  if (samples < 1) throw ConfigError("config key 'samples': must be >= 1");

  std::vector<Spectrum> spectra(samples);
  std::vector<SpectrumCheck> checks(samples);
  parallel_for(samples, o.workers, [&](std::size_t k) {
    RandomStream rng(o.seed, derive_stream_id(stream_kind::kMatrix, k));
    const SymmetricMatrix a = sample_matrix(spec, rng);
    if (diagonal == "dependent") {
      const LaplacianMatrix l = laplacian(a);
      spectra[k] = spectrum(l);
      checks[k] = check_spectrum(l.matrix(), spectra[k]);
    } else {
      RandomStream diag_rng(o.seed, derive_stream_id(stream_kind::kDiagonalResample, k));
      const SymmetricMatrix l = independent_diagonal_laplacian(a, spec, diag_rng);
      spectra[k] = spectrum(l);
      checks[k] = check_spectrum(l, spectra[k]);
    }
  });

  std::string spec_csv = "sample,index,eigenvalue\n";
  std::vector<double> pooled;
  pooled.reserve(samples * spec.n);
  std::vector<Complex> values(samples * grid.size());
  double worst_trace = 0.0, worst_frobenius = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const auto& ev = spectra[k].eigenvalues();
    for (std::size_t i = 0; i < ev.size(); ++i)
      spec_csv += std::to_string(k) + "," + std::to_string(i) + "," + g17(ev[i]) + "\n";
    pooled.insert(pooled.end(), ev.begin(), ev.end());
    for (std::size_t j = 0; j < grid.size(); ++j) values[k * grid.size() + j] = empirical_stieltjes(spectra[k], grid[j]);
    worst_trace = std::max(worst_trace, checks[k].trace_relative_error);
    worst_frobenius = std::max(worst_frobenius, checks[k].frobenius_relative_error);
  }
  const MeasureEstimate pooled_esm = MeasureEstimate::empirical(pooled);
  const MeanAndError stats = column_stats(values, grid.size());
  StieltjesEstimate est(grid);
  est.mean = stats.mean;
  est.std_error = stats.std_error;
  std::fill(est.iterations.begin(), est.iterations.end(), samples);

  out.write("spectra.csv", spec_csv);
  out.write("esm.csv", pooled_esm.to_csv());
  out.write("stieltjes.csv", est.to_csv());
  report["ensemble"] = spec.to_json();
  report["samples"] = samples;
  report["diagonal"] = diagonal;
  report["max_trace_relative_error"] = worst_trace;
  report["max_frobenius_relative_error"] = worst_frobenius;
  return kExitOk;
}

int cmd_solve_rde(const RunOptions& o, Outputs& out, nlohmann::json& report, std::ostream& log) {
  check_keys(o.config,
             keys({kMeasureKeys, kGridKeys},
                  {"pop_size", "iterations", "burn_in", "damping", "variant", "delta", "max_points",
                   "track_convergence", "tolerance"}),
             o.command);
  const Settings s(o.config);
  const LevyMeasure m = measure_from_config(s);
  const ZGrid grid = grid_from_config(s);
  RdeConfig cfg;
  cfg.pop_size = s.count("pop_size", cfg.pop_size);
  cfg.iterations = s.count("iterations", cfg.iterations);
  cfg.burn_in = s.count("burn_in", cfg.burn_in);
  cfg.damping = s.number("damping", cfg.damping);
  cfg.track_convergence = s.flag("track_convergence", cfg.track_convergence);
  cfg.tolerance = s.number("tolerance", cfg.tolerance);
  cfg.workers = o.workers;
  const std::string variant = s.text("variant", "dependent");
  if (variant == "independent") cfg.variant = RdeVariant::independent;
  else if (variant != "dependent")
    throw ConfigError("config key 'variant': expected dependent|independent, got '" + variant + "'");
  if (s.has("delta") || s.has("max_points")) {
    TruncationPolicy p = default_truncation(m);
    p.delta = s.number("delta", p.delta);
    if (s.has("max_points")) p.max_points = s.count("max_points", 0);
    cfg.truncation = p;
  }

  StieltjesEstimate est(grid);
  try {
    est = solve_rde(m, grid, cfg, o.seed);
  } catch (const C1RefusalError& e) {
    out.write_json("c1_report.json", e.report().to_json());
    log << "refused: " << e.what() << "\n" << e.report().to_json().dump(2) << "\n";
    report["refused"] = true;
    report["c1"] = e.report().to_json();
    return kExitInputError;
  }
  out.write("stieltjes.csv", est.to_csv());
  std::string diag = "sweep,distance\n";
  if (est.metadata.contains("distance_trace")) {
    const auto& trace = est.metadata["distance_trace"];
    for (std::size_t t = 0; t < trace.size(); ++t) diag += std::to_string(t) + "," + g17(trace[t].get<double>()) + "\n";
  }
  out.write("diagnostics.csv", diag);
  report["solver"] = est.metadata;
  const auto& conv = est.metadata["converged"];
  if (conv.is_boolean() && !conv.get<bool>()) {
    log << "distance trace did not drop below " << cfg.tolerance << "\n";
    return kExitToleranceFailed;
  }
  return kExitOk;
}

int cmd_tree_mc(const RunOptions& o, Outputs& out, nlohmann::json& report, std::ostream&) {
  check_keys(o.config, keys({kMeasureKeys}, {"depth", "branching", "delta", "max_nodes", "samples", "points"}),
             o.command);
  const Settings s(o.config);
  const LevyMeasure m = measure_from_config(s);
  TruncationParams p = TruncationParams::defaults_for(m, s.count("depth", 8));
  p.branching = s.count("branching", p.branching);
  p.delta = s.number("delta", p.delta);
  p.max_nodes = s.count("max_nodes", p.max_nodes);
  const std::size_t samples = s.count("samples", 10000);
  const std::vector<Complex> points = parse_points(s.text("points", "0:0.5;1:1"));
  const ZGrid grid(points, 1e-300);
  const auto values = sample_root_resolvent_ensemble(m, p, points, samples, o.seed, o.workers);
  const MeanAndError stats = column_stats(values, points.size());
  StieltjesEstimate est(grid);
  est.mean = stats.mean;
  est.std_error = stats.std_error;
  std::fill(est.iterations.begin(), est.iterations.end(), samples);
  out.write("stieltjes.csv", est.to_csv());
  report["measure"] = m.to_json();
  report["truncation"] = {{"depth", p.depth}, {"branching", p.branching}, {"delta", p.delta}};
  report["samples"] = samples;
  return kExitOk;
}

int cmd_free_conv(const RunOptions& o, Outputs& out, nlohmann::json& report, std::ostream& log) {
  check_keys(o.config, keys({kGridKeys}, {"tol"}), o.command);
  const Settings s(o.config);
  const ZGrid grid = grid_from_config(s);
  const double tol = s.number("tol", 1e-12);
  const StieltjesEstimate est = solve_free_convolution(grid, tol);
  out.write("stieltjes.csv", est.to_csv());
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    worst = std::max(worst, std::abs(est.mean[j] + reciprocal(grid[j])) * std::abs(grid[j]));
  report["solver"] = est.metadata;
  report["max_relative_deviation_from_minus_inverse_z"] = worst;
  log << "free convolution solved at " << grid.size() << " points\n";
  return kExitOk;
}

int cmd_compare(const RunOptions& o, Outputs& out, nlohmann::json& report, std::ostream& log) {
  check_keys(o.config, {"run_a", "run_b", "tol", "im"}, o.command);
  const Settings s(o.config);
  const fs::path a_dir = s.required("run_a");
  const fs::path b_dir = s.required("run_b");
  const double tol = s.number("tol", 0.03);
  StieltjesEstimate a = StieltjesEstimate::from_csv(read_file(a_dir / "stieltjes.csv"));
  StieltjesEstimate b = StieltjesEstimate::from_csv(read_file(b_dir / "stieltjes.csv"));
  if (s.has("im")) {
    const double im = s.number("im");
    auto restrict = [im](const StieltjesEstimate& e) {
      std::vector<Complex> pts;
      std::vector<std::size_t> idx;
      for (std::size_t j = 0; j < e.grid.size(); ++j)
        if (std::abs(e.grid[j].imag() - im) <= 1e-12) {
          pts.push_back(e.grid[j]);
          idx.push_back(j);
        }
      if (pts.empty()) throw ConfigError("config key 'im': no grid points with Im z = " + g17(im));
      StieltjesEstimate r{ZGrid(pts, 1e-300)};
      for (std::size_t k = 0; k < idx.size(); ++k) {
        r.mean[k] = e.mean[idx[k]];
        r.std_error[k] = e.std_error[idx[k]];
        r.iterations[k] = e.iterations[idx[k]];
      }
      return r;
    };
    a = restrict(a);
    b = restrict(b);
  }
  if (!a.grid.same_points(b.grid)) {
    const nlohmann::json err{{"error", "grid_mismatch"},
                             {"run_a", a_dir.string()},
                             {"run_b", b_dir.string()},
                             {"points_a", a.grid.size()},
                             {"points_b", b.grid.size()}};
    out.write_json("error.json", err);
    log << err.dump() << "\n";
    report["error"] = err;
    return kExitInputError;
  }
  const DistanceReport d = sup_grid_distance(a, b);
  std::string aligned = "re_z,im_z,re_a,im_a,re_b,im_b,abs_diff\n";
  for (std::size_t j = 0; j < a.grid.size(); ++j)
    aligned += g17(a.grid[j].real()) + "," + g17(a.grid[j].imag()) + "," + g17(a.mean[j].real()) + "," +
               g17(a.mean[j].imag()) + "," + g17(b.mean[j].real()) + "," + g17(b.mean[j].imag()) + "," +
               g17(std::abs(a.mean[j] - b.mean[j])) + "\n";
  const bool pass = d.value <= tol;
  nlohmann::json dj = d.to_json();
  dj["tolerance"] = tol;
  dj["pass"] = pass;
  out.write_json("distance.json", dj);
  out.write("aligned.csv", aligned);
  report["distance"] = dj;
  log << "sup distance " << g17(d.value) << (pass ? " <= " : " > ") << tol << "\n";
  return pass ? kExitOk : kExitToleranceFailed;
}

int cmd_row_sums(const RunOptions& o, Outputs& out, nlohmann::json& report, std::ostream& log) {
  check_keys(o.config, keys({kEnsembleKeys}, {"samples", "tv_tol", "cf_tol"}), o.command);
  const Settings s(o.config);
  const EnsembleSpec spec = ensemble_from_config(s);
  const std::size_t samples = s.count("samples", 20);
  const double tv_tol = s.number("tv_tol", 0.02);
  const double cf_tol = s.number("cf_tol", 0.03);
  std::vector<std::vector<double>> sums(samples);
  parallel_for(samples, o.workers, [&](std::size_t k) {
    RandomStream rng(o.seed, derive_stream_id(stream_kind::kMatrix, k));
    sums[k] = row_sums(sample_matrix(spec, rng));
  });
  std::vector<double> pooled;
  std::string csv = "sample,row,sum\n";
  for (std::size_t k = 0; k < samples; ++k)
    for (std::size_t i = 0; i < sums[k].size(); ++i) {
      pooled.push_back(sums[k][i]);
      csv += std::to_string(k) + "," + std::to_string(i) + "," + g17(sums[k][i]) + "\n";
    }
  const LevyMeasure m = spec.limit_measure();
  const RowSumFit fit = row_sum_fit(pooled, m, natural_drift(m));
  bool pass = true;
  if (fit.poisson_total_variation) pass = *fit.poisson_total_variation <= tv_tol;
  else pass = fit.max_cf_deviation <= cf_tol;
  nlohmann::json fj = fit.to_json();
  fj["tv_tolerance"] = tv_tol;
  fj["cf_tolerance"] = cf_tol;
  fj["pass"] = pass;
  out.write("row_sums.csv", csv);
  out.write_json("fit.json", fj);
  report["fit"] = fj;
  log << "row-sum fit " << (pass ? "passes" : "fails") << "\n";
  return pass ? kExitOk : kExitToleranceFailed;
}

int cmd_verify_c1(const RunOptions& o, Outputs& out, nlohmann::json& report, std::ostream& log) {
  check_keys(o.config, kMeasureKeys, o.command);
  const Settings s(o.config);
  const LevyMeasure m = measure_from_config(s);
  const C1Report r = verify_c1(m);
  out.write_json("c1_report.json", r.to_json());
  report["c1"] = r.to_json();
  log << m.kind() << (r.passes() ? ": condition holds\n" : ": condition fails\n");
  return r.passes() ? kExitOk : kExitToleranceFailed;
}

using Handler = std::function<int(const RunOptions&, Outputs&, nlohmann::json&, std::ostream&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"sample-spectrum", cmd_sample_spectrum}, {"solve-rde", cmd_solve_rde},
      {"tree-mc", cmd_tree_mc},                 {"free-conv", cmd_free_conv},
      {"compare", cmd_compare},                 {"row-sums", cmd_row_sums},
      {"verify-c1", cmd_verify_c1}};
  return h;
}

}  // namespace

Config parse_config_text(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || trim(t.substr(0, eq)).empty())
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value', got '" + t + "'");
    c[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return c;
}

std::string config_to_text(const Config& c) {
  std::string out;
  for (const auto& [k, v] : c) out += k + " = " + v + "\n";
  return out;
}

Config load_config(const fs::path& path, std::string* manifest_command) {
  const std::string text = read_file(path);
  if (path.extension() != ".json") return parse_config_text(text);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object())
    throw ConfigError("manifest " + path.string() + ": missing \"config\" object");
  Config c;
  for (const auto& [k, v] : j["config"].items()) c[k] = v.is_string() ? v.get<std::string>() : v.dump();
  if (manifest_command && j.contains("command")) *manifest_command = j["command"].get<std::string>();
  return c;
}

void apply_override(Config& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "': expected key=value");
  c[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string Settings::text(const std::string& key, const std::string& fallback) const {
  const auto it = c_.find(key);
  return it == c_.end() ? fallback : it->second;
}

std::string Settings::required(const std::string& key) const {
  const auto it = c_.find(key);
  if (it == c_.end()) throw ConfigError("config key '" + key + "' is required");
  return it->second;
}

double Settings::number(const std::string& key, double fallback) const {
  return has(key) ? parse_double(key, c_.at(key)) : fallback;
}

double Settings::number(const std::string& key) const { return parse_double(key, required(key)); }

std::size_t Settings::count(const std::string& key, std::size_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = c_.at(key);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return std::stoull(v);
}

bool Settings::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = c_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true|false, got '" + v + "'");
}

std::vector<double> Settings::numbers(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split(c_.at(key), ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

LevyMeasure measure_from_config(const Settings& s) {
  const std::string kind = s.required("measure");
  try {
    if (kind == "point_mass") return LevyMeasure::point_mass(s.number("lambda"));
    if (kind == "scaled_gaussian") return LevyMeasure::scaled_gaussian(s.number("lambda"));
    if (kind == "alpha_stable") return LevyMeasure::alpha_stable(s.number("alpha"), s.number("theta", 0.5));
    if (kind == "finite_discrete") {
      std::vector<Atom> atoms;
      for (const auto& item : split(s.required("atoms"), ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("config key 'atoms': expected 'loc:mass,loc:mass'");
        atoms.push_back({parse_double("atoms", parts[0]), parse_double("atoms", parts[1])});
      }
      return LevyMeasure::finite_discrete(std::move(atoms));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("measure: ") + e.what());
  }
  throw ConfigError("config key 'measure': expected point_mass|scaled_gaussian|alpha_stable|finite_discrete, got '" +
                    kind + "'");
}

EnsembleSpec ensemble_from_config(const Settings& s) {
  const std::string kind = s.required("ensemble");
  EnsembleSpec spec;
  spec.n = s.count("n", 1000);
  if (kind == "erdos_renyi") spec.law = ErdosRenyi{s.number("lambda")};
  else if (kind == "sparse_gaussian") spec.law = SparseGaussian{s.number("lambda")};
  else if (kind == "levy_pareto") spec.law = LevyPareto{s.number("alpha"), s.number("theta", 0.5)};
  else
    throw ConfigError("config key 'ensemble': expected erdos_renyi|sparse_gaussian|levy_pareto, got '" + kind + "'");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("ensemble: ") + e.what());
  }
  return spec;
}

ZGrid grid_from_config(const Settings& s) {
  try {
    return ZGrid::rectangular(s.number("grid.re_min", -8.0), s.number("grid.re_max", 4.0),
                              s.number("grid.re_step", 0.25), s.numbers("grid.im", {0.5, 1.0}),
                              s.number("grid.eta_min", ZGrid::kDefaultEtaMin));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

double natural_drift(const LevyMeasure& m) {
  struct Visitor {
    double operator()(const AlphaStable& a) const {
      // integral_0^inf x^{-alpha} / (1 + x^2) dx = pi / (2 cos(pi alpha / 2))
      return (2.0 * a.theta - 1.0) * a.alpha * M_PI / (2.0 * std::cos(M_PI * a.alpha / 2.0));
    }
    double operator()(const PointMass& p) const { return p.lambda / 2.0; }
    double operator()(const ScaledGaussian&) const { return 0.0; }
    double operator()(const FiniteDiscrete& f) const {
      double b = 0.0;
      for (const auto& a : f.atoms) b += a.mass * a.location / (1.0 + a.location * a.location);
      return b;
    }
  };
  return std::visit(Visitor{}, m.variant());
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256_hex: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, h] : handlers()) v.push_back(k);
    return v;
  }();
  return names;
}

int run(const RunOptions& options, std::ostream& log) {
  const auto it = handlers().find(options.command);
  if (it == handlers().end()) {
    log << "unknown command '" << options.command << "'\n";
    return kExitInputError;
  }
  RunOptions o = options;
  o.config["seed"] = std::to_string(o.seed);
  o.workers = std::max<std::size_t>(1, o.workers);
  const std::string started = iso_now();
  nlohmann::json report = nlohmann::json::object();
  int status = kExitOk;
  Outputs out(o.out_dir);
  try {
    status = it->second(o, out, report, log);
  } catch (const ConfigError& e) {
    log << "invalid config: " << e.what() << "\n";
    report["error"] = {{"kind", "invalid_config"}, {"message", e.what()}};
    status = kExitInputError;
  } catch (const std::invalid_argument& e) {
    log << "invalid input: " << e.what() << "\n";
    report["error"] = {{"kind", "invalid_input"}, {"message", e.what()}};
    status = kExitInputError;
  } catch (const std::exception& e) {
    log << "run failed: " << e.what() << "\n";
    report["error"] = {{"kind", "runtime"}, {"message", e.what()}};
    status = kExitRuntimeError;
  }
  out.write("config.txt", config_to_text(o.config));
  out.write_json("report.json", report);

  nlohmann::json manifest;
  manifest["command"] = o.command;
  manifest["config"] = o.config;
  manifest["seed"] = o.seed;
  manifest["workers"] = o.workers;
  manifest["version"] = LAPSPEC_VERSION;
  manifest["started"] = started;
  manifest["finished"] = iso_now();
  manifest["exit_status"] = status;
  manifest["outputs"] = out.files();
  std::ofstream mf(o.out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  return status;
}

}  // namespace lapspec::harness
