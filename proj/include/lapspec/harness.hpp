#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lapspec/ensembles.hpp"
#include "lapspec/levy_measure.hpp"
#include "lapspec/stieltjes.hpp"

namespace lapspec::harness {

/// Flat key = value configuration. Keys are sorted, so the text echo is stable.
using Config = std::map<std::string, std::string>;

/// Raised for malformed files, unknown keys and values of the wrong type.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exit statuses of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitToleranceFailed = 1;
inline constexpr int kExitInputError = 2;
/// Numerical or I/O failure while running (e.g. eigenvalue non-convergence).
inline constexpr int kExitRuntimeError = 3;

/// Lines "key = value"; blank lines and lines starting with '#' are skipped.
Config parse_config_text(const std::string& text);
std::string config_to_text(const Config& c);
/// A file ending in .json is read as a run manifest (its "config" object and
/// "command"); anything else as key = value text.
Config load_config(const std::filesystem::path& path, std::string* manifest_command = nullptr);
/// "key=value" command-line override.
void apply_override(Config& c, const std::string& assignment);

/// Typed read access to a Config with schema-style error messages.
class Settings {
 public:
  explicit Settings(const Config& c) : c_(c) {}
  bool has(const std::string& key) const { return c_.count(key) != 0; }
  std::string text(const std::string& key, const std::string& fallback) const;
  std::string required(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  double number(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

 private:
  const Config& c_;
};

/// measure = point_mass | scaled_gaussian | alpha_stable | finite_discrete with
/// lambda / alpha, theta / atoms = "loc:mass,loc:mass".
LevyMeasure measure_from_config(const Settings& s);
/// ensemble = erdos_renyi | sparse_gaussian | levy_pareto with lambda or
/// alpha, theta, and n.
EnsembleSpec ensemble_from_config(const Settings& s);
/// grid.re_min, grid.re_max, grid.re_step, grid.im (comma list), grid.eta_min.
ZGrid grid_from_config(const Settings& s);
/// Drift b = integral of x / (1 + x^2) dm that makes the infinitely divisible
/// law match uncentred Poisson sums.
double natural_drift(const LevyMeasure& m);

std::string sha256_hex(const std::string& data);

struct RunOptions {
  std::string command;
  Config config;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::filesystem::path out_dir;
};

/// Names of the subcommands accepted by run().
const std::vector<std::string>& commands();

/// Runs one subcommand, writes its CSV/JSON outputs, config.txt and
/// manifest.json into out_dir, and returns the exit status. Errors in the
/// inputs are reported on `log` and give kExitInputError.
int run(const RunOptions& options, std::ostream& log);

}  // namespace lapspec::harness
