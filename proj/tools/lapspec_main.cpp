#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lapspec/harness.hpp"

namespace fs = std::filesystem;
using namespace lapspec::harness;

namespace {

fs::path default_out_dir(const std::string& command, std::uint64_t seed) {
  const char* root = std::getenv("RESULTS_DIR");
  return fs::path(root ? root : "results") / (command + "-" + std::to_string(seed));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of random Laplacians: matrix sampling, tree oracle and RDE solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value file, or a manifest.json to re-run");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (default $RESULTS_DIR/<command>-<seed>)");
    sub->add_option("overrides", overrides, "key=value config overrides");
  };
  for (const auto& name : commands()) add_common(app.add_subcommand(name, "run " + name));
  add_common(app.add_subcommand("rerun", "repeat the run described by --config manifest.json"));

  CLI11_PARSE(app, argc, argv);
  const CLI::App* sub = app.get_subcommands().front();

  RunOptions options;
  options.command = sub->get_name();
  options.workers = workers;
  try {
    std::string manifest_command;
    if (!config_path.empty()) options.config = load_config(config_path, &manifest_command);
    if (options.command == "rerun") {
      if (manifest_command.empty()) throw ConfigError("rerun needs --config pointing at a manifest.json");
      options.command = manifest_command;
    }
    for (const auto& o : overrides) apply_override(options.config, o);
    if (sub->count("--seed")) {
      options.seed = seed;
    } else if (const auto it = options.config.find("seed"); it != options.config.end()) {
      options.seed = std::stoull(it->second);
    }
  } catch (const std::exception& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInputError;
  }
  options.out_dir = out_dir.empty() ? default_out_dir(options.command, options.seed) : fs::path(out_dir);
  const int status = run(options, std::cerr);
  std::cout << options.out_dir.string() << "\n";
  return status;
}
