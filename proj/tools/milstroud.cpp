// Config-driven runner: `run`, `gen` and `validate` verbs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "milstroud/data_pipeline.hpp"
#include "milstroud/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

using namespace milstroud;

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_run(const std::string& configPath, std::size_t jobs, const std::string& outOverride) {
  const auto cfg = load_experiment_config(configPath);
  const auto composed = load_dataset(cfg);
  print_warnings(composed.warnings);
  const auto violations = validate_dataset(composed.dataset);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "invalid dataset: " << v << '\n';
    return kExitData;
  }
  auto grid = run_grid(cfg, composed.dataset, jobs);
  grid.warnings = composed.warnings;
  const std::filesystem::path out = outOverride.empty() ? cfg.outputDir : std::filesystem::path(outOverride);
  write_grid_outputs(cfg, grid, out);

  std::size_t failed = 0;
  for (const auto& c : grid.cells) {
    if (c.error) {
      ++failed;
      std::cerr << c.name << ": " << *c.error << '\n';
    }
  }
  const auto summary = summarize(cfg, grid);
  for (const auto& [method, kinds] : summary.at("best").items()) {
    for (const auto& [kind, best] : kinds.items()) {
      std::cout << method << " / " << kind << ": best AUC " << best.at("auc").get<double>()
                << " (" << best.at("cell").get<std::string>() << ")\n";
    }
  }
  std::cout << grid.cells.size() << " cells, " << failed << " infeasible; results in "
            << out.string() << '\n';
  return 0;
}

int cmd_gen(const std::string& configPath, const std::string& outOverride) {
  const auto cfg = load_experiment_config(configPath);
  const auto composed = load_dataset(cfg);
  print_warnings(composed.warnings);
  const auto& d = composed.dataset;
  const std::filesystem::path out = outOverride.empty() ? cfg.outputDir : std::filesystem::path(outOverride);
  std::filesystem::create_directories(out);
  std::ofstream train(out / "train.csv");
  write_feature_csv(train, table_from_bags(d.trainingBags, d.featureDim));
  std::ofstream test(out / "test.csv");
  write_feature_csv(test, table_from_bags(d.testBags, d.featureDim));
  if (!train || !test) throw DataError("cannot write dataset CSVs under " + out.string());
  std::cout << d.trainingBags.size() << " training bags, " << d.testBags.size()
            << " test bags written to " << out.string() << '\n';
  return 0;
}

int cmd_validate(const std::string& configPath) {
  const auto cfg = load_experiment_config(configPath);
  const auto composed = load_dataset(cfg);
  print_warnings(composed.warnings);
  const auto violations = validate_dataset(composed.dataset);
  for (const auto& v : violations) std::cout << v << '\n';
  if (!violations.empty()) return kExitData;
  std::cout << "ok: " << composed.dataset.trainingBags.size() << " training bags, "
            << composed.dataset.testBags.size() << " test bags, dimension "
            << composed.dataset.featureDim << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bag-level anomaly detection with conformal p-values"};
  app.require_subcommand(1);

  std::string configPath;
  std::string outDir;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run the configured grid and write ROC data and summary.json");
  run->add_option("config", configPath, "Experiment config (JSON)")->required();
  run->add_option("--jobs", jobs, "Grid cells to run in parallel")->check(CLI::PositiveNumber);
  run->add_option("--out", outDir, "Output directory (overrides config.output)");

  auto* gen = app.add_subcommand("gen", "Materialize the configured dataset as train.csv/test.csv");
  gen->add_option("config", configPath, "Experiment config (JSON)")->required();
  gen->add_option("--out", outDir, "Output directory (overrides config.output)");

  auto* validate = app.add_subcommand("validate", "Check the config and dataset invariants");
  validate->add_option("config", configPath, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(configPath, jobs, outDir);
    if (*gen) return cmd_gen(configPath, outDir);
    return cmd_validate(configPath);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
