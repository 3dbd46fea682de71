#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "milstroud/aggregation.hpp"
#include "milstroud/autoencoder.hpp"
#include "milstroud/data_pipeline.hpp"
#include "milstroud/evaluation.hpp"
#include "milstroud/lof.hpp"
#include "milstroud/stroud.hpp"

namespace milstroud {

struct SyntheticSource {
  SyntheticSpec spec;
};

/// Pre-bagged CSVs carrying bag_id (and bag_label / label) columns.
struct BaggedSource {
  std::filesystem::path train;
  std::filesystem::path test;
};

/// Labeled instance CSV split into bags by compose_bags.
struct InstanceSource {
  std::filesystem::path path;
  BagCompositionSpec composition;
};

/// One-sample-per-row signal CSV (run_id,label,value). Each run is optionally
/// corrupted to snrDb, windowed, and the windows are composed into bags.
struct SignalSource {
  std::filesystem::path path;
  WindowingSpec windowing;
  std::optional<double> snrDb;
  std::uint64_t noiseSeed = 0;
  BagCompositionSpec composition;
};

using DataSource = std::variant<SyntheticSource, BaggedSource, InstanceSource, SignalSource>;

struct LofGrid {
  std::vector<std::size_t> ks;
  // Each scope is scanned with every k.
  std::vector<LofScope> scopes = {LofScope::BagLocal};
};

struct MseGrid {
  std::vector<AeArchitecture> architectures;
  AeTrainingConfig training;
};

struct StroudSettings {
  bool enabled = false;
  std::vector<std::size_t> lofKs;
  StroudRule rule = StroudRule::AnyInstance;
};

struct ExperimentConfig {
  DataSource data;
  std::optional<LofGrid> lof;
  std::optional<MseGrid> mse;
  std::vector<AggregateFunction> aggregates;
  double confidenceStep = 0.001;
  StroudSettings stroud;
  std::filesystem::path outputDir = "results";
};

/// Parses and schema-checks a config document; throws ConfigError.
/// Relative data paths resolve against baseDir.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& baseDir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Materializes the configured dataset; throws DataError.
Composition load_dataset(const ExperimentConfig& cfg);

/// One (method, scorer hyperparameters, aggregate) grid cell.
struct CellResult {
  std::string name;
  std::string method;       // "mil-stroud" or "stroud"
  std::string strangeness;  // "lof" or "mse"
  nlohmann::json hyperparameters;
  std::string aggregate;  // empty for StrOUD under AnyInstance
  nlohmann::json descriptor;
  std::optional<std::string> error;
  std::vector<BagVerdict> verdicts;
  RocCurve roc;
};

struct GridResult {
  std::vector<CellResult> cells;
  std::vector<std::string> warnings;
};

/// Runs every grid cell; cells fail independently. `jobs` workers share the
/// cell list and results keep grid order.
GridResult run_grid(const ExperimentConfig& cfg, const Dataset& d, std::size_t jobs = 1);

/// Best-AUC cell per method and strangeness plus the whole grid.
nlohmann::json summarize(const ExperimentConfig& cfg, const GridResult& grid);

/// Writes <dir>/<cell>/roc.csv, <dir>/<cell>/verdicts.csv and <dir>/summary.json.
void write_grid_outputs(const ExperimentConfig& cfg, const GridResult& grid,
                        const std::filesystem::path& dir);

void write_verdicts_csv(std::ostream& out, const std::vector<BagVerdict>& verdicts);

}  // namespace milstroud
