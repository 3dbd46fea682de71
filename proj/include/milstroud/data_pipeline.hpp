#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "milstroud/core_types.hpp"

namespace milstroud {

/// One CSV row: the instance plus whatever optional columns were present.
struct InstanceRow {
  Instance instance;
  std::optional<Label> label;
  std::optional<std::int64_t> runId;
  std::optional<std::size_t> bagId;
  std::optional<Label> bagLabel;
};

/// Row-ordered instance table. Columns: f0..f{D-1} (required), and optional
/// id, label (0/1, blank = unknown), run_id, bag_id, bag_label (0/1).
struct InstanceTable {
  std::size_t featureDim = 0;
  bool hasLabel = false;
  bool hasRunId = false;
  bool hasBags = false;
  std::vector<InstanceRow> rows;
};

/// Throws DataError naming the source and line on malformed rows or
/// non-finite values.
InstanceTable parse_feature_csv(std::istream& in, const std::string& sourceName);
InstanceTable load_feature_csv(const std::filesystem::path& path);

void write_feature_csv(std::ostream& out, const InstanceTable& table);

/// Table holding every instance of `bags` with bag_id and bag_label columns.
InstanceTable table_from_bags(const std::vector<Bag>& bags, std::size_t featureDim);

/// Regroups a table that carries bag_id into bags, in order of first
/// appearance. Bag labels come from bag_label, else from instance labels.
std::vector<Bag> bags_from_table(const InstanceTable& table);

struct WindowingSpec {
  std::size_t windowSize = 400;
  std::size_t stride = 400;
};

/// Instance i holds samples [i*stride, i*stride + windowSize); a trailing
/// partial window is dropped. Instance ids start at firstId.
std::vector<Instance> window_signal(const std::vector<double>& signal, const WindowingSpec& spec,
                                    std::size_t firstId = 0);

/// signal + white Gaussian noise with variance mean(signal^2) / 10^(snrDb/10).
std::vector<double> corrupt_snr(const std::vector<double>& signal, double snrDb,
                                std::uint64_t seed);

enum class AnomalyInsertion {
  ContiguousByLabel,  // anomalous bags are consecutive rows of one run
  RandomIntoHalf,     // anomalies are scattered over a random half of the test bags
};

struct BagCompositionSpec {
  std::size_t trainBags = 30;
  std::size_t normalBagSize = 10;
  std::size_t anomalousBagSize = 10;
  // RandomIntoHalf only; defaults to as many full normal-size bags as fit.
  std::optional<std::size_t> testBags;
  AnomalyInsertion insertion = AnomalyInsertion::ContiguousByLabel;
  std::uint64_t seed = 0;
};

struct Composition {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/// Partitions labeled rows into normal-only training bags and labeled test
/// bags. A bag is Anomalous iff it holds an anomalous instance.
Composition compose_bags(const InstanceTable& table, const BagCompositionSpec& spec);

struct SyntheticSpec {
  std::size_t featureDim = 8;
  std::size_t nTrainBags = 30;
  std::size_t nTestBagsPerClass = 30;
  std::size_t bagSize = 10;
  double anomalyShift = 6.0;     // offset of witnesses, in standard deviations
  double witnessFraction = 0.2;  // share of an anomalous bag's instances that are witnesses
  double labelNoise = 0.0;       // chance a designated witness is redrawn as a normal
  std::uint64_t seed = 1;

  void validate() const;
};

/// Normal instances are standard Gaussian. Each anomalous test bag has
/// max(1, round(witnessFraction * bagSize)) designated witnesses shifted by
/// anomalyShift along one fixed random unit direction; each designated
/// witness is independently redrawn as a normal with probability labelNoise
/// while keeping its Anomalous instance label.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace milstroud
