#include "milstroud/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "milstroud/text_format.hpp"

namespace milstroud {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto notSpace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notSpace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notSpace).base(), s.end());
  return s;
}

std::optional<Label> parse_label(const std::string& cell) {
  const auto t = trim(cell);
  if (t.empty()) return std::nullopt;
  if (t == "0") return Label::Normal;
  if (t == "1") return Label::Anomalous;
  throw std::invalid_argument("label must be 0 or 1, got '" + t + "'");
}

std::string label_cell(const std::optional<Label>& l) {
  if (!l) return "";
  return *l == Label::Anomalous ? "1" : "0";
}

std::int64_t parse_int(const std::string& cell) {
  const double v = parse_double(cell);
  if (v != std::floor(v)) throw std::invalid_argument("not an integer: '" + cell + "'");
  return static_cast<std::int64_t>(v);
}

}  // namespace

InstanceTable parse_feature_csv(std::istream& in, const std::string& sourceName) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(sourceName + ": empty file, header expected");
  const auto header = split_csv(line);

  std::map<std::size_t, std::size_t> featureCol;  // feature index -> column
  std::optional<std::size_t> idCol, labelCol, runCol, bagCol, bagLabelCol;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name.size() > 1 && name[0] == 'f' &&
        std::all_of(name.begin() + 1, name.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
      featureCol[std::stoul(name.substr(1))] = c;
    } else if (name == "id") {
      idCol = c;
    } else if (name == "label") {
      labelCol = c;
    } else if (name == "run_id") {
      runCol = c;
    } else if (name == "bag_id") {
      bagCol = c;
    } else if (name == "bag_label") {
      bagLabelCol = c;
    } else {
      throw DataError(sourceName + ":1: unknown column '" + name + "'");
    }
  }
  if (featureCol.empty()) throw DataError(sourceName + ":1: no feature columns f0..");
  if (featureCol.rbegin()->first + 1 != featureCol.size()) {
    throw DataError(sourceName + ":1: feature columns must be f0..f" +
                    std::to_string(featureCol.size() - 1) + " without gaps");
  }

  InstanceTable table;
  table.featureDim = featureCol.size();
  table.hasLabel = labelCol.has_value();
  table.hasRunId = runCol.has_value();
  table.hasBags = bagCol.has_value();

  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = sourceName + ":" + std::to_string(lineNo);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    InstanceRow row;
    try {
      row.instance.id = idCol ? static_cast<std::size_t>(parse_int(cells[*idCol])) : table.rows.size();
      row.instance.features.resize(table.featureDim);
      for (const auto& [j, c] : featureCol) {
        const double v = parse_double(cells[c]);
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in f" + std::to_string(j));
        row.instance.features[j] = v;
      }
      if (labelCol) row.label = parse_label(cells[*labelCol]);
      if (runCol && !trim(cells[*runCol]).empty()) row.runId = parse_int(cells[*runCol]);
      if (bagCol) row.bagId = static_cast<std::size_t>(parse_int(cells[*bagCol]));
      if (bagLabelCol) row.bagLabel = parse_label(cells[*bagLabelCol]);
    } catch (const std::invalid_argument& e) {
      throw DataError(where + ": " + e.what());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

InstanceTable load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_feature_csv(in, path.string());
}

void write_feature_csv(std::ostream& out, const InstanceTable& table) {
  const bool hasBagLabel = table.hasBags;
  out << "id";
  if (table.hasBags) out << ",bag_id";
  if (hasBagLabel) out << ",bag_label";
  if (table.hasLabel) out << ",label";
  if (table.hasRunId) out << ",run_id";
  for (std::size_t j = 0; j < table.featureDim; ++j) out << ",f" << j;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.instance.id;
    if (table.hasBags) out << ',' << (row.bagId ? std::to_string(*row.bagId) : "");
    if (hasBagLabel) out << ',' << label_cell(row.bagLabel);
    if (table.hasLabel) out << ',' << label_cell(row.label);
    if (table.hasRunId) out << ',' << (row.runId ? std::to_string(*row.runId) : "");
    for (double v : row.instance.features) out << ',' << format_double(v);
    out << '\n';
  }
}

InstanceTable table_from_bags(const std::vector<Bag>& bags, std::size_t featureDim) {
  InstanceTable t;
  t.featureDim = featureDim;
  t.hasBags = true;
  t.hasLabel = true;
  for (const auto& bag : bags) {
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      InstanceRow row;
      row.instance = bag.instances[i];
      row.bagId = bag.id;
      row.bagLabel = bag.label;
      if (i < bag.instanceLabels.size()) row.label = bag.instanceLabels[i];
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

std::vector<Bag> bags_from_table(const InstanceTable& table) {
  if (!table.hasBags) throw DataError("table has no bag_id column");
  std::vector<Bag> bags;
  std::map<std::size_t, std::size_t> index;
  for (const auto& row : table.rows) {
    if (!row.bagId) throw DataError("row for instance " + std::to_string(row.instance.id) + " has no bag_id");
    auto [it, inserted] = index.try_emplace(*row.bagId, bags.size());
    if (inserted) {
      bags.emplace_back();
      bags.back().id = *row.bagId;
      bags.back().label = row.bagLabel;
    }
    Bag& bag = bags[it->second];
    bag.instances.push_back(row.instance);
    bag.instanceLabels.push_back(row.label);
    if (row.bagLabel && !bag.label) bag.label = row.bagLabel;
  }
  for (auto& bag : bags) {
    if (!bag.label) bag.label = label_from_instances(bag.instanceLabels);
    if (std::none_of(bag.instanceLabels.begin(), bag.instanceLabels.end(),
                     [](const auto& l) { return l.has_value(); })) {
      bag.instanceLabels.clear();
    }
  }
  return bags;
}

std::vector<Instance> window_signal(const std::vector<double>& signal, const WindowingSpec& spec,
                                    std::size_t firstId) {
  if (spec.windowSize == 0 || spec.stride == 0) {
    throw ConfigError("window size and stride must be positive");
  }
  if (signal.size() < spec.windowSize) {
    throw DataError("signal of length " + std::to_string(signal.size()) +
                    " is shorter than one window of " + std::to_string(spec.windowSize));
  }
  const std::size_t count = (signal.size() - spec.windowSize) / spec.stride + 1;
  std::vector<Instance> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto begin = signal.begin() + static_cast<std::ptrdiff_t>(i * spec.stride);
    out[i].id = firstId + i;
    out[i].features.assign(begin, begin + static_cast<std::ptrdiff_t>(spec.windowSize));
  }
  return out;
}

std::vector<double> corrupt_snr(const std::vector<double>& signal, double snrDb,
                                std::uint64_t seed) {
  if (!std::isfinite(snrDb)) throw ConfigError("SNR must be finite; skip corruption for clean runs");
  if (signal.empty()) throw DataError("cannot corrupt an empty signal");
  double power = 0.0;
  for (double v : signal) power += v * v;
  power /= static_cast<double>(signal.size());
  if (!(power > 0.0)) throw DataError("signal has zero power; SNR is undefined");
  const double sigma = std::sqrt(power / std::pow(10.0, snrDb / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = signal[i] + noise(rng);
  return out;
}

namespace {

Bag make_bag(std::size_t id, std::vector<const InstanceRow*> rows) {
  Bag bag;
  bag.id = id;
  for (const auto* r : rows) {
    bag.instances.push_back(r->instance);
    bag.instanceLabels.push_back(r->label.value_or(Label::Normal));
  }
  bag.label = label_from_instances(bag.instanceLabels);
  return bag;
}

}  // namespace

Composition compose_bags(const InstanceTable& table, const BagCompositionSpec& spec) {
  if (!table.hasLabel) throw DataError("bag composition needs a label column");
  if (spec.normalBagSize < 2 || spec.anomalousBagSize < 2) {
    throw ConfigError("bag sizes must be at least 2");
  }
  if (spec.trainBags == 0) throw ConfigError("at least one training bag is required");

  std::vector<const InstanceRow*> normals;
  std::vector<const InstanceRow*> anomalies;
  for (const auto& row : table.rows) {
    if (!row.label) {
      throw DataError("instance " + std::to_string(row.instance.id) + " has no label");
    }
    (*row.label == Label::Anomalous ? anomalies : normals).push_back(&row);
  }

  const std::size_t trainNeed = spec.trainBags * spec.normalBagSize;
  if (normals.size() < trainNeed) {
    throw DataError("need " + std::to_string(trainNeed) + " normal instances for " +
                    std::to_string(spec.trainBags) + " training bags, have " +
                    std::to_string(normals.size()) + " (short by " +
                    std::to_string(trainNeed - normals.size()) + ")");
  }

  Composition out;
  Dataset& d = out.dataset;
  d.featureDim = table.featureDim;
  std::mt19937_64 rng(spec.seed);
  std::size_t nextId = 0;

  if (spec.insertion == AnomalyInsertion::RandomIntoHalf) {
    std::shuffle(normals.begin(), normals.end(), rng);
  }
  for (std::size_t b = 0; b < spec.trainBags; ++b) {
    const auto first = normals.begin() + static_cast<std::ptrdiff_t>(b * spec.normalBagSize);
    d.trainingBags.push_back(make_bag(nextId++, {first, first + static_cast<std::ptrdiff_t>(spec.normalBagSize)}));
  }
  std::vector<const InstanceRow*> restNormals(normals.begin() + static_cast<std::ptrdiff_t>(trainNeed),
                                              normals.end());

  if (spec.insertion == AnomalyInsertion::RandomIntoHalf) {
    const std::size_t nTest = spec.testBags.value_or(restNormals.size() / spec.normalBagSize);
    if (nTest == 0) throw DataError("no normal instances left for test bags");
    if (restNormals.size() < 2 * nTest) {
      throw DataError("need " + std::to_string(2 * nTest) + " remaining normal instances for " +
                      std::to_string(nTest) + " test bags, have " +
                      std::to_string(restNormals.size()));
    }
    std::vector<std::vector<const InstanceRow*>> members(nTest);
    for (std::size_t i = 0; i < restNormals.size(); ++i) members[i % nTest].push_back(restNormals[i]);
    if (anomalies.empty()) {
      out.warnings.emplace_back("no anomalous instances: every test bag is Normal");
    } else {
      std::vector<std::size_t> order(nTest);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::size_t nTargets = std::min(nTest / 2, anomalies.size());
      if (nTargets == 0) nTargets = 1;
      std::shuffle(anomalies.begin(), anomalies.end(), rng);
      for (std::size_t i = 0; i < anomalies.size(); ++i) {
        members[order[i % nTargets]].push_back(anomalies[i]);
      }
      for (std::size_t t = 0; t < nTargets; ++t) {
        std::shuffle(members[order[t]].begin(), members[order[t]].end(), rng);
      }
    }
    for (auto& m : members) d.testBags.push_back(make_bag(nextId++, std::move(m)));
    return out;
  }

  // ContiguousByLabel: chunk rows in file order.
  const std::size_t leftover = restNormals.size() % spec.normalBagSize;
  for (std::size_t start = 0; start + spec.normalBagSize <= restNormals.size();
       start += spec.normalBagSize) {
    const auto first = restNormals.begin() + static_cast<std::ptrdiff_t>(start);
    d.testBags.push_back(make_bag(nextId++, {first, first + static_cast<std::ptrdiff_t>(spec.normalBagSize)}));
  }
  if (leftover > 0) {
    out.warnings.push_back("dropped " + std::to_string(leftover) + " trailing normal instances");
  }
  if (anomalies.empty()) out.warnings.emplace_back("no anomalous instances: every test bag is Normal");

  // A run is a maximal stretch of consecutive anomalous rows sharing run_id
  // (or simply consecutive in the file when there is no run_id column).
  std::vector<std::vector<const InstanceRow*>> runs;
  const InstanceRow* prev = nullptr;
  for (const auto& row : table.rows) {
    if (*row.label != Label::Anomalous) {
      prev = nullptr;
      continue;
    }
    if (!prev || prev->runId != row.runId) runs.emplace_back();
    runs.back().push_back(&row);
    prev = &row;
  }
  std::size_t droppedAnomalies = 0;
  for (const auto& run : runs) {
    std::size_t start = 0;
    for (; start + spec.anomalousBagSize <= run.size(); start += spec.anomalousBagSize) {
      const auto first = run.begin() + static_cast<std::ptrdiff_t>(start);
      d.testBags.push_back(
          make_bag(nextId++, {first, first + static_cast<std::ptrdiff_t>(spec.anomalousBagSize)}));
    }
    droppedAnomalies += run.size() - start;
  }
  if (droppedAnomalies > 0) {
    out.warnings.push_back("dropped " + std::to_string(droppedAnomalies) +
                           " anomalous instances from incomplete run tails");
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (featureDim == 0) throw ConfigError("synthetic featureDim must be positive");
  if (nTrainBags == 0) throw ConfigError("synthetic nTrainBags must be positive");
  if (bagSize < 2) throw ConfigError("synthetic bagSize must be at least 2");
  if (!(witnessFraction > 0.0 && witnessFraction <= 1.0)) {
    throw ConfigError("witnessFraction must lie in (0, 1]");
  }
  if (!(labelNoise >= 0.0 && labelNoise < 1.0)) throw ConfigError("labelNoise must lie in [0, 1)");
  if (!std::isfinite(anomalyShift)) throw ConfigError("anomalyShift must be finite");
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> direction(spec.featureDim);
  double norm = 0.0;
  while (!(norm > 1e-12)) {
    norm = 0.0;
    for (auto& v : direction) {
      v = gauss(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
  }
  for (auto& v : direction) v /= norm;

  std::size_t nextInstance = 0;
  std::size_t nextBag = 0;
  const auto normal_instance = [&] {
    Instance inst;
    inst.id = nextInstance++;
    inst.features.resize(spec.featureDim);
    for (auto& v : inst.features) v = gauss(rng);
    return inst;
  };
  const auto normal_bag = [&] {
    Bag bag;
    bag.id = nextBag++;
    bag.label = Label::Normal;
    for (std::size_t i = 0; i < spec.bagSize; ++i) {
      bag.instances.push_back(normal_instance());
      bag.instanceLabels.emplace_back(Label::Normal);
    }
    return bag;
  };

  const auto nWitness = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(spec.witnessFraction * static_cast<double>(spec.bagSize))));

  Dataset d;
  d.featureDim = spec.featureDim;
  for (std::size_t b = 0; b < spec.nTrainBags; ++b) d.trainingBags.push_back(normal_bag());
  for (std::size_t b = 0; b < spec.nTestBagsPerClass; ++b) {
    d.testBags.push_back(normal_bag());

    Bag bag = normal_bag();
    bag.label = Label::Anomalous;
    std::vector<std::size_t> slots(spec.bagSize);
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    for (std::size_t w = 0; w < nWitness; ++w) {
      const std::size_t slot = slots[w];
      bag.instanceLabels[slot] = Label::Anomalous;
      // A noisy witness keeps the normal draw it already has.
      if (unit(rng) < spec.labelNoise) continue;
      for (std::size_t j = 0; j < spec.featureDim; ++j) {
        bag.instances[slot].features[j] += spec.anomalyShift * direction[j];
      }
    }
    d.testBags.push_back(std::move(bag));
  }
  return d;
}

}  // namespace milstroud
