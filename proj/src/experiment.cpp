#include "milstroud/experiment.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "milstroud/mil_stroud.hpp"
#include "milstroud/text_format.hpp"

namespace milstroud {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(where + "." + key + " must be a nonnegative integer");
    }
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::filesystem::path resolve(const json& obj, const char* key, const std::string& where,
                              const std::filesystem::path& baseDir) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    throw ConfigError(where + "." + key + " must be a path string");
  }
  std::filesystem::path p = obj.at(key).get<std::string>();
  return p.is_relative() && !baseDir.empty() ? baseDir / p : p;
}

bool is_positive_integer(const json& v) {
  return v.is_number_integer() && v.get<std::int64_t>() > 0;
}

std::vector<std::size_t> parse_k_range(const json& v, const std::string& where) {
  std::vector<std::size_t> ks;
  if (v.is_array()) {
    for (const auto& k : v) {
      if (!is_positive_integer(k)) {
        throw ConfigError(where + " entries must be positive integers");
      }
      ks.push_back(k.get<std::size_t>());
    }
  } else if (v.is_object()) {
    reject_unknown_keys(v, where, {"from", "to"});
    const auto from = get_or<std::size_t>(v, "from", 0, where);
    const auto to = get_or<std::size_t>(v, "to", 0, where);
    if (from == 0 || to < from) throw ConfigError(where + " needs 1 <= from <= to");
    for (std::size_t k = from; k <= to; ++k) ks.push_back(k);
  } else if (is_positive_integer(v)) {
    ks.push_back(v.get<std::size_t>());
  } else {
    throw ConfigError(where + " must be a positive integer, a list, or {from, to}");
  }
  if (ks.empty()) throw ConfigError(where + " is empty");
  return ks;
}

BagCompositionSpec parse_composition(const json& c, const std::string& where) {
  reject_unknown_keys(c, where,
                      {"trainBags", "normalBagSize", "anomalousBagSize", "testBags", "insertion", "seed"});
  BagCompositionSpec s;
  s.trainBags = get_or(c, "trainBags", s.trainBags, where);
  s.normalBagSize = get_or(c, "normalBagSize", s.normalBagSize, where);
  s.anomalousBagSize = get_or(c, "anomalousBagSize", s.anomalousBagSize, where);
  if (c.contains("testBags") && !c.at("testBags").is_null()) {
    s.testBags = get_or<std::size_t>(c, "testBags", 0, where);
  }
  const auto insertion = get_or<std::string>(c, "insertion", "contiguous", where);
  if (insertion == "contiguous") {
    s.insertion = AnomalyInsertion::ContiguousByLabel;
  } else if (insertion == "random-into-half") {
    s.insertion = AnomalyInsertion::RandomIntoHalf;
  } else {
    throw ConfigError(where + ".insertion must be contiguous|random-into-half");
  }
  s.seed = get_or(c, "seed", s.seed, where);
  return s;
}

DataSource parse_data(const json& d, const std::filesystem::path& baseDir) {
  reject_unknown_keys(d, "data", {"synthetic", "bags", "instances", "signals"});
  if (d.size() != 1) throw ConfigError("data must name exactly one source");
  if (d.contains("synthetic")) {
    const auto& s = d.at("synthetic");
    const std::string w = "data.synthetic";
    reject_unknown_keys(s, w,
                        {"featureDim", "nTrainBags", "nTestBagsPerClass", "bagSize", "anomalyShift",
                         "witnessFraction", "labelNoise", "seed"});
    SyntheticSpec spec;
    spec.featureDim = get_or(s, "featureDim", spec.featureDim, w);
    spec.nTrainBags = get_or(s, "nTrainBags", spec.nTrainBags, w);
    spec.nTestBagsPerClass = get_or(s, "nTestBagsPerClass", spec.nTestBagsPerClass, w);
    spec.bagSize = get_or(s, "bagSize", spec.bagSize, w);
    spec.anomalyShift = get_or(s, "anomalyShift", spec.anomalyShift, w);
    spec.witnessFraction = get_or(s, "witnessFraction", spec.witnessFraction, w);
    spec.labelNoise = get_or(s, "labelNoise", spec.labelNoise, w);
    spec.seed = get_or(s, "seed", spec.seed, w);
    spec.validate();
    return SyntheticSource{spec};
  }
  if (d.contains("bags")) {
    const auto& b = d.at("bags");
    reject_unknown_keys(b, "data.bags", {"train", "test"});
    return BaggedSource{resolve(b, "train", "data.bags", baseDir),
                        resolve(b, "test", "data.bags", baseDir)};
  }
  if (d.contains("instances")) {
    const auto& i = d.at("instances");
    reject_unknown_keys(i, "data.instances", {"path", "composition"});
    return InstanceSource{resolve(i, "path", "data.instances", baseDir),
                          parse_composition(i.value("composition", json::object()),
                                            "data.instances.composition")};
  }
  const auto& s = d.at("signals");
  const std::string w = "data.signals";
  reject_unknown_keys(s, w, {"path", "windowSize", "stride", "snrDb", "noiseSeed", "composition"});
  SignalSource src;
  src.path = resolve(s, "path", w, baseDir);
  src.windowing.windowSize = get_or(s, "windowSize", src.windowing.windowSize, w);
  src.windowing.stride = get_or(s, "stride", src.windowing.windowSize, w);
  if (s.contains("snrDb") && !s.at("snrDb").is_null()) src.snrDb = get_or(s, "snrDb", 0.0, w);
  src.noiseSeed = get_or(s, "noiseSeed", src.noiseSeed, w);
  src.composition = parse_composition(s.value("composition", json::object()), w + ".composition");
  return src;
}

std::string arch_name(const AeArchitecture& a) {
  return std::to_string(a.inputDim) + "x" + std::to_string(a.hidden1) + "x" +
         std::to_string(a.hidden2) + "x" + std::to_string(a.latent);
}

json arch_json(const AeArchitecture& a) {
  return {{"architecture", {a.inputDim, a.hidden1, a.hidden2, a.latent}},
          {"dropout", {a.dropout1, a.dropout2}}};
}

MseGrid parse_mse(const json& m) {
  const std::string w = "mse";
  reject_unknown_keys(m, w,
                      {"architectures", "dropout", "epochs", "batchSize", "learningRate",
                       "validationFraction", "seed"});
  MseGrid g;
  std::vector<double> dropout = get_or(m, "dropout", std::vector<double>{0.2, 0.2}, w);
  if (dropout.size() != 2) throw ConfigError("mse.dropout must hold two rates");
  if (!m.contains("architectures") || !m.at("architectures").is_array() ||
      m.at("architectures").empty()) {
    throw ConfigError("mse.architectures must be a non-empty list");
  }
  for (const auto& a : m.at("architectures")) {
    AeArchitecture arch;
    if (a.is_string()) {
      arch = AeArchitecture::for_dataset(a.get<std::string>());
    } else if (a.is_array() && a.size() == 4 &&
               std::all_of(a.begin(), a.end(), is_positive_integer)) {
      arch = {a[0].get<std::size_t>(), a[1].get<std::size_t>(), a[2].get<std::size_t>(),
              a[3].get<std::size_t>()};
    } else {
      throw ConfigError("mse.architectures entries must be [x, L1, L2, y] or a dataset name");
    }
    arch.dropout1 = dropout[0];
    arch.dropout2 = dropout[1];
    arch.validate();
    g.architectures.push_back(arch);
  }
  g.training.epochs = get_or(m, "epochs", g.training.epochs, w);
  g.training.batchSize = get_or(m, "batchSize", g.training.batchSize, w);
  g.training.learningRate = get_or(m, "learningRate", g.training.learningRate, w);
  g.training.validationFraction = get_or(m, "validationFraction", g.training.validationFraction, w);
  g.training.seed = get_or(m, "seed", g.training.seed, w);
  return g;
}

InstanceTable windowed_signal_table(const SignalSource& src) {
  const auto raw = load_feature_csv(src.path);
  if (raw.featureDim != 1 || !raw.hasLabel || !raw.hasRunId) {
    throw DataError(src.path.string() + ": signal CSV needs columns run_id,label,f0");
  }
  InstanceTable out;
  out.featureDim = src.windowing.windowSize;
  out.hasLabel = true;
  out.hasRunId = true;
  std::size_t runIndex = 0;
  for (std::size_t start = 0; start < raw.rows.size();) {
    std::size_t end = start;
    while (end < raw.rows.size() && raw.rows[end].runId == raw.rows[start].runId) ++end;
    std::vector<double> signal;
    for (std::size_t i = start; i < end; ++i) {
      if (raw.rows[i].label != raw.rows[start].label) {
        throw DataError(src.path.string() + ": run " + std::to_string(*raw.rows[start].runId) +
                        " mixes labels");
      }
      signal.push_back(raw.rows[i].instance.features[0]);
    }
    if (src.snrDb) signal = corrupt_snr(signal, *src.snrDb, src.noiseSeed + runIndex);
    for (auto& inst : window_signal(signal, src.windowing, out.rows.size())) {
      InstanceRow row;
      row.instance = std::move(inst);
      row.label = raw.rows[start].label;
      row.runId = raw.rows[start].runId;
      out.rows.push_back(std::move(row));
    }
    start = end;
    ++runIndex;
  }
  return out;
}

std::string cell_name(const std::string& method, const std::string& kind, const std::string& hp,
                      const std::string& aggregate) {
  std::string n = method + "-" + kind + "-" + hp;
  if (!aggregate.empty()) n += "-" + aggregate;
  return n;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& baseDir) {
  reject_unknown_keys(j, "config",
                      {"data", "lof", "mse", "aggregates", "confidenceStep", "stroud", "output"});
  ExperimentConfig cfg;
  if (!j.contains("data")) throw ConfigError("config.data is required");
  cfg.data = parse_data(j.at("data"), baseDir);

  if (j.contains("lof")) {
    const auto& l = j.at("lof");
    reject_unknown_keys(l, "lof", {"k", "scope"});
    if (!l.contains("k")) throw ConfigError("lof.k is required");
    LofGrid g;
    g.ks = parse_k_range(l.at("k"), "lof.k");
    if (l.contains("scope")) {
      const auto& sj = l.at("scope");
      const json list = sj.is_array() ? sj : json::array({sj});
      if (list.empty()) throw ConfigError("lof.scope must not be empty");
      g.scopes.clear();
      for (const auto& item : list) {
        if (item == "bag-local") {
          g.scopes.push_back(LofScope::BagLocal);
        } else if (item == "reference-global") {
          g.scopes.push_back(LofScope::ReferenceGlobal);
        } else {
          throw ConfigError("lof.scope must be bag-local|reference-global or a list of them");
        }
      }
    }
    cfg.lof = g;
  }
  if (j.contains("mse")) cfg.mse = parse_mse(j.at("mse"));
  if (!cfg.lof && !cfg.mse) throw ConfigError("config needs at least one of lof, mse");

  if (j.contains("aggregates")) {
    if (!j.at("aggregates").is_array() || j.at("aggregates").empty()) {
      throw ConfigError("aggregates must be a non-empty list");
    }
    for (const auto& a : j.at("aggregates")) {
      if (!a.is_string()) throw ConfigError("aggregates entries must be names");
      cfg.aggregates.push_back(parse_aggregate(a.get<std::string>()));
    }
  } else {
    cfg.aggregates.assign(kAllAggregates.begin(), kAllAggregates.end());
  }

  cfg.confidenceStep = get_or(j, "confidenceStep", cfg.confidenceStep, "config");
  confidence_grid(cfg.confidenceStep);

  if (j.contains("stroud")) {
    const auto& s = j.at("stroud");
    reject_unknown_keys(s, "stroud", {"enabled", "k", "rule"});
    cfg.stroud.enabled = get_or(s, "enabled", true, "stroud");
    if (s.contains("k")) {
      cfg.stroud.lofKs = parse_k_range(s.at("k"), "stroud.k");
    } else if (cfg.lof) {
      cfg.stroud.lofKs = cfg.lof->ks;
    }
    const auto rule = get_or<std::string>(s, "rule", "any-instance", "stroud");
    if (rule == "any-instance") {
      cfg.stroud.rule = StroudRule::AnyInstance;
    } else if (rule == "aggregate") {
      cfg.stroud.rule = StroudRule::AggregateThenTest;
    } else {
      throw ConfigError("stroud.rule must be any-instance|aggregate");
    }
  }
  cfg.outputDir = get_or<std::string>(j, "output", "results", "config");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

Composition load_dataset(const ExperimentConfig& cfg) {
  return std::visit(
      [](const auto& src) -> Composition {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, SyntheticSource>) {
          return {generate_synthetic(src.spec), {}};
        } else if constexpr (std::is_same_v<T, BaggedSource>) {
          const auto train = load_feature_csv(src.train);
          const auto test = load_feature_csv(src.test);
          if (train.featureDim != test.featureDim) {
            throw DataError("train and test CSVs differ in feature dimension");
          }
          Composition c;
          c.dataset.featureDim = train.featureDim;
          c.dataset.trainingBags = bags_from_table(train);
          c.dataset.testBags = bags_from_table(test);
          return c;
        } else if constexpr (std::is_same_v<T, InstanceSource>) {
          return compose_bags(load_feature_csv(src.path), src.composition);
        } else {
          return compose_bags(windowed_signal_table(src), src.composition);
        }
      },
      cfg.data);
}

GridResult run_grid(const ExperimentConfig& cfg, const Dataset& d, std::size_t jobs) {
  const auto levels = confidence_grid(cfg.confidenceStep);
  GridResult grid;

  // Each unit fits one scorer and fills a contiguous run of cells.
  struct Unit {
    std::size_t firstCell;
    std::function<void(CellResult*)> run;
  };
  std::vector<Unit> units;

  const auto add_mil_unit = [&](const std::string& kind, const std::string& hp,
                                const json& hyper, ScorerSpec spec) {
    const std::size_t first = grid.cells.size();
    for (auto f : cfg.aggregates) {
      CellResult c;
      c.method = "mil-stroud";
      c.strangeness = kind;
      c.hyperparameters = hyper;
      c.aggregate = std::string(to_string(f));
      c.name = cell_name("mil", kind, hp, c.aggregate);
      grid.cells.push_back(std::move(c));
    }
    units.push_back({first, [&cfg, &d, &levels, spec](CellResult* cells) {
                       std::unique_ptr<StrangenessScorer> scorer;
                       try {
                         scorer = with_context("fit", [&] { return fit_scorer(spec, d.trainingBags); });
                       } catch (const std::exception& e) {
                         for (std::size_t i = 0; i < cfg.aggregates.size(); ++i) cells[i].error = e.what();
                         return;
                       }
                       for (std::size_t i = 0; i < cfg.aggregates.size(); ++i) {
                         try {
                           auto r = run_experiment(d, *scorer, cfg.aggregates[i], levels);
                           cells[i].descriptor = r.baseline.descriptor;
                           cells[i].verdicts = std::move(r.verdicts);
                           cells[i].roc = std::move(r.roc);
                         } catch (const std::exception& e) {
                           cells[i].error = e.what();
                         }
                       }
                     }});
  };

  const auto add_stroud_unit = [&](const std::string& kind, const std::string& hp,
                                   const json& hyper, ScorerSpec spec) {
    const std::size_t first = grid.cells.size();
    const bool perAggregate = cfg.stroud.rule == StroudRule::AggregateThenTest;
    const std::vector<AggregateFunction> fs =
        perAggregate ? cfg.aggregates : std::vector<AggregateFunction>{AggregateFunction::Max};
    for (auto f : fs) {
      CellResult c;
      c.method = "stroud";
      c.strangeness = kind;
      c.hyperparameters = hyper;
      if (perAggregate) c.aggregate = std::string(to_string(f));
      c.name = cell_name("stroud", kind, hp, c.aggregate);
      grid.cells.push_back(std::move(c));
    }
    units.push_back({first, [&cfg, &d, &levels, spec, fs](CellResult* cells) {
                       try {
                         const auto model =
                             with_context("fit", [&] { return fit_stroud(spec, d.trainingBags); });
                         for (std::size_t i = 0; i < fs.size(); ++i) {
                           try {
                             auto r = run_stroud_experiment(d, model, cfg.stroud.rule, fs[i], levels);
                             cells[i].descriptor = model.scorer->descriptor();
                             cells[i].verdicts = std::move(r.verdicts);
                             cells[i].roc = std::move(r.roc);
                           } catch (const std::exception& e) {
                             cells[i].error = e.what();
                           }
                         }
                       } catch (const std::exception& e) {
                         for (std::size_t i = 0; i < fs.size(); ++i) cells[i].error = e.what();
                       }
                     }});
  };

  if (cfg.lof) {
    for (auto scope : cfg.lof->scopes) {
      const bool local = scope == LofScope::BagLocal;
      for (auto k : cfg.lof->ks) {
        add_mil_unit("lof", (local ? "k" : "global-k") + std::to_string(k),
                     {{"k", k}, {"scope", local ? "bag-local" : "reference-global"}},
                     ScorerSpec::make_lof(k, scope));
      }
    }
  }
  if (cfg.mse) {
    for (const auto& a : cfg.mse->architectures) {
      add_mil_unit("mse", arch_name(a), arch_json(a), ScorerSpec::make_mse(a, cfg.mse->training));
    }
  }
  if (cfg.stroud.enabled) {
    for (auto k : cfg.stroud.lofKs) {
      add_stroud_unit("lof", "k" + std::to_string(k), {{"k", k}, {"scope", "reference-global"}},
                      ScorerSpec::make_lof(k, LofScope::ReferenceGlobal));
    }
    if (cfg.mse) {
      for (const auto& a : cfg.mse->architectures) {
        add_stroud_unit("mse", arch_name(a), arch_json(a), ScorerSpec::make_mse(a, cfg.mse->training));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t u = next++; u < units.size(); u = next++) {
      units[u].run(grid.cells.data() + units[u].firstCell);
    }
  };
  const std::size_t nThreads = std::max<std::size_t>(1, std::min(jobs, units.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nThreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return grid;
}

namespace {

json auc_json(const CellResult& c) {
  if (c.error || !c.roc.auc) return nullptr;
  return *c.roc.auc;
}

}  // namespace

json summarize(const ExperimentConfig& cfg, const GridResult& grid) {
  json cells = json::array();
  json best = json::object();
  for (const auto& c : grid.cells) {
    json entry = {{"name", c.name},
                  {"method", c.method},
                  {"strangeness", c.strangeness},
                  {"hyperparameters", c.hyperparameters},
                  {"auc", auc_json(c)}};
    if (!c.aggregate.empty()) entry["aggregate"] = c.aggregate;
    if (c.error) {
      entry["error"] = *c.error;
    } else if (!c.roc.auc) {
      entry["aucUndefined"] = "test bags hold a single class";
    }
    cells.push_back(entry);

    if (c.error || !c.roc.auc) continue;
    auto& slot = best[c.method][c.strangeness];
    if (slot.is_null() || *c.roc.auc > slot.at("auc").get<double>()) {
      slot = {{"cell", c.name},
              {"auc", *c.roc.auc},
              {"hyperparameters", c.hyperparameters},
              {"scorerDescriptor", c.descriptor}};
      if (!c.aggregate.empty()) slot["aggregate"] = c.aggregate;
    }
  }
  json summary = {{"best", best}, {"cells", cells}, {"confidenceStep", cfg.confidenceStep}};
  if (cfg.stroud.enabled) {
    summary["stroudBagRule"] =
        cfg.stroud.rule == StroudRule::AnyInstance
            ? "any-instance: bag is anomalous at confidence c iff its smallest instance p-value <= 1 - c"
            : "aggregate: instance scores are aggregated, then tested once against the instance baseline";
  }
  if (!grid.warnings.empty()) summary["warnings"] = grid.warnings;
  return summary;
}

void write_verdicts_csv(std::ostream& out, const std::vector<BagVerdict>& verdicts) {
  out << "bagId,score,pValue,truth\n";
  for (const auto& v : verdicts) {
    out << v.bagId << ',' << format_double(v.score) << ',' << format_double(v.pValue) << ',';
    if (v.truth) out << (*v.truth == Label::Anomalous ? 1 : 0);
    out << '\n';
  }
}

void write_grid_outputs(const ExperimentConfig& cfg, const GridResult& grid,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& c : grid.cells) {
    if (c.error) continue;
    const auto cellDir = dir / c.name;
    std::filesystem::create_directories(cellDir);
    std::ofstream roc(cellDir / "roc.csv");
    write_roc_csv(roc, c.roc);
    std::ofstream verdicts(cellDir / "verdicts.csv");
    write_verdicts_csv(verdicts, c.verdicts);
  }
  std::ofstream summary(dir / "summary.json");
  summary << summarize(cfg, grid).dump(2) << '\n';
  if (!summary) throw DataError("cannot write " + (dir / "summary.json").string());
}

}  // namespace milstroud
