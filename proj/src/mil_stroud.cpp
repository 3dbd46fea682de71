#include "milstroud/mil_stroud.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace milstroud {

nlohmann::json Baseline::to_json() const {
  return {{"sortedScores", sortedScores}, {"n", sortedScores.size()}, {"descriptor", descriptor}};
}

Baseline Baseline::from_json(const nlohmann::json& j) {
  try {
    Baseline b{j.at("sortedScores").get<std::vector<double>>(), j.at("descriptor")};
    if (!std::is_sorted(b.sortedScores.begin(), b.sortedScores.end())) {
      throw DataError("baseline scores are not sorted ascending");
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed baseline JSON: ") + e.what());
  }
}

nlohmann::json baseline_descriptor(const StrangenessScorer& scorer, AggregateFunction f) {
  return {{"scorer", scorer.descriptor()}, {"aggregate", std::string(to_string(f))}};
}

double conformal_p_value(std::span<const double> sortedScores, double score) {
  if (sortedScores.empty()) throw std::invalid_argument("p-value against an empty baseline");
  if (!std::isfinite(score)) throw std::invalid_argument("p-value of a non-finite score");
  // Leftmost insertion index: every baseline value from here on is >= score.
  const auto index = static_cast<std::size_t>(
      std::lower_bound(sortedScores.begin(), sortedScores.end(), score) - sortedScores.begin());
  const auto n = static_cast<double>(sortedScores.size());
  return (1.0 + n - static_cast<double>(index)) / (n + 1.0);
}

double bag_score(const Bag& b, const StrangenessScorer& scorer, AggregateFunction f) {
  return with_context("bag " + std::to_string(b.id), [&] {
    const auto scores = scorer.score_instances(b);
    return aggregate(scores, f);
  });
}

Baseline create_baseline(const std::vector<Bag>& trainingBags, const StrangenessScorer& scorer,
                         AggregateFunction f) {
  if (trainingBags.empty()) throw ConfigError("empty baseline: no training bags");
  Baseline baseline;
  baseline.descriptor = baseline_descriptor(scorer, f);
  baseline.sortedScores.reserve(trainingBags.size());
  for (const auto& bag : trainingBags) {
    baseline.sortedScores.push_back(with_context("bag " + std::to_string(bag.id), [&] {
      return aggregate(scorer.score_training_instances(bag), f);
    }));
  }
  std::sort(baseline.sortedScores.begin(), baseline.sortedScores.end());
  return baseline;
}

double p_value(const Baseline& baseline, double score) {
  return conformal_p_value(baseline.sortedScores, score);
}

BagVerdict verdict_for_score(const Bag& qb, double score, const Baseline& baseline,
                             const std::vector<double>& levels) {
  BagVerdict v;
  v.bagId = qb.id;
  v.score = score;
  v.pValue = p_value(baseline, score);
  v.truth = qb.label;
  v.anomalous = predictions_for(v.pValue, levels);
  return v;
}

BagVerdict classify_bag(const Bag& qb, const Baseline& baseline, const StrangenessScorer& scorer,
                        AggregateFunction f, const std::vector<double>& levels) {
  if (baseline_descriptor(scorer, f) != baseline.descriptor) {
    throw ConfigError("baseline was built with " + baseline.descriptor.dump() +
                      " but the query uses " + baseline_descriptor(scorer, f).dump());
  }
  for (double c : levels) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("confidence levels must lie in [0, 1]");
  }
  return verdict_for_score(qb, bag_score(qb, scorer, f), baseline, levels);
}

ExperimentResult run_experiment(const Dataset& d, const StrangenessScorer& fitted,
                                AggregateFunction f, const std::vector<double>& levels) {
  ExperimentResult r;
  r.baseline = with_context("baseline", [&] { return create_baseline(d.trainingBags, fitted, f); });
  with_context("classify", [&] {
    r.verdicts.reserve(d.testBags.size());
    for (const auto& bag : d.testBags) {
      r.verdicts.push_back(classify_bag(bag, r.baseline, fitted, f, levels));
    }
  });
  r.roc = with_context("evaluate", [&] { return roc_from_verdicts(r.verdicts, levels); });
  return r;
}

ExperimentResult run_experiment(const Dataset& d, const ScorerSpec& spec, AggregateFunction f,
                                const std::vector<double>& levels) {
  const auto scorer = with_context("fit", [&] { return fit_scorer(spec, d.trainingBags); });
  return run_experiment(d, *scorer, f, levels);
}

}  // namespace milstroud
