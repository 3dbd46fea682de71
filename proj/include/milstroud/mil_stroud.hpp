#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "milstroud/aggregation.hpp"
#include "milstroud/core_types.hpp"
#include "milstroud/evaluation.hpp"
#include "milstroud/scorer.hpp"
#include "milstroud/verdict.hpp"

namespace milstroud {

/// Ascending bag strangeness of the normal training bags, tagged with the
/// scorer and aggregate that produced it.
struct Baseline {
  std::vector<double> sortedScores;
  nlohmann::json descriptor;

  std::size_t size() const { return sortedScores.size(); }

  nlohmann::json to_json() const;
  static Baseline from_json(const nlohmann::json& j);
};

/// {"scorer": scorer.descriptor(), "aggregate": name}
nlohmann::json baseline_descriptor(const StrangenessScorer& scorer, AggregateFunction f);

/// (1 + m) / (n + 1) where m counts the sorted scores that are >= score.
/// Throws std::invalid_argument for an empty baseline or non-finite score.
double conformal_p_value(std::span<const double> sortedScores, double score);

/// Aggregate of the per-instance strangeness of b, instances scored in bag
/// order. Scorer errors are rethrown naming the bag.
double bag_score(const Bag& b, const StrangenessScorer& scorer, AggregateFunction f);

/// Training bags are scored with score_training_instances so that a scorer
/// whose reference set is the training data never counts an instance as its
/// own neighbor.
Baseline create_baseline(const std::vector<Bag>& trainingBags, const StrangenessScorer& scorer,
                         AggregateFunction f);

double p_value(const Baseline& baseline, double score);

/// Verdict for an already computed bag score.
BagVerdict verdict_for_score(const Bag& qb, double score, const Baseline& baseline,
                             const std::vector<double>& levels);

/// Scores qb, computes its p-value against the baseline, and predicts
/// Anomalous at every confidence c with p <= 1 - c. Throws ConfigError if the
/// baseline was built with a different scorer or aggregate.
BagVerdict classify_bag(const Bag& qb, const Baseline& baseline, const StrangenessScorer& scorer,
                        AggregateFunction f, const std::vector<double>& levels);

struct ExperimentResult {
  Baseline baseline;
  std::vector<BagVerdict> verdicts;
  RocCurve roc;
};

/// Builds the baseline from the training bags and classifies every test bag.
/// Errors are rethrown prefixed with the failing stage.
ExperimentResult run_experiment(const Dataset& d, const StrangenessScorer& fitted,
                                AggregateFunction f, const std::vector<double>& levels);

/// Fits the scorer on training bags only, then runs the experiment.
ExperimentResult run_experiment(const Dataset& d, const ScorerSpec& spec, AggregateFunction f,
                                const std::vector<double>& levels);

}  // namespace milstroud
