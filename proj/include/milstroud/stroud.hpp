#pragma once

#include <memory>
#include <vector>

#include "milstroud/aggregation.hpp"
#include "milstroud/evaluation.hpp"
#include "milstroud/scorer.hpp"
#include "milstroud/verdict.hpp"

namespace milstroud {

/// Single-instance comparator: the baseline pools every training instance.
struct InstanceBaseline {
  std::vector<double> sortedScores;
  std::size_t size() const { return sortedScores.size(); }
};

enum class StroudRule {
  AnyInstance,        // bag p-value is the minimum instance p-value
  AggregateThenTest,  // aggregate instance scores, then one p-value against the instance baseline
};

InstanceBaseline make_instance_baseline(std::vector<double> trainingInstanceScores);

double stroud_instance_pvalue(const InstanceBaseline& ib, double s);

/// Bag decision from instance-level tests. Under AnyInstance the bag is
/// Anomalous at confidence c iff some instance has p <= 1 - c; the verdict's
/// score is the largest instance strangeness and its p-value the smallest
/// instance p-value. `f` is used only by AggregateThenTest.
BagVerdict stroud_bag_decision(const Bag& bag, const InstanceBaseline& ib,
                               const StrangenessScorer& scorer, StroudRule rule,
                               AggregateFunction f, const std::vector<double>& levels);

struct StroudModel {
  std::unique_ptr<StrangenessScorer> scorer;
  InstanceBaseline baseline;
};

/// Fits the comparator on pooled training instances. LOF always runs with
/// ReferenceGlobal scope here; training instances are scored leaving
/// themselves out of their own neighborhoods.
StroudModel fit_stroud(const ScorerSpec& spec, const std::vector<Bag>& trainingBags);

struct StroudResult {
  InstanceBaseline baseline;
  std::vector<BagVerdict> verdicts;
  RocCurve roc;
};

StroudResult run_stroud_experiment(const Dataset& d, const ScorerSpec& spec, StroudRule rule,
                                   AggregateFunction f, const std::vector<double>& levels);

StroudResult run_stroud_experiment(const Dataset& d, const StroudModel& model, StroudRule rule,
                                   AggregateFunction f, const std::vector<double>& levels);

}  // namespace milstroud
