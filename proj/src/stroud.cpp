#include "milstroud/stroud.hpp"

#include <algorithm>

#include "milstroud/mil_stroud.hpp"

namespace milstroud {

InstanceBaseline make_instance_baseline(std::vector<double> trainingInstanceScores) {
  if (trainingInstanceScores.empty()) throw ConfigError("empty instance baseline");
  std::sort(trainingInstanceScores.begin(), trainingInstanceScores.end());
  return {std::move(trainingInstanceScores)};
}

double stroud_instance_pvalue(const InstanceBaseline& ib, double s) {
  return conformal_p_value(ib.sortedScores, s);
}

BagVerdict stroud_bag_decision(const Bag& bag, const InstanceBaseline& ib,
                               const StrangenessScorer& scorer, StroudRule rule,
                               AggregateFunction f, const std::vector<double>& levels) {
  const auto scores =
      with_context("bag " + std::to_string(bag.id), [&] { return scorer.score_instances(bag); });
  if (scores.empty()) throw DataError("bag " + std::to_string(bag.id) + " has no instances");
  BagVerdict v;
  v.bagId = bag.id;
  v.truth = bag.label;
  if (rule == StroudRule::AnyInstance) {
    v.score = *std::max_element(scores.begin(), scores.end());
    v.pValue = 1.0;
    for (double s : scores) v.pValue = std::min(v.pValue, stroud_instance_pvalue(ib, s));
  } else {
    v.score = aggregate(scores, f);
    v.pValue = stroud_instance_pvalue(ib, v.score);
  }
  v.anomalous = predictions_for(v.pValue, levels);
  return v;
}

StroudModel fit_stroud(const ScorerSpec& spec, const std::vector<Bag>& trainingBags) {
  StroudModel m;
  if (spec.kind == StrangenessKind::Lof) {
    auto lof = std::make_unique<ReferenceLofScorer>(pooled_instances(trainingBags), spec.lof.k);
    m.baseline = make_instance_baseline(lof->score_reference_instances());
    m.scorer = std::move(lof);
    return m;
  }
  m.scorer = fit_scorer(spec, trainingBags);
  std::vector<double> scores;
  for (const auto& bag : trainingBags) {
    const auto s = m.scorer->score_training_instances(bag);
    scores.insert(scores.end(), s.begin(), s.end());
  }
  m.baseline = make_instance_baseline(std::move(scores));
  return m;
}

StroudResult run_stroud_experiment(const Dataset& d, const StroudModel& model, StroudRule rule,
                                   AggregateFunction f, const std::vector<double>& levels) {
  StroudResult r;
  r.baseline = model.baseline;
  with_context("classify", [&] {
    for (const auto& bag : d.testBags) {
      r.verdicts.push_back(stroud_bag_decision(bag, r.baseline, *model.scorer, rule, f, levels));
    }
  });
  r.roc = roc_from_verdicts(r.verdicts, levels);
  return r;
}

StroudResult run_stroud_experiment(const Dataset& d, const ScorerSpec& spec, StroudRule rule,
                                   AggregateFunction f, const std::vector<double>& levels) {
  const auto model = with_context("fit", [&] { return fit_stroud(spec, d.trainingBags); });
  return run_stroud_experiment(d, model, rule, f, levels);
}

}  // namespace milstroud
