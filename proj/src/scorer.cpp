#include "milstroud/scorer.hpp"

namespace milstroud {

BagLocalLofScorer::BagLocalLofScorer(std::size_t k) : k_(k) {
  if (k == 0) throw ConfigError("LOF requires k >= 1");
}

std::vector<double> BagLocalLofScorer::score_instances(const Bag& bag) const {
  return bag_local_lof(bag.instances, k_);
}

nlohmann::json BagLocalLofScorer::descriptor() const {
  return {{"kind", "lof"}, {"k", k_}, {"scope", "bag-local"}};
}

ReferenceLofScorer::ReferenceLofScorer(std::vector<Instance> references, std::size_t k)
    : model_(ProximityContext(std::move(references)), k) {
  const auto& ctx = model_.context();
  for (std::size_t i = 0; i < ctx.size(); ++i) indexById_.emplace(ctx.reference(i).id, i);
}

std::vector<double> ReferenceLofScorer::score_instances(const Bag& bag) const {
  std::vector<double> out;
  out.reserve(bag.size());
  for (const auto& inst : bag.instances) {
    out.push_back(model_.score(ProximityContext::external(inst)).value());
  }
  return out;
}

std::vector<double> ReferenceLofScorer::score_training_instances(const Bag& bag) const {
  const auto& ctx = model_.context();
  std::vector<double> out;
  out.reserve(bag.size());
  for (const auto& inst : bag.instances) {
    const auto it = indexById_.find(inst.id);
    const bool isReference = it != indexById_.end() && ctx.reference(it->second).features == inst.features;
    out.push_back(isReference ? model_.score_reference(it->second).value()
                              : model_.score(ProximityContext::external(inst)).value());
  }
  return out;
}

nlohmann::json ReferenceLofScorer::descriptor() const {
  return {{"kind", "lof"}, {"k", model_.k()}, {"scope", "reference-global"}};
}

AeMseScorer::AeMseScorer(Autoencoder model, nlohmann::json trainingDescriptor)
    : model_(std::move(model)), trainingDescriptor_(std::move(trainingDescriptor)) {}

std::vector<double> AeMseScorer::score_instances(const Bag& bag) const {
  std::vector<double> out;
  out.reserve(bag.size());
  for (const auto& inst : bag.instances) out.push_back(mse_strangeness(model_, inst).value());
  return out;
}

nlohmann::json AeMseScorer::descriptor() const {
  const auto& a = model_.architecture();
  return {{"kind", "mse"},
          {"architecture",
           {a.inputDim, a.hidden1, a.hidden2, a.latent}},
          {"dropout", {a.dropout1, a.dropout2}},
          {"training", trainingDescriptor_}};
}

ScorerSpec ScorerSpec::make_lof(std::size_t k, LofScope scope) {
  ScorerSpec s;
  s.kind = StrangenessKind::Lof;
  s.lof = {k, scope};
  return s;
}

ScorerSpec ScorerSpec::make_mse(const AeArchitecture& arch, const AeTrainingConfig& cfg) {
  ScorerSpec s;
  s.kind = StrangenessKind::Mse;
  s.architecture = arch;
  s.training = cfg;
  return s;
}

std::unique_ptr<StrangenessScorer> fit_scorer(const ScorerSpec& spec,
                                              const std::vector<Bag>& trainingBags) {
  if (spec.kind == StrangenessKind::Lof) {
    if (spec.lof.scope == LofScope::BagLocal) {
      return std::make_unique<BagLocalLofScorer>(spec.lof.k);
    }
    return std::make_unique<ReferenceLofScorer>(pooled_instances(trainingBags), spec.lof.k);
  }
  const auto& c = spec.training;
  nlohmann::json training = {{"epochs", c.epochs},
                             {"batchSize", c.batchSize},
                             {"learningRate", c.learningRate},
                             {"validationFraction", c.validationFraction},
                             {"loss", c.loss},
                             {"seed", c.seed}};
  return std::make_unique<AeMseScorer>(train(pooled_instances(trainingBags), spec.architecture, c),
                                       std::move(training));
}

}  // namespace milstroud
