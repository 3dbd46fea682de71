#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "milstroud/autoencoder.hpp"
#include "milstroud/core_types.hpp"
#include "milstroud/lof.hpp"

namespace milstroud {

/// Maps every instance of a bag to a nonnegative strangeness value.
class StrangenessScorer {
 public:
  virtual ~StrangenessScorer() = default;

  /// One value per instance, in bag order.
  virtual std::vector<double> score_instances(const Bag& bag) const = 0;

  /// Scores a bag the scorer was fitted on. Scorers whose reference set holds
  /// the training instances leave each instance out of its own neighborhood.
  virtual std::vector<double> score_training_instances(const Bag& bag) const {
    return score_instances(bag);
  }

  /// Strangeness kind plus hyperparameters; two scorers with equal
  /// descriptors produce comparable scores.
  virtual nlohmann::json descriptor() const = 0;
};

/// LOF with neighbors drawn from the scored instance's own bag.
class BagLocalLofScorer final : public StrangenessScorer {
 public:
  explicit BagLocalLofScorer(std::size_t k);
  std::vector<double> score_instances(const Bag& bag) const override;
  nlohmann::json descriptor() const override;

 private:
  std::size_t k_;
};

/// LOF against the pooled training instances. Training instances scored
/// through score_reference_instances exclude themselves as neighbors.
class ReferenceLofScorer final : public StrangenessScorer {
 public:
  ReferenceLofScorer(std::vector<Instance> references, std::size_t k);
  std::vector<double> score_instances(const Bag& bag) const override;
  std::vector<double> score_training_instances(const Bag& bag) const override;
  nlohmann::json descriptor() const override;

  const LofModel& model() const { return model_; }

  /// LOF of every reference instance against the others.
  std::vector<double> score_reference_instances() const { return model_.score_all_references(); }

 private:
  LofModel model_;
  std::unordered_map<std::size_t, std::size_t> indexById_;
};

/// Autoencoder reconstruction error.
class AeMseScorer final : public StrangenessScorer {
 public:
  AeMseScorer(Autoencoder model, nlohmann::json trainingDescriptor);
  std::vector<double> score_instances(const Bag& bag) const override;
  nlohmann::json descriptor() const override;

  const Autoencoder& model() const { return model_; }

 private:
  Autoencoder model_;
  nlohmann::json trainingDescriptor_;
};

enum class StrangenessKind { Lof, Mse };

/// Everything needed to fit a scorer on training data.
struct ScorerSpec {
  StrangenessKind kind = StrangenessKind::Lof;
  LofConfig lof;
  AeArchitecture architecture;
  AeTrainingConfig training;

  static ScorerSpec make_lof(std::size_t k, LofScope scope = LofScope::BagLocal);
  static ScorerSpec make_mse(const AeArchitecture& arch, const AeTrainingConfig& cfg);
};

/// Fits a scorer on the training bags only. BagLocal LOF needs no fitting;
/// ReferenceGlobal LOF pools the training instances into its proximity
/// context; the autoencoder trains on the pooled training instances.
std::unique_ptr<StrangenessScorer> fit_scorer(const ScorerSpec& spec,
                                              const std::vector<Bag>& trainingBags);

}  // namespace milstroud
