#include "milstroud/core_types.hpp"

#include <cmath>

namespace milstroud {

const char* to_string(Label label) {
  return label == Label::Anomalous ? "anomalous" : "normal";
}

Strangeness::Strangeness(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::domain_error("strangeness must be finite and nonnegative, got " +
                            std::to_string(value));
  }
}

std::optional<Label> label_from_instances(const std::vector<std::optional<Label>>& labels) {
  std::optional<Label> result;
  for (const auto& l : labels) {
    if (!l) continue;
    if (*l == Label::Anomalous) return Label::Anomalous;
    result = Label::Normal;
  }
  return result;
}

namespace {

void check_bag(const Bag& bag, const char* split, std::size_t featureDim,
               std::vector<std::string>& out) {
  const std::string where = std::string(split) + " bag " + std::to_string(bag.id);
  if (bag.instances.size() < 2) {
    out.push_back(where + ": has " + std::to_string(bag.instances.size()) +
                  " instances, need at least 2");
  }
  if (!bag.instanceLabels.empty() && bag.instanceLabels.size() != bag.instances.size()) {
    out.push_back(where + ": instance label count does not match instance count");
  }
  for (const auto& inst : bag.instances) {
    const std::string iwhere = where + " instance " + std::to_string(inst.id);
    if (inst.features.empty()) {
      out.push_back(iwhere + ": empty feature vector");
      continue;
    }
    if (inst.features.size() != featureDim) {
      out.push_back(iwhere + ": dimension " + std::to_string(inst.features.size()) +
                    " != featureDim " + std::to_string(featureDim));
    }
    for (double v : inst.features) {
      if (!std::isfinite(v)) {
        out.push_back(iwhere + ": non-finite feature");
        break;
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate_dataset(const Dataset& d) {
  std::vector<std::string> out;
  if (d.featureDim == 0) out.emplace_back("featureDim must be positive");
  if (d.trainingBags.empty()) out.emplace_back("no training bags");
  for (const auto& bag : d.trainingBags) {
    check_bag(bag, "training", d.featureDim, out);
    if (bag.label != Label::Normal) {
      out.push_back("training bag " + std::to_string(bag.id) + ": training bag not Normal");
    }
  }
  for (const auto& bag : d.testBags) {
    check_bag(bag, "test", d.featureDim, out);
  }
  return out;
}

std::vector<Instance> pooled_instances(const std::vector<Bag>& bags) {
  std::vector<Instance> out;
  for (const auto& bag : bags) {
    out.insert(out.end(), bag.instances.begin(), bag.instances.end());
  }
  return out;
}

}  // namespace milstroud
