#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace milstroud {

/// Thrown when hyperparameters or configuration cannot be applied to the data
/// (infeasible k, mismatched baseline descriptor, bad config values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for malformed or insufficient input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Autoencoder training diverged.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs f, prefixing the message of any library error it throws with
/// `context` while keeping the exception type.
template <typename F>
decltype(auto) with_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const TrainingError& e) {
    throw TrainingError(context + ": " + e.what());
  }
}

enum class Label { Normal, Anomalous };

const char* to_string(Label label);

/// One feature vector: a signal window or a featurized frame.
struct Instance {
  std::size_t id = 0;
  std::vector<double> features;

  std::size_t dim() const { return features.size(); }
};

/// Ordered instances sharing one label. A bag is Anomalous iff it holds at
/// least one anomalous instance; instance labels themselves are optional.
struct Bag {
  std::size_t id = 0;
  std::vector<Instance> instances;
  std::optional<Label> label;
  // Per-instance ground truth when known (same length as instances).
  std::vector<std::optional<Label>> instanceLabels;

  std::size_t size() const { return instances.size(); }
};

/// Nonnegative finite strangeness of an instance or bag.
class Strangeness {
 public:
  explicit Strangeness(double value);
  double value() const { return value_; }

 private:
  double value_;
};

struct Dataset {
  std::vector<Bag> trainingBags;
  std::vector<Bag> testBags;
  std::size_t featureDim = 0;
};

/// Bag label implied by instance labels: Anomalous iff any instance is.
/// Returns nullopt when no instance label is known.
std::optional<Label> label_from_instances(const std::vector<std::optional<Label>>& labels);

/// Checks every dataset invariant and returns one message per violation.
/// An empty result means the dataset is well-formed.
std::vector<std::string> validate_dataset(const Dataset& d);

/// Flattens the instances of a set of bags in bag order.
std::vector<Instance> pooled_instances(const std::vector<Bag>& bags);

}  // namespace milstroud
