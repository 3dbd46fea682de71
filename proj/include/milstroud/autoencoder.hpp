#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "milstroud/core_types.hpp"

namespace milstroud {

enum class Activation { Linear, Tanh, Relu };
enum class Mode { Train, Eval };

/// Encoder x -> L1 -> L2 -> y with tanh, relu, relu; the decoder mirrors it
/// (y -> L2 relu, L2 -> L1 tanh, L1 -> x linear). Dropout follows the first
/// two encoder hidden layers.
struct AeArchitecture {
  std::size_t inputDim = 0;
  std::size_t hidden1 = 0;
  std::size_t hidden2 = 0;
  std::size_t latent = 0;
  double dropout1 = 0.2;
  double dropout2 = 0.2;

  /// Throws ConfigError unless inputDim > hidden1 > hidden2 > latent >= 1 and
  /// both dropout rates lie in [0, 1).
  void validate() const;

  /// Output widths of the six dense layers: [L1, L2, y, L2, L1, x].
  std::vector<std::size_t> layer_widths() const;

  /// Reference architectures for the four benchmark datasets
  /// (cwru, hapt, virat, bridge).
  static AeArchitecture for_dataset(const std::string& name);
};

struct AeTrainingConfig {
  std::size_t epochs = 100;
  std::size_t batchSize = 32;
  double learningRate = 0.05;
  double validationFraction = 0.2;
  std::string loss = "mse";
  std::uint64_t seed = 0;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::Linear;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
};

/// Per-feature z-scoring with statistics from training data. Constant
/// features keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const std::vector<Instance>& data);
  static Standardizer identity(std::size_t dim);
  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> invert(std::span<const double> z) const;
};

/// Activations recorded by one forward pass: inputs[l] feeds layer l,
/// outputs[l] is its post-activation (after dropout where applied),
/// masks[l] is the scaled dropout mask (empty when not applied).
struct ForwardTrace {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> preActivations;
  std::vector<std::vector<double>> outputs;
  std::vector<std::vector<double>> masks;

  const std::vector<double>& reconstruction() const { return outputs.back(); }
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

class Autoencoder {
 public:
  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static Autoencoder initialize(const AeArchitecture& arch, std::uint64_t seed,
                                Standardizer standardizer);
  /// All parameters zero.
  static Autoencoder zeros(const AeArchitecture& arch, Standardizer standardizer);

  const AeArchitecture& architecture() const { return arch_; }
  const Standardizer& standardizer() const { return standardizer_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<double>& training_loss() const { return trainingLoss_; }
  const std::vector<double>& validation_loss() const { return validationLoss_; }
  /// Epoch whose parameters were kept; 0 means the initialization.
  std::size_t selected_epoch() const { return selectedEpoch_; }

  /// Forward pass in standardized space. In Train mode dropout masks are
  /// drawn from rng, unless fixedMasks is given (used for gradient checks).
  ForwardTrace trace(std::span<const double> standardized, Mode mode, std::mt19937_64* rng,
                     const std::vector<std::vector<double>>* fixedMasks = nullptr) const;

  /// Reconstruction of a raw instance, returned in raw feature units.
  std::vector<double> forward(const Instance& inst, Mode mode = Mode::Eval,
                              std::mt19937_64* rng = nullptr) const;

  /// Mean squared reconstruction loss over a standardized batch and its
  /// gradient with respect to every parameter, backpropagated through `traces`.
  double loss_and_gradient(const std::vector<std::vector<double>>& batch,
                           const std::vector<ForwardTrace>& traces, Gradients& grad) const;

  /// Mean eval-mode loss over standardized samples.
  double eval_loss(const std::vector<std::vector<double>>& standardized) const;

  nlohmann::json to_json() const;
  static Autoencoder from_json(const nlohmann::json& j);

 private:
  friend Autoencoder train(const std::vector<Instance>&, const AeArchitecture&,
                           const AeTrainingConfig&);

  AeArchitecture arch_;
  Standardizer standardizer_;
  std::vector<DenseLayer> layers_;
  std::uint64_t seed_ = 0;
  std::vector<double> trainingLoss_;
  std::vector<double> validationLoss_;
  std::size_t selectedEpoch_ = 0;
};

/// Mini-batch gradient descent on normal instances with an 80-20 style
/// train/validation split. The parameters of the epoch with the lowest
/// validation loss (the initialization included) are kept.
/// Throws TrainingError naming the epoch if the loss stops being finite.
Autoencoder train(const std::vector<Instance>& data, const AeArchitecture& arch,
                  const AeTrainingConfig& cfg);

/// mean_j (x_j - z_j)^2
double reconstruction_mse(std::span<const double> x, std::span<const double> z);

/// Eval-mode reconstruction error of inst, measured in standardized units.
Strangeness mse_strangeness(const Autoencoder& model, const Instance& inst);

}  // namespace milstroud
