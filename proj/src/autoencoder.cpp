#include "milstroud/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace milstroud {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double activate(Activation a, double v) {
  switch (a) {
    case Activation::Tanh: return std::tanh(v);
    case Activation::Relu: return v > 0.0 ? v : 0.0;
    case Activation::Linear: return v;
  }
  return v;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double pre, double post) {
  switch (a) {
    case Activation::Tanh: return 1.0 - post * post;
    case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::Linear: return 1.0;
  }
  return 1.0;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Linear: return "linear";
  }
  return "linear";
}

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "linear") return Activation::Linear;
  throw ConfigError("unknown activation '" + s + "'");
}

std::vector<DenseLayer> empty_layers(const AeArchitecture& arch) {
  arch.validate();
  const std::vector<std::size_t> widths = {arch.inputDim, arch.hidden1, arch.hidden2, arch.latent,
                                           arch.hidden2,  arch.hidden1, arch.inputDim};
  const Activation acts[] = {Activation::Tanh, Activation::Relu, Activation::Relu,
                             Activation::Relu, Activation::Tanh, Activation::Linear};
  std::vector<DenseLayer> layers(6);
  for (std::size_t l = 0; l < 6; ++l) {
    layers[l].in = widths[l];
    layers[l].out = widths[l + 1];
    layers[l].activation = acts[l];
    layers[l].weights.assign(widths[l] * widths[l + 1], 0.0);
    layers[l].bias.assign(widths[l + 1], 0.0);
  }
  return layers;
}

double dropout_rate(const AeArchitecture& arch, std::size_t layer) {
  if (layer == 0) return arch.dropout1;
  if (layer == 1) return arch.dropout2;
  return 0.0;
}

}  // namespace

void AeArchitecture::validate() const {
  if (!(inputDim > hidden1 && hidden1 > hidden2 && hidden2 > latent && latent >= 1)) {
    throw ConfigError("autoencoder widths must shrink strictly: " + std::to_string(inputDim) +
                      " -> " + std::to_string(hidden1) + " -> " + std::to_string(hidden2) +
                      " -> " + std::to_string(latent));
  }
  for (double p : {dropout1, dropout2}) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  }
}

std::vector<std::size_t> AeArchitecture::layer_widths() const {
  return {hidden1, hidden2, latent, hidden2, hidden1, inputDim};
}

AeArchitecture AeArchitecture::for_dataset(const std::string& name) {
  if (name == "cwru") return {400, 200, 50, 10};
  if (name == "hapt") return {561, 280, 35, 5};
  if (name == "virat") return {2048, 512, 128, 32};
  if (name == "bridge") return {200, 100, 25, 5};
  throw ConfigError("no reference architecture for dataset '" + name + "'");
}

Standardizer Standardizer::fit(const std::vector<Instance>& data) {
  if (data.empty()) throw DataError("cannot standardize an empty dataset");
  const std::size_t d = data.front().dim();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (const auto& inst : data) {
    if (inst.dim() != d) throw DataError("inconsistent instance dimensions");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += inst.features[j];
  }
  const double n = static_cast<double>(data.size());
  for (auto& m : s.mean) m /= n;
  for (const auto& inst : data) {
    for (std::size_t j = 0; j < d; ++j) {
      const double r = inst.features[j] - s.mean[j];
      s.scale[j] += r * r;
    }
  }
  for (auto& v : s.scale) {
    v = std::sqrt(v / n);
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

std::vector<double> Standardizer::invert(std::span<const double> z) const {
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] * scale[j] + mean[j];
  return out;
}

Autoencoder Autoencoder::zeros(const AeArchitecture& arch, Standardizer standardizer) {
  Autoencoder ae;
  ae.arch_ = arch;
  ae.layers_ = empty_layers(arch);
  ae.standardizer_ = std::move(standardizer);
  return ae;
}

Autoencoder Autoencoder::initialize(const AeArchitecture& arch, std::uint64_t seed,
                                    Standardizer standardizer) {
  Autoencoder ae = zeros(arch, std::move(standardizer));
  ae.seed_ = seed;
  std::mt19937_64 rng(seed);
  for (auto& layer : ae.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (auto& w : layer.weights) w = (2.0 * unit_uniform(rng) - 1.0) * bound;
  }
  return ae;
}

ForwardTrace Autoencoder::trace(std::span<const double> standardized, Mode mode,
                                std::mt19937_64* rng,
                                const std::vector<std::vector<double>>* fixedMasks) const {
  if (standardized.size() != arch_.inputDim) {
    throw DataError("autoencoder expects dimension " + std::to_string(arch_.inputDim) +
                    ", got " + std::to_string(standardized.size()));
  }
  ForwardTrace t;
  const std::size_t nl = layers_.size();
  t.inputs.resize(nl);
  t.preActivations.resize(nl);
  t.outputs.resize(nl);
  t.masks.resize(nl);
  std::vector<double> x(standardized.begin(), standardized.end());
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& layer = layers_[l];
    t.inputs[l] = x;
    std::vector<double> pre(layer.out);
    std::vector<double> post(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double acc = layer.bias[o];
      const double* w = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * x[i];
      pre[o] = acc;
      post[o] = activate(layer.activation, acc);
    }
    const double p = dropout_rate(arch_, l);
    if (mode == Mode::Train && (p > 0.0 || fixedMasks)) {
      std::vector<double> mask;
      if (fixedMasks) {
        mask = (*fixedMasks)[l];
      } else if (rng) {
        mask.resize(layer.out);
        for (auto& m : mask) m = unit_uniform(*rng) < p ? 0.0 : 1.0 / (1.0 - p);
      }
      if (!mask.empty()) {
        for (std::size_t o = 0; o < layer.out; ++o) post[o] *= mask[o];
      }
      t.masks[l] = std::move(mask);
    }
    t.preActivations[l] = std::move(pre);
    t.outputs[l] = post;
    x = std::move(post);
  }
  return t;
}

std::vector<double> Autoencoder::forward(const Instance& inst, Mode mode,
                                         std::mt19937_64* rng) const {
  if (inst.dim() != arch_.inputDim) {
    throw DataError("instance " + std::to_string(inst.id) + " has dimension " +
                    std::to_string(inst.dim()) + ", autoencoder expects " +
                    std::to_string(arch_.inputDim));
  }
  const auto t = trace(standardizer_.apply(inst.features), mode, rng);
  return standardizer_.invert(t.reconstruction());
}

double Autoencoder::loss_and_gradient(const std::vector<std::vector<double>>& batch,
                                      const std::vector<ForwardTrace>& traces,
                                      Gradients& grad) const {
  const std::size_t nl = layers_.size();
  grad.weights.resize(nl);
  grad.bias.resize(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    grad.weights[l].assign(layers_[l].weights.size(), 0.0);
    grad.bias[l].assign(layers_[l].bias.size(), 0.0);
  }
  const double scale = 2.0 / (static_cast<double>(batch.size()) * arch_.inputDim);
  double loss = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& t = traces[s];
    const auto& x = batch[s];
    const auto& z = t.reconstruction();
    loss += reconstruction_mse(x, z);
    // Gradient with respect to the post-dropout output of the current layer.
    std::vector<double> delta(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) delta[j] = scale * (z[j] - x[j]);
    for (std::size_t l = nl; l-- > 0;) {
      const auto& layer = layers_[l];
      const auto& mask = t.masks[l];
      std::vector<double> dpre(layer.out);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double m = mask.empty() ? 1.0 : mask[o];
        const double post = activate(layer.activation, t.preActivations[l][o]);
        dpre[o] = delta[o] * m * activate_grad(layer.activation, t.preActivations[l][o], post);
      }
      const auto& in = t.inputs[l];
      std::vector<double> dIn(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        grad.bias[l][o] += dpre[o];
        double* gw = &grad.weights[l][o * layer.in];
        const double* w = &layer.weights[o * layer.in];
        for (std::size_t i = 0; i < layer.in; ++i) {
          gw[i] += dpre[o] * in[i];
          dIn[i] += dpre[o] * w[i];
        }
      }
      delta = std::move(dIn);
    }
  }
  return loss / static_cast<double>(batch.size());
}

double Autoencoder::eval_loss(const std::vector<std::vector<double>>& standardized) const {
  if (standardized.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& x : standardized) {
    sum += reconstruction_mse(x, trace(x, Mode::Eval, nullptr).reconstruction());
  }
  return sum / static_cast<double>(standardized.size());
}

nlohmann::json Autoencoder::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", activation_name(l.activation)},
                      {"weights", l.weights},
                      {"bias", l.bias}});
  }
  return {{"architecture",
           {{"inputDim", arch_.inputDim},
            {"hidden1", arch_.hidden1},
            {"hidden2", arch_.hidden2},
            {"latent", arch_.latent},
            {"dropout1", arch_.dropout1},
            {"dropout2", arch_.dropout2}}},
          {"seed", seed_},
          {"layers", layers},
          {"standardization", {{"mean", standardizer_.mean}, {"scale", standardizer_.scale}}},
          {"trainingLoss", trainingLoss_},
          {"validationLoss", validationLoss_},
          {"selectedEpoch", selectedEpoch_}};
}

Autoencoder Autoencoder::from_json(const nlohmann::json& j) {
  try {
    const auto& a = j.at("architecture");
    AeArchitecture arch{a.at("inputDim").get<std::size_t>(), a.at("hidden1").get<std::size_t>(),
                        a.at("hidden2").get<std::size_t>(),  a.at("latent").get<std::size_t>(),
                        a.at("dropout1").get<double>(),      a.at("dropout2").get<double>()};
    Standardizer st{j.at("standardization").at("mean").get<std::vector<double>>(),
                    j.at("standardization").at("scale").get<std::vector<double>>()};
    if (st.mean.size() != arch.inputDim || st.scale.size() != arch.inputDim) {
      throw DataError("standardization statistics do not match inputDim");
    }
    Autoencoder ae = zeros(arch, std::move(st));
    ae.seed_ = j.at("seed").get<std::uint64_t>();
    const auto& layers = j.at("layers");
    if (layers.size() != ae.layers_.size()) throw DataError("autoencoder JSON must hold 6 layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& dst = ae.layers_[l];
      const auto& src = layers[l];
      if (src.at("in").get<std::size_t>() != dst.in || src.at("out").get<std::size_t>() != dst.out ||
          parse_activation(src.at("activation").get<std::string>()) != dst.activation) {
        throw DataError("layer " + std::to_string(l) + " does not match the architecture");
      }
      dst.weights = src.at("weights").get<std::vector<double>>();
      dst.bias = src.at("bias").get<std::vector<double>>();
      if (dst.weights.size() != dst.in * dst.out || dst.bias.size() != dst.out) {
        throw DataError("layer " + std::to_string(l) + " has wrong parameter count");
      }
    }
    ae.trainingLoss_ = j.value("trainingLoss", std::vector<double>{});
    ae.validationLoss_ = j.value("validationLoss", std::vector<double>{});
    ae.selectedEpoch_ = j.value("selectedEpoch", std::size_t{0});
    return ae;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed autoencoder JSON: ") + e.what());
  }
}

Autoencoder train(const std::vector<Instance>& data, const AeArchitecture& arch,
                  const AeTrainingConfig& cfg) {
  arch.validate();
  if (data.empty()) throw DataError("autoencoder training data is empty");
  if (cfg.loss != "mse") throw ConfigError("unsupported loss '" + cfg.loss + "'");
  if (cfg.batchSize == 0) throw ConfigError("batchSize must be positive");
  if (!(cfg.learningRate > 0.0)) throw ConfigError("learningRate must be positive");
  if (!(cfg.validationFraction >= 0.0 && cfg.validationFraction < 1.0)) {
    throw ConfigError("validationFraction must lie in [0, 1)");
  }
  for (const auto& inst : data) {
    if (inst.dim() != arch.inputDim) {
      throw DataError("training instance " + std::to_string(inst.id) + " has dimension " +
                      std::to_string(inst.dim()) + ", expected " + std::to_string(arch.inputDim));
    }
  }

  Autoencoder model = Autoencoder::initialize(arch, cfg.seed, Standardizer::fit(data));
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto nVal = static_cast<std::size_t>(std::floor(cfg.validationFraction * data.size()));
  std::vector<std::vector<double>> trainSet;
  std::vector<std::vector<double>> valSet;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto x = model.standardizer_.apply(data[order[i]].features);
    (i < nVal ? valSet : trainSet).push_back(std::move(x));
  }
  // Too few samples to hold any out: validate on the training split.
  if (valSet.empty()) valSet = trainSet;

  double bestVal = model.eval_loss(valSet);
  if (!std::isfinite(bestVal)) throw TrainingError("non-finite initial validation loss");
  std::vector<DenseLayer> bestLayers = model.layers_;

  std::vector<std::size_t> idx(trainSet.size());
  std::iota(idx.begin(), idx.end(), 0);
  Gradients grad;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t start = 0; start < idx.size(); start += cfg.batchSize) {
      const std::size_t end = std::min(idx.size(), start + cfg.batchSize);
      std::vector<std::vector<double>> batch;
      std::vector<ForwardTrace> traces;
      for (std::size_t b = start; b < end; ++b) {
        batch.push_back(trainSet[idx[b]]);
        traces.push_back(model.trace(batch.back(), Mode::Train, &rng));
      }
      model.loss_and_gradient(batch, traces, grad);
      for (std::size_t l = 0; l < model.layers_.size(); ++l) {
        auto& layer = model.layers_[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          layer.weights[i] -= cfg.learningRate * grad.weights[l][i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
          layer.bias[i] -= cfg.learningRate * grad.bias[l][i];
        }
      }
    }
    const double trainLoss = model.eval_loss(trainSet);
    const double valLoss = model.eval_loss(valSet);
    if (!std::isfinite(trainLoss) || !std::isfinite(valLoss)) {
      throw TrainingError("autoencoder loss diverged at epoch " + std::to_string(epoch));
    }
    model.trainingLoss_.push_back(trainLoss);
    model.validationLoss_.push_back(valLoss);
    if (valLoss < bestVal) {
      bestVal = valLoss;
      bestLayers = model.layers_;
      model.selectedEpoch_ = epoch;
    }
  }
  model.layers_ = std::move(bestLayers);
  return model;
}

double reconstruction_mse(std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size() || x.empty()) {
    throw DataError("reconstruction of dimension " + std::to_string(z.size()) +
                    " for input of dimension " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - z[j];
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

Strangeness mse_strangeness(const Autoencoder& model, const Instance& inst) {
  if (inst.dim() != model.architecture().inputDim) {
    throw DataError("instance " + std::to_string(inst.id) + " has dimension " +
                    std::to_string(inst.dim()) + ", autoencoder expects " +
                    std::to_string(model.architecture().inputDim));
  }
  const auto x = model.standardizer().apply(inst.features);
  const auto t = model.trace(x, Mode::Eval, nullptr);
  return Strangeness(reconstruction_mse(x, t.reconstruction()));
}

}  // namespace milstroud
