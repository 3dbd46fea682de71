#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "milstroud/autoencoder.hpp"

namespace gradcheck {

using Batch = std::vector<std::vector<double>>;
using Masks = std::vector<std::vector<std::vector<double>>>;

// Batch loss under the model's current parameters, replaying the masks in
// train mode.
inline double batch_loss(const milstroud::Autoencoder& ae, const Batch& batch, milstroud::Mode mode,
                         const Masks& masks) {
  double sum = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto t = ae.trace(batch[s], mode, nullptr, mode == milstroud::Mode::Train ? &masks[s] : nullptr);
    sum += milstroud::reconstruction_mse(batch[s], t.reconstruction());
  }
  return sum / static_cast<double>(batch.size());
}

// Central differences are meaningless across a ReLU kink.
inline bool near_relu_kink(const milstroud::Autoencoder& ae, const Batch& batch, milstroud::Mode mode,
                           const Masks& masks) {
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto t = ae.trace(batch[s], mode, nullptr, mode == milstroud::Mode::Train ? &masks[s] : nullptr);
    for (std::size_t l = 0; l < ae.layers().size(); ++l) {
      if (ae.layers()[l].activation != milstroud::Activation::Relu) continue;
      for (double v : t.preActivations[l]) {
        if (std::abs(v) < 1e-3) return true;
      }
    }
  }
  return false;
}

struct Result {
  double maxRelativeError = 0.0;
  double lossMismatch = 0.0;
};

inline constexpr double kStep = 1e-5;
// Gradients smaller than this are compared on an absolute scale.
inline constexpr double kScaleFloor = 1e-4;

// Compares every analytic partial derivative with a central difference.
// Returns nothing when the draw lands near a ReLU kink.
inline std::optional<Result> check_draw(milstroud::Autoencoder& ae, const Batch& batch, milstroud::Mode mode,
                                        std::mt19937_64& rng) {
  Masks masks(batch.size());
  std::vector<milstroud::ForwardTrace> traces;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    traces.push_back(ae.trace(batch[s], mode, &rng));
    masks[s] = traces.back().masks;
  }
  if (near_relu_kink(ae, batch, mode, masks)) return std::nullopt;

  milstroud::Gradients grad;
  const double loss = ae.loss_and_gradient(batch, traces, grad);
  Result r;
  r.lossMismatch = std::abs(loss - batch_loss(ae, batch, mode, masks));
  const auto compare = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + kStep;
    const double up = batch_loss(ae, batch, mode, masks);
    param = saved - kStep;
    const double down = batch_loss(ae, batch, mode, masks);
    param = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), kScaleFloor});
    r.maxRelativeError = std::max(r.maxRelativeError, std::abs(analytic - numeric) / scale);
  };
  for (std::size_t l = 0; l < ae.layers().size(); ++l) {
    for (std::size_t i = 0; i < ae.layers()[l].weights.size(); ++i) {
      compare(ae.layers()[l].weights[i], grad.weights[l][i]);
    }
    for (std::size_t i = 0; i < ae.layers()[l].bias.size(); ++i) {
      compare(ae.layers()[l].bias[i], grad.bias[l][i]);
    }
  }
  return r;
}

// Random 4->3->2->1 network, random biases and a batch of three inputs;
// even draws run in eval mode, odd draws with fixed dropout masks.
inline std::vector<Result> run(std::size_t draws, std::uint64_t seed) {
  const milstroud::AeArchitecture arch{4, 3, 2, 1, 0.25, 0.25};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Result> out;
  for (std::uint64_t draw = 0; out.size() < draws && draw < 50 * draws; ++draw) {
    auto ae = milstroud::Autoencoder::initialize(arch, seed + draw, milstroud::Standardizer::identity(4));
    for (auto& layer : ae.layers()) {
      for (auto& b : layer.bias) b = 0.3 * g(rng);
    }
    Batch batch(3, std::vector<double>(4));
    for (auto& x : batch) {
      for (auto& v : x) v = g(rng);
    }
    const auto mode = draw % 2 == 0 ? milstroud::Mode::Eval : milstroud::Mode::Train;
    if (auto r = check_draw(ae, batch, mode, rng)) out.push_back(*r);
  }
  return out;
}

}  // namespace gradcheck
