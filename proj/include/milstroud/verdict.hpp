#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "milstroud/core_types.hpp"

namespace milstroud {

/// Slack for comparing a p-value against 1 - c. Far below both the p-value
/// resolution 1/(n+1) and the confidence grid step.
inline constexpr double kThresholdSlack = 1e-9;

/// Confidence levels {0, step, 2*step, ..., 1}; level i is computed as i/N so
/// that grid points are correctly rounded.
std::vector<double> confidence_grid(double step = 0.001);

/// Anomalous iff pValue <= 1 - confidence.
bool predicts_anomalous(double pValue, double confidence);

/// Outcome of testing one query bag against a baseline.
struct BagVerdict {
  std::size_t bagId = 0;
  double score = 0.0;
  double pValue = 1.0;
  std::optional<Label> truth;
  // One entry per confidence level, true = Anomalous.
  std::vector<bool> anomalous;
};

std::vector<bool> predictions_for(double pValue, const std::vector<double>& levels);

}  // namespace milstroud
