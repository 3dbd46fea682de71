#include "milstroud/verdict.hpp"

#include <cmath>
#include <stdexcept>

namespace milstroud {

std::vector<double> confidence_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError("confidence step must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  if (std::abs(static_cast<double>(n) * step - 1.0) > 1e-9) {
    throw ConfigError("confidence step must divide 1 evenly");
  }
  std::vector<double> levels(n + 1);
  for (std::size_t i = 0; i <= n; ++i) levels[i] = static_cast<double>(i) / static_cast<double>(n);
  return levels;
}

bool predicts_anomalous(double pValue, double confidence) {
  return pValue <= (1.0 - confidence) + kThresholdSlack;
}

std::vector<bool> predictions_for(double pValue, const std::vector<double>& levels) {
  std::vector<bool> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) out[i] = predicts_anomalous(pValue, levels[i]);
  return out;
}

}  // namespace milstroud
