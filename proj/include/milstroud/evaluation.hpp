#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "milstroud/verdict.hpp"

namespace milstroud {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

/// Rates at one confidence level of the sweep.
struct LevelRates {
  double confidence = 0.0;
  double tau = 1.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<LevelRates> levels;
  // Sorted by (fpr, tpr), deduplicated, anchored at (0,0) and (1,1).
  std::vector<RocPoint> points;
  // Unset when the truths hold a single class.
  std::optional<double> auc;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Builds the ROC from each verdict's per-level predictions and integrates it
/// with the trapezoidal rule. Verdicts without a truth label are skipped.
RocCurve roc_from_verdicts(const std::vector<BagVerdict>& verdicts,
                           const std::vector<double>& levels);

/// Trapezoidal area under points that are already sorted by (fpr, tpr).
double trapezoid_area(const std::vector<RocPoint>& sorted);

/// Writes the sweep as CSV: confidence,tau,fpr,tpr.
void write_roc_csv(std::ostream& out, const RocCurve& roc);

}  // namespace milstroud
