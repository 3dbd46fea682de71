#include "milstroud/evaluation.hpp"

#include <algorithm>
#include <stdexcept>

#include "milstroud/text_format.hpp"

namespace milstroud {

double trapezoid_area(const std::vector<RocPoint>& sorted) {
  double area = 0.0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    area += (sorted[i].fpr - sorted[i - 1].fpr) * (sorted[i].tpr + sorted[i - 1].tpr) * 0.5;
  }
  return area;
}

RocCurve roc_from_verdicts(const std::vector<BagVerdict>& verdicts,
                           const std::vector<double>& levels) {
  RocCurve roc;
  std::vector<std::size_t> tp(levels.size(), 0);
  std::vector<std::size_t> fp(levels.size(), 0);
  for (const auto& v : verdicts) {
    if (!v.truth) continue;
    if (v.anomalous.size() != levels.size()) {
      throw std::invalid_argument("verdict for bag " + std::to_string(v.bagId) + " holds " +
                                  std::to_string(v.anomalous.size()) + " predictions for " +
                                  std::to_string(levels.size()) + " levels");
    }
    const bool positive = *v.truth == Label::Anomalous;
    (positive ? roc.positives : roc.negatives) += 1;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!v.anomalous[i]) continue;
      (positive ? tp : fp)[i] += 1;
    }
  }
  const auto rate = [](std::size_t hits, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
  };
  roc.levels.reserve(levels.size());
  roc.points = {{0.0, 0.0}, {1.0, 1.0}};
  for (std::size_t i = 0; i < levels.size(); ++i) {
    LevelRates r{levels[i], 1.0 - levels[i], rate(fp[i], roc.negatives), rate(tp[i], roc.positives)};
    roc.levels.push_back(r);
    roc.points.push_back({r.fpr, r.tpr});
  }
  std::sort(roc.points.begin(), roc.points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  roc.points.erase(std::unique(roc.points.begin(), roc.points.end()), roc.points.end());
  if (roc.positives > 0 && roc.negatives > 0) roc.auc = trapezoid_area(roc.points);
  return roc;
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "confidence,tau,fpr,tpr\n";
  for (const auto& r : roc.levels) {
    out << format_double(r.confidence) << ',' << format_double(r.tau) << ','
        << format_double(r.fpr) << ',' << format_double(r.tpr) << '\n';
  }
}

}  // namespace milstroud
