#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "milstroud/evaluation.hpp"
#include "oracles.hpp"

using namespace milstroud;

namespace {

std::vector<BagVerdict> verdicts_for(const std::vector<double>& pValues, const std::vector<Label>& truths,
                                     const std::vector<double>& levels) {
  std::vector<BagVerdict> out;
  for (std::size_t i = 0; i < pValues.size(); ++i) {
    BagVerdict v;
    v.bagId = i;
    v.pValue = pValues[i];
    v.truth = truths[i];
    v.anomalous = predictions_for(pValues[i], levels);
    out.push_back(std::move(v));
  }
  return out;
}

// Baseline-of-size-n p-values (j / (n + 1)), so every value sits on the
// confidence grid's resolution.
double random_p(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> d(1, n + 1);
  return static_cast<double>(d(rng)) / static_cast<double>(n + 1);
}

}  // namespace

TEST_CASE("confidence grid") {
  const auto g = confidence_grid();
  REQUIRE(g.size() == 1001);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(g[500] == 0.5);
  CHECK(g[400] == 0.4);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(confidence_grid(0.25) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK_THROWS_AS(confidence_grid(0.0), ConfigError);
  CHECK_THROWS_AS(confidence_grid(0.3), ConfigError);
}

TEST_CASE("perfect separation") {
  const auto levels = confidence_grid();
  const auto v = verdicts_for({0.02, 0.05, 0.1, 0.6, 0.8, 1.0},
                              {Label::Anomalous, Label::Anomalous, Label::Anomalous, Label::Normal,
                               Label::Normal, Label::Normal},
                              levels);
  const auto roc = roc_from_verdicts(v, levels);
  REQUIRE(roc.auc.has_value());
  CHECK(*roc.auc == 1.0);
  CHECK(roc.positives == 3);
  CHECK(roc.negatives == 3);
  CHECK(roc.points.front() == RocPoint{0.0, 0.0});
  CHECK(roc.points.back() == RocPoint{1.0, 1.0});
}

TEST_CASE("reversed ranking and single class") {
  const auto levels = confidence_grid();
  const auto reversed = roc_from_verdicts(
      verdicts_for({0.9, 0.1}, {Label::Anomalous, Label::Normal}, levels), levels);
  CHECK(*reversed.auc == 0.0);
  const auto single = roc_from_verdicts(verdicts_for({0.9, 0.1}, {Label::Normal, Label::Normal}, levels), levels);
  CHECK_FALSE(single.auc.has_value());
  CHECK(single.positives == 0);
}

TEST_CASE("unlabeled verdicts are skipped") {
  const auto levels = confidence_grid(0.01);
  auto v = verdicts_for({0.1, 0.9}, {Label::Anomalous, Label::Normal}, levels);
  BagVerdict unknown;
  unknown.pValue = 0.5;
  unknown.anomalous = predictions_for(0.5, levels);
  v.push_back(unknown);
  const auto roc = roc_from_verdicts(v, levels);
  CHECK(roc.positives + roc.negatives == 2);
  CHECK(*roc.auc == 1.0);
}

TEST_CASE("random labels give AUC near one half") {
  std::mt19937_64 rng(4);
  const auto levels = confidence_grid();
  std::vector<double> p;
  std::vector<Label> t;
  for (int i = 0; i < 1000; ++i) {
    p.push_back(random_p(rng, 999));
    t.push_back(i % 2 == 0 ? Label::Anomalous : Label::Normal);
  }
  std::shuffle(t.begin(), t.end(), rng);
  const auto roc = roc_from_verdicts(verdicts_for(p, t, levels), levels);
  CHECK(std::abs(*roc.auc - 0.5) <= 0.05);
}

TEST_CASE("trapezoid AUC equals the Mann-Whitney statistic") {
  std::mt19937_64 rng(8);
  const auto levels = confidence_grid();
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t baselineSize = 5 + static_cast<std::size_t>(trial) * 9;
    std::vector<double> p;
    std::vector<Label> t;
    std::vector<double> pos;
    std::vector<double> neg;
    const std::size_t n = 10 + static_cast<std::size_t>(trial);
    for (std::size_t i = 0; i < n; ++i) {
      const bool anomalous = i % 3 == 0;
      // Positives lean toward small p-values.
      double pv = random_p(rng, baselineSize);
      if (anomalous) pv = std::min(pv, random_p(rng, baselineSize));
      p.push_back(pv);
      t.push_back(anomalous ? Label::Anomalous : Label::Normal);
      (anomalous ? pos : neg).push_back(pv);
    }
    const auto roc = roc_from_verdicts(verdicts_for(p, t, levels), levels);
    CHECK(std::abs(*roc.auc - oracle::mann_whitney_by_pvalue(pos, neg)) <= 1.0 / (2.0 * 1001.0));
  }
}

TEST_CASE("AUC is invariant to increasing transforms of p-values") {
  std::mt19937_64 rng(15);
  const auto levels = confidence_grid();
  std::vector<double> p;
  std::vector<double> q;
  std::vector<Label> t;
  for (int i = 0; i < 60; ++i) {
    const double pv = random_p(rng, 30);
    p.push_back(pv);
    // sqrt keeps every value on a distinct grid step for this baseline size.
    q.push_back(std::sqrt(pv));
    t.push_back(i % 2 == 0 ? Label::Anomalous : Label::Normal);
  }
  std::vector<double> pos, neg, qpos, qneg;
  for (std::size_t i = 0; i < p.size(); ++i) {
    (t[i] == Label::Anomalous ? pos : neg).push_back(p[i]);
    (t[i] == Label::Anomalous ? qpos : qneg).push_back(q[i]);
  }
  CHECK(oracle::mann_whitney_by_pvalue(pos, neg) == oracle::mann_whitney_by_pvalue(qpos, qneg));
  const auto a = roc_from_verdicts(verdicts_for(p, t, levels), levels);
  const auto b = roc_from_verdicts(verdicts_for(q, t, levels), levels);
  CHECK(std::abs(*a.auc - *b.auc) <= 1.0 / 1001.0);
}

TEST_CASE("ROC points are monotone and anchored") {
  std::mt19937_64 rng(23);
  const auto levels = confidence_grid(0.01);
  std::vector<double> p;
  std::vector<Label> t;
  for (int i = 0; i < 40; ++i) {
    p.push_back(random_p(rng, 20));
    t.push_back(i % 4 == 0 ? Label::Anomalous : Label::Normal);
  }
  const auto roc = roc_from_verdicts(verdicts_for(p, t, levels), levels);
  CHECK(roc.levels.size() == levels.size());
  for (std::size_t i = 0; i < roc.levels.size(); ++i) {
    CHECK(roc.levels[i].tau == doctest::Approx(1.0 - levels[i]));
    if (i > 0) {
      CHECK(roc.levels[i].fpr <= roc.levels[i - 1].fpr);
      CHECK(roc.levels[i].tpr <= roc.levels[i - 1].tpr);
    }
  }
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    CHECK(roc.points[i - 1].fpr <= roc.points[i].fpr);
    CHECK(roc.points[i - 1].tpr <= roc.points[i].tpr);
  }
  CHECK(*roc.auc == trapezoid_area(roc.points));
}

TEST_CASE("trapezoid area") {
  CHECK(trapezoid_area({{0, 0}, {1, 1}}) == 0.5);
  CHECK(trapezoid_area({{0, 0}, {0, 1}, {1, 1}}) == 1.0);
  CHECK(trapezoid_area({{0, 0}, {0.5, 0.5}, {0.5, 1}, {1, 1}}) == 0.625);
}

TEST_CASE("ROC CSV") {
  const std::vector<double> levels = {0.0, 0.5, 1.0};
  const auto roc = roc_from_verdicts(verdicts_for({0.25, 0.75}, {Label::Anomalous, Label::Normal}, levels), levels);
  std::ostringstream out;
  write_roc_csv(out, roc);
  CHECK(out.str() == "confidence,tau,fpr,tpr\n0,1,1,1\n0.5,0.5,0,1\n1,0,0,0\n");
}
