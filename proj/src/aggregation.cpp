#include "milstroud/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "milstroud/core_types.hpp"

namespace milstroud {

std::string_view to_string(AggregateFunction f) {
  switch (f) {
    case AggregateFunction::Max: return "max";
    case AggregateFunction::Min: return "min";
    case AggregateFunction::Mean: return "mean";
    case AggregateFunction::Median: return "median";
    case AggregateFunction::Dspread: return "dspread";
    case AggregateFunction::Spread: return "spread";
  }
  return "?";
}

AggregateFunction parse_aggregate(std::string_view name) {
  for (auto f : kAllAggregates) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown aggregate function '" + std::string(name) +
                    "' (expected max|min|mean|median|dspread|spread)");
}

namespace {

// Sum in sorted order so the result does not depend on input order.
double sorted_mean(const std::vector<double>& sorted) {
  double sum = 0.0;
  for (double v : sorted) sum += v;
  // Rounding can push the quotient just outside [min, max].
  return std::clamp(sum / static_cast<double>(sorted.size()), sorted.front(), sorted.back());
}

double population_stdev(const std::vector<double>& sorted, double mean) {
  std::vector<double> sq(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double d = sorted[i] - mean;
    sq[i] = d * d;
  }
  std::sort(sq.begin(), sq.end());
  double sum = 0.0;
  for (double v : sq) sum += v;
  return std::sqrt(sum / static_cast<double>(sorted.size()));
}

}  // namespace

double aggregate(std::span<const double> scores, AggregateFunction f) {
  if (scores.empty()) throw std::invalid_argument("aggregate of an empty score vector");
  std::vector<double> s(scores.begin(), scores.end());
  for (double v : s) {
    if (!std::isfinite(v)) throw std::invalid_argument("aggregate of a non-finite score");
  }
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  switch (f) {
    case AggregateFunction::Max: return s.back();
    case AggregateFunction::Min: return s.front();
    case AggregateFunction::Mean: return sorted_mean(s);
    case AggregateFunction::Median:
      return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    case AggregateFunction::Dspread: {
      const double m = sorted_mean(s);
      return m + 2.0 * population_stdev(s, m);
    }
    case AggregateFunction::Spread: {
      const double m = sorted_mean(s);
      return m * population_stdev(s, m);
    }
  }
  throw std::invalid_argument("unknown aggregate function");
}

}  // namespace milstroud
