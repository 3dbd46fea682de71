#include "milstroud/lof.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace milstroud {

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DataError("distance between vectors of dimension " + std::to_string(a.size()) +
                    " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

ProximityContext::ProximityContext(std::vector<Instance> references)
    : references_(std::move(references)) {
  const std::size_t n = references_.size();
  dist_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(references_[i].features, references_[j].features);
      dist_[i * n + j] = d;
      dist_[j * n + i] = d;
    }
  }
}

std::vector<double> ProximityContext::distances_from(const QueryPoint& q) const {
  const std::size_t n = references_.size();
  if (q.referenceIndex) {
    const std::size_t r = *q.referenceIndex;
    return {dist_.begin() + static_cast<std::ptrdiff_t>(r * n),
            dist_.begin() + static_cast<std::ptrdiff_t>((r + 1) * n)};
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = euclidean_distance(q.features, references_[i].features);
  }
  return out;
}

void require_neighbors(const ProximityContext& ctx, const QueryPoint& q, std::size_t k) {
  if (k == 0) throw ConfigError("LOF requires k >= 1");
  const std::size_t available = ctx.available_neighbors(q);
  if (k > available) {
    throw ConfigError("LOF k=" + std::to_string(k) + " exceeds the " + std::to_string(available) +
                      " available neighbors");
  }
}

namespace {

// Candidate neighbors of q sorted by (distance, index).
std::vector<std::pair<double, std::size_t>> sorted_candidates(const ProximityContext& ctx,
                                                              const QueryPoint& q) {
  const auto d = ctx.distances_from(q);
  std::vector<std::pair<double, std::size_t>> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (q.referenceIndex && *q.referenceIndex == i) continue;
    out.emplace_back(d[i], i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double clamp_lrd(double count, double reachSum) {
  if (reachSum <= 0.0) return kLrdCeiling;
  return std::min(count / reachSum, kLrdCeiling);
}

}  // namespace

double k_distance(const ProximityContext& ctx, const QueryPoint& q, std::size_t k) {
  require_neighbors(ctx, q, k);
  return sorted_candidates(ctx, q)[k - 1].first;
}

std::vector<std::size_t> k_neighborhood(const ProximityContext& ctx, const QueryPoint& q,
                                        std::size_t k) {
  require_neighbors(ctx, q, k);
  const auto cand = sorted_candidates(ctx, q);
  const double kd = cand[k - 1].first;
  std::vector<std::size_t> out;
  for (const auto& [d, i] : cand) {
    if (d > kd) break;
    out.push_back(i);
  }
  return out;
}

double reachability_distance(const ProximityContext& ctx, const QueryPoint& a, std::size_t b,
                             std::size_t k) {
  const double kd = k_distance(ctx, ctx.at(b), k);
  return std::max(kd, euclidean_distance(a.features, ctx.reference(b).features));
}

double local_reachability_density(const ProximityContext& ctx, const QueryPoint& a,
                                  std::size_t k) {
  const auto nbrs = k_neighborhood(ctx, a, k);
  double sum = 0.0;
  for (std::size_t b : nbrs) sum += reachability_distance(ctx, a, b, k);
  return clamp_lrd(static_cast<double>(nbrs.size()), sum);
}

LofModel::LofModel(ProximityContext ctx, std::size_t k) : ctx_(std::move(ctx)), k_(k) {
  const std::size_t n = ctx_.size();
  if (n == 0) throw ConfigError("LOF context has no reference points");
  kdist_.resize(n);
  std::vector<Neighborhood> hoods(n);
  for (std::size_t i = 0; i < n; ++i) {
    hoods[i] = neighborhood_of(ctx_.at(i));
    kdist_[i] = hoods[i].distances.back();
  }
  lrd_.resize(n);
  for (std::size_t i = 0; i < n; ++i) lrd_[i] = lrd_of(hoods[i]);
}

LofModel::Neighborhood LofModel::neighborhood_of(const QueryPoint& q) const {
  require_neighbors(ctx_, q, k_);
  const auto cand = sorted_candidates(ctx_, q);
  const double kd = cand[k_ - 1].first;
  Neighborhood n;
  for (const auto& [d, i] : cand) {
    if (d > kd) break;
    n.members.push_back(i);
    n.distances.push_back(d);
  }
  return n;
}

double LofModel::lrd_of(const Neighborhood& n) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < n.members.size(); ++j) {
    sum += std::max(kdist_[n.members[j]], n.distances[j]);
  }
  return clamp_lrd(static_cast<double>(n.members.size()), sum);
}

Strangeness LofModel::score(const QueryPoint& q) const {
  const auto n = neighborhood_of(q);
  const double own = q.referenceIndex ? lrd_[*q.referenceIndex] : lrd_of(n);
  double ratioSum = 0.0;
  for (std::size_t b : n.members) ratioSum += lrd_[b] / own;
  return Strangeness(ratioSum / static_cast<double>(n.members.size()));
}

std::vector<double> LofModel::score_all_references() const {
  std::vector<double> out(ctx_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = score_reference(i).value();
  return out;
}

Strangeness lof_score(const ProximityContext& ctx, const QueryPoint& q, const LofConfig& cfg) {
  require_neighbors(ctx, q, cfg.k);
  return LofModel(ctx, cfg.k).score(q);
}

std::vector<double> bag_local_lof(const std::vector<Instance>& instances, std::size_t k) {
  if (instances.size() < 2 || k + 1 > instances.size()) {
    throw ConfigError("bag-local LOF k=" + std::to_string(k) + " needs at least " +
                      std::to_string(k + 1) + " instances, bag has " +
                      std::to_string(instances.size()));
  }
  return LofModel(ProximityContext(instances), k).score_all_references();
}

}  // namespace milstroud
