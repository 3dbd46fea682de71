#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "milstroud/core_types.hpp"

namespace milstroud {

enum class LofScope {
  BagLocal,        // neighbors come from the scored instance's own bag
  ReferenceGlobal  // neighbors come from the pooled training instances
};

struct LofConfig {
  std::size_t k = 2;
  LofScope scope = LofScope::BagLocal;
};

/// LRD assigned when every neighbor coincides with the point.
inline constexpr double kLrdCeiling = 1e12;

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// A point being scored against a proximity context. When the point is itself
/// one of the reference points, referenceIndex names it so it is never its own
/// neighbor.
struct QueryPoint {
  std::span<const double> features;
  std::optional<std::size_t> referenceIndex;
};

/// Reference points plus their full pairwise Euclidean distance matrix.
class ProximityContext {
 public:
  explicit ProximityContext(std::vector<Instance> references);

  std::size_t size() const { return references_.size(); }
  const Instance& reference(std::size_t i) const { return references_[i]; }
  double distance(std::size_t i, std::size_t j) const { return dist_[i * references_.size() + j]; }

  QueryPoint at(std::size_t i) const { return {references_[i].features, i}; }
  static QueryPoint external(const Instance& inst) { return {inst.features, std::nullopt}; }

  /// Distances from q to every reference point; self-distance is reported as 0.
  std::vector<double> distances_from(const QueryPoint& q) const;

  /// Number of references available as neighbors of q.
  std::size_t available_neighbors(const QueryPoint& q) const {
    return references_.size() - (q.referenceIndex ? 1 : 0);
  }

 private:
  std::vector<Instance> references_;
  std::vector<double> dist_;
};

/// Throws ConfigError if q has fewer than k candidate neighbors.
void require_neighbors(const ProximityContext& ctx, const QueryPoint& q, std::size_t k);

double k_distance(const ProximityContext& ctx, const QueryPoint& q, std::size_t k);

/// Reference indices within k_distance of q (ties included, so the result may
/// hold more than k entries), ordered by distance.
std::vector<std::size_t> k_neighborhood(const ProximityContext& ctx, const QueryPoint& q,
                                        std::size_t k);

/// max(k_distance(b), dist(a, b)) for reference point b.
double reachability_distance(const ProximityContext& ctx, const QueryPoint& a, std::size_t b,
                             std::size_t k);

double local_reachability_density(const ProximityContext& ctx, const QueryPoint& a,
                                  std::size_t k);

/// Precomputes k-distances, neighborhoods and LRDs of all reference points so
/// that many queries can be scored in O(n) each. Immutable after construction.
class LofModel {
 public:
  LofModel(ProximityContext ctx, std::size_t k);

  const ProximityContext& context() const { return ctx_; }
  std::size_t k() const { return k_; }

  double reference_k_distance(std::size_t i) const { return kdist_[i]; }
  double reference_lrd(std::size_t i) const { return lrd_[i]; }

  Strangeness score(const QueryPoint& q) const;
  Strangeness score_reference(std::size_t i) const { return score(ctx_.at(i)); }

  /// LOF of every reference point, in reference order.
  std::vector<double> score_all_references() const;

 private:
  struct Neighborhood {
    std::vector<std::size_t> members;
    std::vector<double> distances;
  };
  Neighborhood neighborhood_of(const QueryPoint& q) const;
  double lrd_of(const Neighborhood& n) const;

  ProximityContext ctx_;
  std::size_t k_;
  std::vector<double> kdist_;
  std::vector<double> lrd_;
};

Strangeness lof_score(const ProximityContext& ctx, const QueryPoint& q, const LofConfig& cfg);

/// Bag-local LOF of every instance of `instances`, each scored against the rest.
std::vector<double> bag_local_lof(const std::vector<Instance>& instances, std::size_t k);

}  // namespace milstroud
