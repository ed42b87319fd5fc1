#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gptpinn/mlp.hpp"
#include "gptpinn/pde.hpp"

namespace gptpinn {

enum class SamplingStrategy { kUniformRandom, kUniformGrid, kLatinHypercube };

std::string_view to_string(SamplingStrategy s);
SamplingStrategy sampling_strategy_from_string(std::string_view name);

struct CollocationCounts {
  int interior = 0;
  int boundary = 0;
  int initial = 0;
};

/// Interior points in Omega x (0, T), boundary points on {-1, 1} x [0, T] and
/// initial points on Omega x {0}.
struct CollocationSet {
  PointBatch interior;
  PointBatch boundary;
  PointBatch initial;
  SamplingStrategy strategy = SamplingStrategy::kUniformRandom;
  std::uint64_t seed = 0;

  CollocationCounts counts() const {
    return {static_cast<int>(interior.size()), static_cast<int>(boundary.size()),
            static_cast<int>(initial.size())};
  }
};

bool same_points(const CollocationSet& a, const CollocationSet& b);

/// Deterministic for a given seed. Grid sampling needs a perfect-square
/// interior count and an even boundary count.
CollocationSet sample_collocation(const PdeDefinition& pde,
                                  const CollocationCounts& counts,
                                  SamplingStrategy strategy,
                                  std::uint64_t seed);

/// Latin hypercube sample of n points in [lo_d, hi_d) per dimension, one
/// sample per stratum.
std::vector<std::vector<double>> latin_hypercube(
    int n, const std::vector<Interval>& box, std::uint64_t seed);

enum class FilterRule {
  kNone,
  /// Drop points with |u_xx| > fraction * max |u_xx|.
  kMaxFraction,
  /// Drop points above the fraction-quantile of |u_xx|.
  kQuantile,
};

std::string_view to_string(FilterRule r);
FilterRule filter_rule_from_string(std::string_view name);

/// |u_xx| of every basis network on every point of a collocation set.
struct StiffValues {
  std::vector<Vector> interior;  // one vector per basis
  std::vector<Vector> boundary;
  std::vector<Vector> initial;
};

struct StiffFilterResult {
  CollocationSet set;
  std::vector<Eigen::Index> kept_interior;
  std::vector<Eigen::Index> kept_boundary;
  std::vector<Eigen::Index> kept_initial;
};

/// Removes a point when any basis flags it (union over bases), separately on
/// the interior, boundary and initial sets.
StiffFilterResult filter_stiff_points_indexed(const StiffValues& values,
                                              const CollocationSet& colloc,
                                              FilterRule rule = FilterRule::kMaxFraction,
                                              double fraction = 0.8);

CollocationSet filter_stiff_points(const StiffValues& values,
                                   const CollocationSet& colloc,
                                   FilterRule rule = FilterRule::kMaxFraction,
                                   double fraction = 0.8);

PointBatch select_points(const PointBatch& points,
                         const std::vector<Eigen::Index>& rows);

}  // namespace gptpinn
