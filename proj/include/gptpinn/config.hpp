#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gptpinn/collocation.hpp"
#include "gptpinn/evalbench.hpp"
#include "gptpinn/full_pinn.hpp"
#include "gptpinn/gpt.hpp"
#include "gptpinn/greedy.hpp"
#include "gptpinn/pde.hpp"

namespace gptpinn {

/// Everything a CLI run needs, read from an INI file with the sections
/// [pde], [collocation], [full_pinn], [online], [greedy], [eval], [output].
/// Values that are lists are written as JSON arrays.
struct RunConfig {
  PdeDefinition pde;

  CollocationCounts counts;
  SamplingStrategy strategy = SamplingStrategy::kUniformRandom;
  std::uint64_t colloc_seed = 0;
  FilterRule filter = FilterRule::kNone;
  double filter_fraction = 0.8;
  /// Independent reduced set; the full set is reused when absent.
  std::optional<CollocationCounts> reduced_counts;
  std::uint64_t reduced_seed = 1;

  TrainConfig full;
  std::uint64_t full_seed = 0;

  OnlineConfig online;

  std::vector<int> xi_counts;
  std::vector<ParameterPoint> xi_list;
  std::optional<ParameterPoint> mu1;
  int n_max = 1;
  std::optional<double> tol;
  std::uint64_t greedy_seed = 0;
  bool final_scan = false;
  int threads = 1;

  int test_count = 20;
  EvalGrid grid;
  std::uint64_t eval_seed = 0;
  int bench_queries = 20;
  int bench_full_queries = 1;
  long bench_horizon = 100;
  int svd_params = 50;
  SnapshotSource svd_source = SnapshotSource::kReference;
  /// Epoch budget for the snapshot networks; the full-PINN budget if absent.
  std::optional<long> svd_epochs;

  std::string output_dir;

  /// Full-scale settings for one family.
  static RunConfig defaults(PdeFamily family);

  CollocationSet collocation() const;
  std::optional<CollocationSet> reduced_collocation() const;
  std::vector<ParameterPoint> training_set() const;
  GreedyConfig greedy_config() const;

  /// Fixed-order text of every field that affects results (the output
  /// directory and thread count do not).
  std::string canonical() const;
  std::uint64_t hash() const;
  /// Ways this configuration departs from the reference procedure.
  std::vector<std::string> deviations() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace gptpinn
