#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gptpinn/gpt.hpp"

namespace gptpinn {

struct ErrorMetrics {
  double rel_l2 = 0.0;
  double max_abs = 0.0;
};

/// ||gpt - ref||_2 / ||ref||_2 and max |gpt - ref|.
ErrorMetrics error_metrics(const Vector& gpt, const Vector& reference);

/// Uniform nx x nt grid over [x_min, x_max] x [0, T], endpoints included.
struct EvalGrid {
  int nx = 101;
  int nt = 101;
};

/// Grid points with x as the slow index.
PointBatch grid_points(const PdeDefinition& pde, const EvalGrid& grid);

/// Reference values on the grid for one parameter, or nothing if none is
/// available.
using ReferenceSource = std::function<std::optional<Vector>(
    const ParameterPoint& mu, const PointBatch& grid)>;

struct TestRecord {
  ParameterPoint mu;
  double rel_l2 = 0.0;
  double max_abs = 0.0;
  double delta = 0.0;
  double t_online = 0.0;
};

struct ErrorReport {
  EvalGrid grid;
  std::vector<TestRecord> records;
  std::vector<ParameterPoint> skipped;
  double worst_rel_l2 = 0.0;
  double worst_max_abs = 0.0;
};

ErrorReport evaluate_test_set(
    const GptModel& model, const std::vector<ParameterPoint>& test_params,
    const ReferenceSource& reference, const EvalGrid& grid,
    const OnlineConfig& online,
    const std::function<void(const std::string&)>& log = {});

/// Seeded uniform draws from the domain box, skipping anything in `exclude`.
std::vector<ParameterPoint> draw_test_parameters(
    const ParameterDomain& domain, int count, std::uint64_t seed,
    const std::vector<ParameterPoint>& exclude);

/// References from freshly trained full PINNs. With a cache directory each
/// network is stored there and reused on the next call.
ReferenceSource trained_reference(const PdeDefinition& pde,
                                  const CollocationSet& colloc,
                                  const TrainConfig& config, std::uint64_t seed,
                                  std::optional<std::string> cache_dir = {});

/// Cumulative cost of answering q = 0..horizon queries either way.
struct TimingCurve {
  std::vector<double> full_cum;
  std::vector<double> gpt_cum;
  double offline_total = 0.0;
  double t_full = 0.0;
  double t_gpt = 0.0;
  double marginal_ratio = 0.0;
  /// Smallest q with gpt_cum(q) <= full_cum(q).
  std::optional<long> breakeven;
};

/// Curve for measured per-query costs. The horizon is extended past the
/// breakeven point when needed.
TimingCurve make_timing_curve(double offline_total, double t_full, double t_gpt,
                              long horizon);

/// ceil(offline / (t_full - t_gpt)) when t_gpt < t_full.
std::optional<long> breakeven_formula(double offline_total, double t_full,
                                      double t_gpt);

/// Sum of full-PINN training and scan times recorded in the history.
double offline_cost(const GptModel& model);

struct BenchOptions {
  /// Queries answered by a full PINN. Each one is a complete training run,
  /// so this is usually much smaller than the number of online queries.
  int full_queries = 1;
  long horizon = 100;
};

/// Times full-PINN training and online_train on the queries and builds the
/// cumulative curves from the mean per-query costs.
TimingCurve timing_benchmark(const GptModel& model,
                             const std::vector<ParameterPoint>& queries,
                             const CollocationSet& colloc,
                             const TrainConfig& full,
                             const OnlineConfig& online, std::uint64_t seed,
                             const BenchOptions& options = {});

/// sigma_k / sigma_1 for the whole spectrum.
std::vector<double> svd_decay_report(const Eigen::MatrixXd& snapshots);

/// Explicit leapfrog solution of the Klein-Gordon problem on an x-t grid
/// (nx_fd intervals in x), sampled at the evaluation grid.
Vector kg_reference_solution(const PdeDefinition& pde, const ParameterPoint& mu,
                             const EvalGrid& grid, int nx_fd = 200);

enum class SnapshotSource { kReference, kPinn };

std::string_view to_string(SnapshotSource s);
SnapshotSource snapshot_source_from_string(std::string_view name);

struct SvdExperiment {
  std::vector<ParameterPoint> params;
  std::vector<double> solution;
  std::vector<double> theta;
};

/// Solution snapshots {u(., mu)} against network snapshots {theta(mu)} over
/// the given parameters. Every network starts from the same seed.
SvdExperiment svd_experiment(
    const PdeDefinition& pde, const std::vector<ParameterPoint>& params,
    const CollocationSet& colloc, const TrainConfig& config, std::uint64_t seed,
    const EvalGrid& grid, SnapshotSource source,
    const std::function<void(const std::string&)>& log = {});

}  // namespace gptpinn
