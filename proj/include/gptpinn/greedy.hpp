#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gptpinn/error.hpp"
#include "gptpinn/gpt.hpp"

namespace gptpinn {

struct GreedyConfig {
  /// Training set, scanned in this order.
  std::vector<ParameterPoint> xi;
  /// First parameter; a seeded-random entry of xi when absent.
  std::optional<ParameterPoint> mu1;
  int n_max = 1;
  /// Stop once the largest indicator falls below this value.
  std::optional<double> tol;
  TrainConfig full;
  OnlineConfig online;
  std::uint64_t seed = 0;

  /// Full-PINN collocation set.
  CollocationSet colloc;
  /// Reduced set for the online loss; the full set when absent.
  std::optional<CollocationSet> reduced;
  FilterRule filter = FilterRule::kNone;
  double filter_fraction = 0.8;

  /// Also scan the model after its last neuron is added, so the final
  /// round carries an indicator table.
  bool final_scan = false;
  int threads = 1;

  /// Progress and warning lines.
  std::function<void(const std::string&)> log;

  void validate(const PdeDefinition& pde) const;
};

struct ScanResult {
  /// One entry per training-set point; +inf where the online solve diverged.
  std::vector<double> delta;
  std::vector<std::size_t> diverged;
  double wall_time = 0.0;
};

/// Online indicator for every entry of xi, each started from init_coeffs.
/// Entries are independent, so `threads` > 1 splits them into contiguous
/// ranges; the table is the same for any thread count.
ScanResult scan_indicators(const GptModel& model,
                           std::span<const ParameterPoint> xi,
                           const OnlineConfig& online, int threads = 1);

/// Raised when a full PINN diverges mid-run. Carries the model built so far.
class OfflineAborted : public Error {
 public:
  OfflineAborted(const std::string& what, GptModel partial)
      : Error(what), partial_(std::move(partial)) {}
  const GptModel& partial() const { return partial_; }

 private:
  GptModel partial_;
};

/// Greedy offline stage: train at mu1, then repeatedly scan xi, take the
/// worst not-yet-chosen entry and train a full PINN there.
GptModel run_offline(const PdeDefinition& pde, const GreedyConfig& config);

/// Flat indices round(k (|xi| - 1) / (n - 1)), k = 0..n-1.
std::vector<std::size_t> uniform_indices(std::size_t xi_size, int n);

/// Model from n full PINNs at stride-selected entries of xi; no scan.
GptModel uniform_baseline(const PdeDefinition& pde, const GreedyConfig& config,
                          int n);

/// Checks that each chosen parameter was the stored argmax of the previous
/// round's table. Returns an empty string when every certificate holds.
std::string check_certificates(const GptModel& model);

}  // namespace gptpinn
