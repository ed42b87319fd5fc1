#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gptpinn/collocation.hpp"
#include "gptpinn/mlp.hpp"
#include "gptpinn/pde.hpp"

namespace gptpinn {

/// Anything that can report ExtendedState values on a batch of points: a
/// network, an analytic test function, or a combination of networks.
class FieldProvider {
 public:
  virtual ~FieldProvider() = default;
  virtual ExtendedBatch evaluate(const PointBatch& points,
                                 Channels channels) const = 0;
};

class MlpProvider final : public FieldProvider {
 public:
  explicit MlpProvider(const MlpParams& params) : params_(params) {}
  ExtendedBatch evaluate(const PointBatch& points,
                         Channels channels) const override {
    return extended_forward(params_, points, channels);
  }

 private:
  const MlpParams& params_;
};

/// Closed-form field, mostly for tests.
class AnalyticProvider final : public FieldProvider {
 public:
  using Fn = std::function<ExtendedState(double x, double t)>;
  explicit AnalyticProvider(Fn fn) : fn_(std::move(fn)) {}
  ExtendedBatch evaluate(const PointBatch& points,
                         Channels channels) const override;

 private:
  Fn fn_;
};

/// The PINN loss as a list of mean-normalised terms: interior residual,
/// boundary deviation, initial deviation and, for second-order-in-time
/// equations, initial-velocity deviation.
std::vector<LossTerm> build_loss_terms(const PdeDefinition& pde,
                                       const ParameterPoint& mu,
                                       const CollocationSet& colloc);

/// Loss of any provider on the given collocation set.
double pinn_loss(const FieldProvider& provider, const PdeDefinition& pde,
                 const ParameterPoint& mu, const CollocationSet& colloc);

BoundaryInitialResiduals boundary_initial_terms(const PdeDefinition& pde,
                                                const FieldProvider& provider,
                                                const CollocationSet& colloc);

struct TrainConfig {
  std::vector<int> dims{2, 20, 20, 1};
  Activation activation = Activation::kTanh;
  double lr = 1e-3;
  long epochs = 1000;
  /// Stop as soon as the epoch loss drops below this value.
  std::optional<double> stop_loss;
  /// Optional second Adam phase at a decayed rate (stands in for L-BFGS).
  long phase2_epochs = 0;
  double phase2_lr = 0.0;
  bool sa_enabled = false;
  double sa_lr = 5e-3;
  /// Initial raw mask parameter; the effective weight is 1 + raw^2.
  double sa_init = 1.0;

  void validate() const;
  long total_epochs() const { return epochs + phase2_epochs; }
};

/// A trained network tagged with its parameter value.
struct FullPinn {
  ParameterPoint mu;
  MlpParams params;
  double terminal_loss = 0.0;
  long epochs_run = 0;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;
};

FullPinn train_full_pinn(const PdeDefinition& pde, const ParameterPoint& mu,
                         const CollocationSet& colloc,
                         const TrainConfig& config, std::uint64_t seed);

/// Self-adaptive variant: interior and initial points carry trainable weights
/// 1 + raw^2. theta descends and the raw weights ascend on the same loss each
/// epoch. With sa_enabled = false this is exactly train_full_pinn.
FullPinn train_sa_pinn(const PdeDefinition& pde, const ParameterPoint& mu,
                       const CollocationSet& colloc, const TrainConfig& config,
                       std::uint64_t seed);

}  // namespace gptpinn
