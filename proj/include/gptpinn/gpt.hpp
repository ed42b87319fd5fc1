#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gptpinn/collocation.hpp"
#include "gptpinn/full_pinn.hpp"
#include "gptpinn/mlp.hpp"
#include "gptpinn/pde.hpp"

namespace gptpinn {

/// Extended forward values of one network on the reduced sets, laid out like
/// the loss terms of build_loss_terms. Only the channels each term reads are
/// filled in.
struct BasisBlock {
  std::vector<std::array<Vector, kNumChannels>> terms;
};

BasisBlock precompute_basis(const FullPinn& network,
                            const CollocationSet& reduced,
                            const PdeDefinition& pde);

/// All basis blocks side by side: for each term and stored channel, a
/// |points| x n matrix whose column i belongs to network i.
class PrecomputedBasis {
 public:
  PrecomputedBasis() = default;
  PrecomputedBasis(const PdeDefinition& pde, const CollocationSet& reduced,
                   const std::vector<BasisBlock>& blocks);

  std::size_t size() const { return size_; }
  std::size_t term_count() const { return matrices_.size(); }
  Channels channels(std::size_t term) const { return channels_[term]; }
  const Eigen::MatrixXd& matrix(std::size_t term, int channel) const {
    return matrices_[term][static_cast<std::size_t>(channel)];
  }
  const CollocationSet& reduced() const { return reduced_; }

 private:
  std::size_t size_ = 0;
  CollocationSet reduced_;
  std::vector<Channels> channels_;
  std::vector<std::array<Eigen::MatrixXd, kNumChannels>> matrices_;
};

enum class OnlineOptimizer { kPlainGd, kAdam };

std::string_view to_string(OnlineOptimizer o);
OnlineOptimizer online_optimizer_from_string(std::string_view name);

struct OnlineConfig {
  double lr = 0.025;
  long epochs = 2000;
  OnlineOptimizer optimizer = OnlineOptimizer::kPlainGd;

  void validate() const;
};

/// One round of the greedy offline stage. Round n records the parameter that
/// became neuron n and the scan of the model with n neurons.
struct GreedyRound {
  ParameterPoint mu;
  /// Indicator value that selected mu (NaN for the first round).
  double selected_by = 0.0;
  bool scanned = false;
  /// Indicator per training-set entry, in training-set order.
  std::vector<double> scan;
  /// Largest indicator over the entries not yet chosen, and where it sits.
  double max_indicator = 0.0;
  long argmax = -1;
  double t_full_train = 0.0;
  double t_scan = 0.0;
};

/// The meta-network: frozen full PINNs, their snapshots on the reduced
/// sets, and the history of how they were chosen.
class GptModel {
 public:
  GptModel() = default;
  /// `reduced` is the reduced collocation set before stiff-point filtering.
  GptModel(PdeDefinition pde, CollocationSet reduced, FilterRule filter,
           double filter_fraction);

  const PdeDefinition& pde() const { return pde_; }
  const CollocationSet& reduced_base() const { return reduced_base_; }
  FilterRule filter() const { return filter_; }
  double filter_fraction() const { return filter_fraction_; }
  /// Reduced set after filtering (equals reduced_base without a filter).
  const CollocationSet& reduced() const { return basis_.reduced(); }

  std::size_t size() const { return networks_.size(); }
  const std::vector<FullPinn>& networks() const { return networks_; }
  std::vector<ParameterPoint> parameters() const;
  const PrecomputedBasis& basis() const { return basis_; }

  void add_network(FullPinn network);

  std::vector<ParameterPoint> xi;
  std::vector<GreedyRound> history;
  /// Online settings the model was built with; the default for queries.
  OnlineConfig online;

 private:
  void rebuild_basis();

  PdeDefinition pde_;
  CollocationSet reduced_base_;
  FilterRule filter_ = FilterRule::kNone;
  double filter_fraction_ = 0.8;
  std::vector<FullPinn> networks_;
  PrecomputedBasis basis_;
};

/// The reduced loss at a fixed parameter, evaluated from the precomputed
/// basis only. Building one copies the reduced points once; every call after
/// that touches only |C^r| x n data.
class GptObjective {
 public:
  GptObjective(const GptModel& model, const ParameterPoint& mu);

  double loss(const Vector& c) const;
  /// Returns the loss and writes its gradient in c into `grad`.
  double loss_and_grad(const Vector& c, Vector& grad) const;

 private:
  ExtendedBatch combine(std::size_t term, const Vector& c) const;
  void check(const Vector& c) const;

  const GptModel& model_;
  std::vector<LossTerm> terms_;
};

double gpt_loss(const Vector& c, const GptModel& model,
                const ParameterPoint& mu);
Vector gpt_grad(const Vector& c, const GptModel& model,
                const ParameterPoint& mu);

struct OnlineResult {
  Vector c;
  /// Indicator: the reduced loss at the returned c.
  double delta = 0.0;
  long epochs = 0;
  double wall_time = 0.0;
};

OnlineResult online_train(const Vector& c0, const GptModel& model,
                          const ParameterPoint& mu, const OnlineConfig& config);

/// Inverse-distance blend of the canonical vectors of the nearest
/// min(2^d, n) sampled parameters; ties go to the earlier sample.
Vector init_coeffs(const ParameterPoint& mu, const GptModel& model);

/// Sum_i c_i * network_i at every point.
Vector gpt_predict(const Vector& c, const GptModel& model,
                   const PointBatch& points);

/// Evaluates sum_i c_i * network_i on the fly, without the stored basis.
class GptProvider final : public FieldProvider {
 public:
  GptProvider(const GptModel& model, Vector c)
      : model_(model), c_(std::move(c)) {}
  ExtendedBatch evaluate(const PointBatch& points,
                         Channels channels) const override;

 private:
  const GptModel& model_;
  Vector c_;
};

}  // namespace gptpinn
