#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gptpinn {

using Vector = Eigen::VectorXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { kTanh, kCos };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Derivative channels that a forward pass can produce. Bitmask.
enum Channel : unsigned {
  kValue = 1u << 0,
  kDx = 1u << 1,
  kDt = 1u << 2,
  kDxx = 1u << 3,
  kDtt = 1u << 4,
  /// Mixed derivative. Requested by nothing in the library; asking for it
  /// raises "unsupported derivative order".
  kDxt = 1u << 5,
};
using Channels = unsigned;

inline constexpr Channels kAllSupported = kValue | kDx | kDt | kDxx | kDtt;

/// Index of a channel within the five-element arrays below.
enum ChannelIndex : int { kU = 0, kUx = 1, kUt = 2, kUxx = 3, kUtt = 4 };
inline constexpr int kNumChannels = 5;

/// Value and input derivatives of a network at one space-time point.
struct ExtendedState {
  double u = 0.0;
  double u_x = 0.0;
  double u_t = 0.0;
  double u_xx = 0.0;
  double u_tt = 0.0;

  double operator[](int channel) const;
};

/// A batch of (x, t) points stored as two columns.
struct PointBatch {
  Vector x;
  Vector t;

  Eigen::Index size() const { return x.size(); }
  static PointBatch single(double x, double t);
};

/// Batched ExtendedState. Channels that were not requested are empty.
struct ExtendedBatch {
  std::array<Vector, kNumChannels> fields;

  const Vector& u() const { return fields[kU]; }
  const Vector& u_x() const { return fields[kUx]; }
  const Vector& u_t() const { return fields[kUt]; }
  const Vector& u_xx() const { return fields[kUxx]; }
  const Vector& u_tt() const { return fields[kUtt]; }

  Eigen::Index size() const { return fields[kU].size(); }
  ExtendedState at(Eigen::Index p) const;
};

/// Weights and biases of a fully connected network NN(d_1, ..., d_K).
///
/// All parameters live in one flat vector so optimizers and gradients share
/// a single shape. Layer k occupies a row-major block for W_k (d_{k+1} x d_k)
/// followed by b_k (d_{k+1}).
class MlpParams {
 public:
  MlpParams() = default;
  MlpParams(std::vector<int> dims, Activation activation);
  MlpParams(std::vector<int> dims, Activation activation, Vector theta);

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlpParams glorot(std::vector<int> dims, Activation activation,
                          std::uint64_t seed);

  static std::size_t parameter_count(std::span<const int> dims);

  const std::vector<int>& dims() const { return dims_; }
  Activation activation() const { return activation_; }
  std::size_t layer_count() const { return dims_.size() - 1; }

  const Vector& theta() const { return theta_; }
  Vector& theta() { return theta_; }

  Eigen::Map<const RowMatrix> weight(std::size_t layer) const;
  Eigen::Map<RowMatrix> weight(std::size_t layer);
  Eigen::Map<const Vector> bias(std::size_t layer) const;
  Eigen::Map<Vector> bias(std::size_t layer);

  bool all_finite() const { return theta_.allFinite(); }

  friend bool operator==(const MlpParams& a, const MlpParams& b);

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] +
           static_cast<std::size_t>(dims_[layer + 1]) * dims_[layer];
  }
  void validate_and_index();

  std::vector<int> dims_;
  Activation activation_ = Activation::kTanh;
  Vector theta_;
  std::vector<std::size_t> offsets_;
};

/// Plain network output at one point.
double mlp_forward(const MlpParams& params, double x, double t);

/// Value plus first and pure second input derivatives at one point.
ExtendedState extended_forward(const MlpParams& params, double x, double t);

/// Batched extended forward pass restricted to the requested channels.
/// Results are independent of batch size: every output entry is produced by
/// the same fixed-order accumulation whether P = 1 or P = 10^4.
ExtendedBatch extended_forward(const MlpParams& params,
                               const PointBatch& points, Channels channels);

/// Per-point residual and its partial derivatives with respect to each
/// ExtendedState channel. Empty partials are treated as zero.
struct ResidualBatch {
  Vector r;
  std::array<Vector, kNumChannels> partial;
};

using ResidualFn =
    std::function<ResidualBatch(const ExtendedBatch&, const PointBatch&)>;

/// One block of a sum-of-squares loss: scale * sum_p w_p r_p^2.
struct LossTerm {
  std::string name;
  PointBatch points;
  Channels channels = kValue;
  ResidualFn residual;
  double scale = 1.0;
  /// Optional per-point weights (self-adaptive masks).
  std::optional<Vector> weights;
};

/// Sum of squared residuals of one term given an evaluated batch. This is the
/// single accumulation used by every loss path in the library.
double accumulate_term(const LossTerm& term, const ResidualBatch& residual);

struct LossEvaluation {
  double loss = 0.0;
  /// dLoss/dtheta, same layout as MlpParams::theta(). Empty when not asked.
  Vector grad;
  /// Per-term residual vectors, in term order.
  std::vector<Vector> residuals;
};

/// Buffers kept between loss evaluations so a training loop does not
/// reallocate its tapes every epoch.
class LossWorkspace {
 public:
  LossWorkspace();
  ~LossWorkspace();
  LossWorkspace(LossWorkspace&&) noexcept;
  LossWorkspace& operator=(LossWorkspace&&) noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  friend LossEvaluation evaluate_loss(const MlpParams&,
                                      std::span<const LossTerm>, bool,
                                      LossWorkspace*);
};

/// Loss of an MLP on a list of terms, optionally with its parameter gradient
/// obtained by reverse accumulation through the extended forward pass.
LossEvaluation evaluate_loss(const MlpParams& params,
                             std::span<const LossTerm> terms,
                             bool with_gradient,
                             LossWorkspace* workspace = nullptr);

/// Gradient-only convenience wrapper.
Vector loss_grad_params(const MlpParams& params,
                        std::span<const LossTerm> terms);

}  // namespace gptpinn
