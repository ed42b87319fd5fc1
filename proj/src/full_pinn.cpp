#include "gptpinn/full_pinn.hpp"

#include <chrono>
#include <cmath>

#include "gptpinn/adam.hpp"
#include "gptpinn/error.hpp"

namespace gptpinn {

ExtendedBatch AnalyticProvider::evaluate(const PointBatch& points,
                                         Channels channels) const {
  const Eigen::Index n = points.size();
  ExtendedBatch out;
  const bool want[kNumChannels] = {
      true, (channels & (kDx | kDxx)) != 0, (channels & (kDt | kDtt)) != 0,
      (channels & kDxx) != 0, (channels & kDtt) != 0};
  for (int ch = 0; ch < kNumChannels; ++ch) {
    if (want[ch]) out.fields[ch].resize(n);
  }
  for (Eigen::Index p = 0; p < n; ++p) {
    const ExtendedState s = fn_(points.x(p), points.t(p));
    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (want[ch]) out.fields[ch](p) = s[ch];
    }
  }
  return out;
}

std::vector<LossTerm> build_loss_terms(const PdeDefinition& pde,
                                       const ParameterPoint& mu,
                                       const CollocationSet& colloc) {
  if (colloc.interior.size() == 0 || colloc.boundary.size() == 0 ||
      colloc.initial.size() == 0) {
    throw Error("empty collocation set");
  }
  if (mu.dim() != pde.domain().dim()) {
    throw Error("parameter has the wrong number of components");
  }
  std::vector<LossTerm> terms;
  terms.push_back({"interior", colloc.interior, pde.interior_channels(),
                   [pde, mu](const ExtendedBatch& e, const PointBatch& p) {
                     return pde.interior_residual(e, p, mu);
                   },
                   1.0 / static_cast<double>(colloc.interior.size()),
                   std::nullopt});
  terms.push_back({"boundary", colloc.boundary, kValue,
                   [pde](const ExtendedBatch& e, const PointBatch& p) {
                     return boundary_residual(pde, e, p);
                   },
                   1.0 / static_cast<double>(colloc.boundary.size()),
                   std::nullopt});
  terms.push_back({"initial", colloc.initial, kValue,
                   [pde](const ExtendedBatch& e, const PointBatch& p) {
                     return initial_residual(pde, e, p);
                   },
                   1.0 / static_cast<double>(colloc.initial.size()),
                   std::nullopt});
  if (pde.has_initial_velocity()) {
    terms.push_back({"initial_velocity", colloc.initial, kDt,
                     [pde](const ExtendedBatch& e, const PointBatch& p) {
                       return initial_velocity_residual(pde, e, p);
                     },
                     1.0 / static_cast<double>(colloc.initial.size()),
                     std::nullopt});
  }
  return terms;
}

double pinn_loss(const FieldProvider& provider, const PdeDefinition& pde,
                 const ParameterPoint& mu, const CollocationSet& colloc) {
  double loss = 0.0;
  for (const auto& term : build_loss_terms(pde, mu, colloc)) {
    const ExtendedBatch ext = provider.evaluate(term.points, term.channels);
    loss += accumulate_term(term, term.residual(ext, term.points));
  }
  return loss;
}

BoundaryInitialResiduals boundary_initial_terms(const PdeDefinition& pde,
                                                const FieldProvider& provider,
                                                const CollocationSet& colloc) {
  BoundaryInitialResiduals out;
  out.boundary =
      boundary_residual(pde, provider.evaluate(colloc.boundary, kValue),
                        colloc.boundary)
          .r;
  const Channels ic = pde.has_initial_velocity() ? (kValue | kDt) : kValue;
  const ExtendedBatch init = provider.evaluate(colloc.initial, ic);
  out.initial = initial_residual(pde, init, colloc.initial).r;
  if (pde.has_initial_velocity()) {
    out.initial_velocity =
        initial_velocity_residual(pde, init, colloc.initial).r;
  }
  return out;
}

void TrainConfig::validate() const {
  if (lr < 0.0 || phase2_lr < 0.0 || sa_lr < 0.0) {
    throw Error("learning rates must be non-negative");
  }
  if (epochs < 0 || phase2_epochs < 0) throw Error("epochs must be >= 0");
  if (dims.size() < 2) throw Error("architecture needs at least two layers");
  if (stop_loss && !(*stop_loss >= 0.0)) throw Error("stop_loss must be >= 0");
}

namespace {

FullPinn train_impl(const PdeDefinition& pde, const ParameterPoint& mu,
                    const CollocationSet& colloc, const TrainConfig& config,
                    std::uint64_t seed, bool self_adaptive) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  FullPinn out;
  out.mu = mu;
  out.seed = seed;
  out.params = MlpParams::glorot(config.dims, config.activation, seed);

  std::vector<LossTerm> terms = build_loss_terms(pde, mu, colloc);
  AdamState adam(out.params.theta().size());
  LossWorkspace workspace;

  // Self-adaptive masks on the interior (term 0) and initial (term 2) sets.
  constexpr std::size_t kMasked[] = {0, 2};
  Vector raw;
  std::optional<AdamState> mask_adam;
  if (self_adaptive) {
    const Eigen::Index n_int = terms[0].points.size();
    const Eigen::Index n_ini = terms[2].points.size();
    raw = Vector::Constant(n_int + n_ini, config.sa_init);
    mask_adam.emplace(raw.size());
  }
  auto apply_masks = [&] {
    Eigen::Index offset = 0;
    for (std::size_t k : kMasked) {
      const Eigen::Index n = terms[k].points.size();
      terms[k].weights =
          (Vector::Ones(n).array() + raw.segment(offset, n).array().square())
              .matrix();
      offset += n;
    }
  };

  const long total = config.total_epochs();
  double last_finite = 0.0;
  out.loss_history.reserve(static_cast<std::size_t>(total));
  for (long epoch = 0; epoch < total; ++epoch) {
    if (self_adaptive) apply_masks();
    LossEvaluation eval = evaluate_loss(out.params, terms, true, &workspace);
    if (!std::isfinite(eval.loss) || !eval.grad.allFinite()) {
      throw TrainingDiverged(epoch, last_finite);
    }
    last_finite = eval.loss;
    out.loss_history.push_back(eval.loss);
    if (config.stop_loss && eval.loss < *config.stop_loss) break;

    const double lr = epoch < config.epochs ? config.lr : config.phase2_lr;
    adam_step(adam, out.params.theta(), eval.grad, lr);

    if (self_adaptive) {
      // dL/draw_p = scale * r_p^2 * 2 raw_p; ascend.
      Vector g(raw.size());
      Eigen::Index offset = 0;
      for (std::size_t k : kMasked) {
        const Vector& r = eval.residuals[k];
        const Eigen::Index n = r.size();
        g.segment(offset, n) = (2.0 * terms[k].scale) *
                               r.array().square().matrix().cwiseProduct(
                                   raw.segment(offset, n));
        offset += n;
      }
      adam_step(*mask_adam, raw, g, config.sa_lr, -1.0);
    }
    out.epochs_run = epoch + 1;
  }

  // Terminal loss is always the unweighted loss of the final parameters.
  MlpProvider provider(out.params);
  out.terminal_loss = pinn_loss(provider, pde, mu, colloc);
  if (!std::isfinite(out.terminal_loss)) {
    throw TrainingDiverged(out.epochs_run, last_finite);
  }
  out.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return out;
}

}  // namespace

FullPinn train_full_pinn(const PdeDefinition& pde, const ParameterPoint& mu,
                         const CollocationSet& colloc,
                         const TrainConfig& config, std::uint64_t seed) {
  return train_impl(pde, mu, colloc, config, seed, false);
}

FullPinn train_sa_pinn(const PdeDefinition& pde, const ParameterPoint& mu,
                       const CollocationSet& colloc, const TrainConfig& config,
                       std::uint64_t seed) {
  return train_impl(pde, mu, colloc, config, seed, config.sa_enabled);
}

}  // namespace gptpinn
