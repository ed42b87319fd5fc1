#include "gptpinn/gpt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "gptpinn/adam.hpp"
#include "gptpinn/error.hpp"

namespace gptpinn {

namespace {

constexpr std::array<Channel, kNumChannels> kChannelBit = {kValue, kDx, kDt,
                                                           kDxx, kDtt};

std::vector<Channels> term_channels(const PdeDefinition& pde) {
  std::vector<Channels> out = {pde.interior_channels(), kValue, kValue};
  if (pde.has_initial_velocity()) out.push_back(kDt);
  return out;
}

std::vector<PointBatch> term_points(const PdeDefinition& pde,
                                    const CollocationSet& set) {
  std::vector<PointBatch> out = {set.interior, set.boundary, set.initial};
  if (pde.has_initial_velocity()) out.push_back(set.initial);
  return out;
}

}  // namespace

BasisBlock precompute_basis(const FullPinn& network,
                            const CollocationSet& reduced,
                            const PdeDefinition& pde) {
  const auto channels = term_channels(pde);
  const auto points = term_points(pde, reduced);
  BasisBlock block;
  block.terms.resize(channels.size());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    if (points[k].size() == 0) throw Error("empty collocation set");
    ExtendedBatch ext = extended_forward(network.params, points[k], channels[k]);
    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (channels[k] & kChannelBit[ch]) {
        block.terms[k][ch] = std::move(ext.fields[ch]);
      }
    }
  }
  return block;
}

PrecomputedBasis::PrecomputedBasis(const PdeDefinition& pde,
                                   const CollocationSet& reduced,
                                   const std::vector<BasisBlock>& blocks)
    : size_(blocks.size()), reduced_(reduced), channels_(term_channels(pde)) {
  const auto points = term_points(pde, reduced);
  const auto n = static_cast<Eigen::Index>(blocks.size());
  matrices_.resize(channels_.size());
  for (std::size_t k = 0; k < channels_.size(); ++k) {
    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (!(channels_[k] & kChannelBit[ch])) continue;
      auto& m = matrices_[k][static_cast<std::size_t>(ch)];
      m.resize(points[k].size(), n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Vector& col = blocks[static_cast<std::size_t>(i)].terms[k][ch];
        if (col.size() != m.rows()) {
          throw Error("basis block does not match the reduced set");
        }
        m.col(i) = col;
      }
    }
  }
}

std::string_view to_string(OnlineOptimizer o) {
  return o == OnlineOptimizer::kAdam ? "adam" : "plain-gd";
}

OnlineOptimizer online_optimizer_from_string(std::string_view name) {
  if (name == "plain-gd") return OnlineOptimizer::kPlainGd;
  if (name == "adam") return OnlineOptimizer::kAdam;
  throw Error("unknown online optimizer '" + std::string(name) + "'");
}

void OnlineConfig::validate() const {
  if (!(lr >= 0.0)) throw Error("online learning rate must be >= 0");
  if (epochs < 0) throw Error("online epochs must be >= 0");
}

// ---------------------------------------------------------------------------
// GptModel

GptModel::GptModel(PdeDefinition pde, CollocationSet reduced, FilterRule filter,
                   double filter_fraction)
    : pde_(std::move(pde)),
      reduced_base_(std::move(reduced)),
      filter_(filter),
      filter_fraction_(filter_fraction) {
  rebuild_basis();
}

std::vector<ParameterPoint> GptModel::parameters() const {
  std::vector<ParameterPoint> out;
  out.reserve(networks_.size());
  for (const auto& n : networks_) out.push_back(n.mu);
  return out;
}

void GptModel::add_network(FullPinn network) {
  if (network.mu.dim() != pde_.domain().dim()) {
    throw Error("parameter has the wrong number of components");
  }
  networks_.push_back(std::move(network));
  rebuild_basis();
}

void GptModel::rebuild_basis() {
  CollocationSet reduced = reduced_base_;
  if (filter_ != FilterRule::kNone && !networks_.empty()) {
    StiffValues values;
    for (const auto& net : networks_) {
      auto uxx = [&](const PointBatch& p) -> Vector {
        if (p.size() == 0) return Vector();
        return extended_forward(net.params, p, kDxx).u_xx().cwiseAbs();
      };
      values.interior.push_back(uxx(reduced_base_.interior));
      values.boundary.push_back(uxx(reduced_base_.boundary));
      values.initial.push_back(uxx(reduced_base_.initial));
    }
    reduced = filter_stiff_points(values, reduced_base_, filter_,
                                  filter_fraction_);
    // a set filtered down to nothing would drop its term; keep it whole
    if (reduced.interior.size() == 0) reduced.interior = reduced_base_.interior;
    if (reduced.boundary.size() == 0) reduced.boundary = reduced_base_.boundary;
    if (reduced.initial.size() == 0) reduced.initial = reduced_base_.initial;
  }
  std::vector<BasisBlock> blocks;
  blocks.reserve(networks_.size());
  for (const auto& net : networks_) {
    blocks.push_back(precompute_basis(net, reduced, pde_));
  }
  basis_ = PrecomputedBasis(pde_, reduced, blocks);
}

// ---------------------------------------------------------------------------
// Reduced loss

GptObjective::GptObjective(const GptModel& model, const ParameterPoint& mu)
    : model_(model), terms_(build_loss_terms(model.pde(), mu, model.reduced())) {}

void GptObjective::check(const Vector& c) const {
  if (static_cast<std::size_t>(c.size()) != model_.size()) {
    throw Error("coefficient vector length does not match the model");
  }
}

ExtendedBatch GptObjective::combine(std::size_t term, const Vector& c) const {
  const PrecomputedBasis& basis = model_.basis();
  ExtendedBatch ext;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    if (basis.channels(term) & kChannelBit[ch]) {
      ext.fields[ch].noalias() = basis.matrix(term, ch) * c;
    }
  }
  return ext;
}

double GptObjective::loss(const Vector& c) const {
  check(c);
  double total = 0.0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const LossTerm& term = terms_[k];
    total += accumulate_term(term, term.residual(combine(k, c), term.points));
  }
  return total;
}

double GptObjective::loss_and_grad(const Vector& c, Vector& grad) const {
  check(c);
  const PrecomputedBasis& basis = model_.basis();
  grad = Vector::Zero(c.size());
  double total = 0.0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const LossTerm& term = terms_[k];
    const ResidualBatch res = term.residual(combine(k, c), term.points);
    total += accumulate_term(term, res);
    const Vector dr = 2.0 * term.scale * res.r;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (res.partial[ch].size() == 0) continue;
      if (!(basis.channels(k) & kChannelBit[ch])) {
        throw Error("unsupported derivative order");
      }
      grad.noalias() +=
          basis.matrix(k, ch).transpose() * dr.cwiseProduct(res.partial[ch]);
    }
  }
  return total;
}

double gpt_loss(const Vector& c, const GptModel& model,
                const ParameterPoint& mu) {
  return GptObjective(model, mu).loss(c);
}

Vector gpt_grad(const Vector& c, const GptModel& model,
                const ParameterPoint& mu) {
  Vector g;
  GptObjective(model, mu).loss_and_grad(c, g);
  return g;
}

OnlineResult online_train(const Vector& c0, const GptModel& model,
                          const ParameterPoint& mu,
                          const OnlineConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const GptObjective objective(model, mu);
  OnlineResult out;
  out.c = c0;
  Vector grad;
  std::optional<AdamState> adam;
  if (config.optimizer == OnlineOptimizer::kAdam) adam.emplace(c0.size());
  double last_finite = std::numeric_limits<double>::quiet_NaN();
  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = objective.loss_and_grad(out.c, grad);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw OnlineDivergence(epoch, last_finite);
    }
    last_finite = loss;
    if (adam) {
      adam_step(*adam, out.c, grad, config.lr);
    } else {
      out.c -= config.lr * grad;
    }
    if (!out.c.allFinite()) throw OnlineDivergence(epoch + 1, last_finite);
    out.epochs = epoch + 1;
  }
  out.delta = objective.loss(out.c);
  if (!std::isfinite(out.delta)) {
    throw OnlineDivergence(config.epochs, last_finite);
  }
  out.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return out;
}

Vector init_coeffs(const ParameterPoint& mu, const GptModel& model) {
  const std::size_t n = model.size();
  if (n == 0) throw Error("model has no neurons");
  std::vector<double> dist(n);
  for (std::size_t j = 0; j < n; ++j) {
    dist[j] = distance(mu, model.networks()[j].mu);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
  if (dist[order[0]] == 0.0) {
    c(static_cast<Eigen::Index>(order[0])) = 1.0;
    return c;
  }
  const std::size_t d = mu.dim();
  const std::size_t cap = d >= 63 ? n : std::min<std::size_t>(n, std::size_t{1} << d);
  double total = 0.0;
  for (std::size_t k = 0; k < cap; ++k) {
    const double w = 1.0 / dist[order[k]];
    c(static_cast<Eigen::Index>(order[k])) = w;
    total += w;
  }
  return c / total;
}

Vector gpt_predict(const Vector& c, const GptModel& model,
                   const PointBatch& points) {
  if (static_cast<std::size_t>(c.size()) != model.size()) {
    throw Error("coefficient vector length does not match the model");
  }
  if (!points.x.allFinite() || !points.t.allFinite()) {
    throw Error("non-finite input");
  }
  Vector out = Vector::Zero(points.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Vector u = extended_forward(model.networks()[i].params, points, kValue).u();
    out += c(static_cast<Eigen::Index>(i)) * u;
  }
  return out;
}

ExtendedBatch GptProvider::evaluate(const PointBatch& points,
                                    Channels channels) const {
  ExtendedBatch out;
  for (std::size_t i = 0; i < model_.size(); ++i) {
    const ExtendedBatch e =
        extended_forward(model_.networks()[i].params, points, channels);
    const double ci = c_(static_cast<Eigen::Index>(i));
    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (e.fields[ch].size() == 0) continue;
      if (out.fields[ch].size() == 0) out.fields[ch] = Vector::Zero(points.size());
      out.fields[ch] += ci * e.fields[ch];
    }
  }
  if (out.fields[kU].size() == 0) out.fields[kU] = Vector::Zero(points.size());
  return out;
}

}  // namespace gptpinn
