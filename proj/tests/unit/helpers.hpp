#pragma once

#include <cmath>
#include <random>

#include "gptpinn/collocation.hpp"
#include "gptpinn/full_pinn.hpp"
#include "gptpinn/gpt.hpp"
#include "gptpinn/mlp.hpp"
#include "gptpinn/pde.hpp"

namespace gptpinn::testing {

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Relative error of vectors in the max norm.
inline double rel_err(const Vector& a, const Vector& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return scale == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / scale;
}

// Glorot weights plus nonzero biases, so every code path is exercised.
inline MlpParams random_params(std::vector<int> dims, Activation act,
                               std::uint64_t seed) {
  MlpParams p = MlpParams::glorot(std::move(dims), act, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    auto b = p.bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = u(rng);
  }
  return p;
}

inline CollocationSet small_set(const PdeDefinition& pde, int n_int = 40,
                                int n_bd = 10, int n_ini = 10,
                                std::uint64_t seed = 3) {
  return sample_collocation(pde, {n_int, n_bd, n_ini},
                            SamplingStrategy::kUniformRandom, seed);
}

inline ParameterPoint random_mu(const ParameterDomain& d, std::mt19937_64& rng) {
  ParameterPoint mu;
  for (const auto& b : d.bounds()) {
    mu.values.push_back(std::uniform_real_distribution<double>(b.lo, b.hi)(rng));
  }
  return mu;
}

inline TrainConfig tiny_train(PdeFamily family, long epochs = 30) {
  TrainConfig c;
  c.dims = {2, 6, 6, 1};
  c.activation = family == PdeFamily::kKleinGordon ? Activation::kCos : Activation::kTanh;
  c.lr = 5e-3;
  c.epochs = epochs;
  return c;
}

// A model whose networks were trained briefly at the given parameters.
inline GptModel tiny_model(const PdeDefinition& pde,
                           const std::vector<ParameterPoint>& mus,
                           const CollocationSet& colloc, long epochs = 30,
                           FilterRule filter = FilterRule::kNone) {
  GptModel model(pde, colloc, filter, 0.8);
  std::uint64_t seed = 11;
  for (const auto& mu : mus) {
    model.add_network(
        train_full_pinn(pde, mu, colloc, tiny_train(pde.family(), epochs), seed++));
  }
  return model;
}

inline std::vector<ParameterPoint> corner_mus(const PdeDefinition& pde, int n) {
  std::mt19937_64 rng(1234);
  std::vector<ParameterPoint> out;
  for (int i = 0; i < n; ++i) out.push_back(random_mu(pde.domain(), rng));
  return out;
}

}  // namespace gptpinn::testing
