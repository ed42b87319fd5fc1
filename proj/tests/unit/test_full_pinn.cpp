#include <gtest/gtest.h>

#include "gptpinn/error.hpp"
#include "gptpinn/full_pinn.hpp"
#include "helpers.hpp"

using namespace gptpinn;
using gptpinn::testing::small_set;
using gptpinn::testing::tiny_train;

TEST(TrainFull, ZeroLearningRateKeepsInitialization) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kKleinGordon);
  const CollocationSet set = small_set(pde);
  TrainConfig c = tiny_train(pde.family(), 5);
  c.lr = 0.0;
  const FullPinn net = train_full_pinn(pde, {{-1.5, 0.5, 0.5}}, set, c, 3);
  const MlpParams init = MlpParams::glorot(c.dims, c.activation, 3);
  EXPECT_TRUE(net.params == init);
  MlpProvider prov(init);
  EXPECT_EQ(net.terminal_loss, pinn_loss(prov, pde, {{-1.5, 0.5, 0.5}}, set));
  EXPECT_EQ(net.loss_history.front(), net.terminal_loss);
}

TEST(TrainFull, LossDecreases) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kBurgers);
  const FullPinn net =
      train_full_pinn(pde, {{0.2}}, small_set(pde), tiny_train(pde.family(), 300), 1);
  EXPECT_EQ(net.epochs_run, 300);
  EXPECT_EQ(net.loss_history.size(), 300u);
  EXPECT_LT(net.terminal_loss, 0.5 * net.loss_history.front());
}

TEST(TrainFull, StopLossEndsEarly) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kBurgers);
  TrainConfig c = tiny_train(pde.family(), 400);
  const FullPinn ref = train_full_pinn(pde, {{0.2}}, small_set(pde), c, 1);
  // Stop at the first epoch whose loss falls below the loss seen at epoch 100.
  c.stop_loss = ref.loss_history[100];
  long first = 0;
  while (!(ref.loss_history[static_cast<std::size_t>(first)] < *c.stop_loss)) ++first;
  const FullPinn net = train_full_pinn(pde, {{0.2}}, small_set(pde), c, 1);
  EXPECT_EQ(net.epochs_run, first);
  EXPECT_EQ(net.loss_history.size(), static_cast<std::size_t>(first + 1));
  EXPECT_LT(net.loss_history.back(), *c.stop_loss);
  for (std::size_t e = 0; e + 1 < net.loss_history.size(); ++e) {
    EXPECT_GE(net.loss_history[e], *c.stop_loss);
  }
}

TEST(TrainFull, FullScaleBurgersStopLoss) {
  // The full-scale Burgers budget is bounded by 60000 epochs with the
  // 2e-5 stopping rule.
  TrainConfig c;
  c.epochs = 60000;
  c.stop_loss = 2e-5;
  EXPECT_NO_THROW(c.validate());
  EXPECT_LE(c.total_epochs(), 60000);
}

TEST(TrainFull, Deterministic) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kAllenCahn);
  const auto a = train_full_pinn(pde, {{0.0005, 2.0}}, small_set(pde), tiny_train(pde.family()), 9);
  const auto b = train_full_pinn(pde, {{0.0005, 2.0}}, small_set(pde), tiny_train(pde.family()), 9);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(TrainFull, RejectsBadConfig) {
  TrainConfig c;
  c.lr = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.epochs = -3;
  EXPECT_THROW(c.validate(), Error);
}

TEST(TrainFull, DivergenceIsReported) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kAllenCahn);
  TrainConfig c = tiny_train(pde.family(), 50);
  c.lr = 1e300;
  EXPECT_THROW(train_full_pinn(pde, {{0.0005, 5.0}}, small_set(pde), c, 2), TrainingDiverged);
}

TEST(TrainSa, DisabledIsPlainTraining) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kAllenCahn);
  TrainConfig c = tiny_train(pde.family(), 40);
  c.sa_enabled = false;
  const auto a = train_sa_pinn(pde, {{0.0005, 2.0}}, small_set(pde), c, 4);
  const auto b = train_full_pinn(pde, {{0.0005, 2.0}}, small_set(pde), c, 4);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.terminal_loss, b.terminal_loss);
}

TEST(TrainSa, ZeroMasksStartUnweighted) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kAllenCahn);
  TrainConfig c = tiny_train(pde.family(), 3);
  c.sa_enabled = true;
  c.sa_init = 0.0;
  const auto sa = train_sa_pinn(pde, {{0.0005, 2.0}}, small_set(pde), c, 4);
  const auto plain = train_full_pinn(pde, {{0.0005, 2.0}}, small_set(pde), c, 4);
  EXPECT_EQ(sa.loss_history.front(), plain.loss_history.front());
}

TEST(TrainSa, MasksWeightTheLoss) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kAllenCahn);
  TrainConfig c = tiny_train(pde.family(), 3);
  c.sa_enabled = true;
  c.sa_init = 1.0;
  const auto sa = train_sa_pinn(pde, {{0.0005, 2.0}}, small_set(pde), c, 4);
  const auto plain = train_full_pinn(pde, {{0.0005, 2.0}}, small_set(pde), c, 4);
  // Masks start at 1 + 1^2 = 2 on the interior and initial terms.
  EXPECT_GT(sa.loss_history.front(), plain.loss_history.front());
  EXPECT_LT(sa.loss_history.front(), 2.0 * plain.loss_history.front() * (1 + 1e-12));
}
