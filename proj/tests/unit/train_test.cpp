#include <gtest/gtest.h>

#include <random>

#include "wortsense/error.hpp"
#include "wortsense/lstmnet.hpp"

namespace wortsense {
namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.windowsize = 10;
  c.features = 5;
  return c;
}

// target = 1.5 * pressure value in the last row
WindowBatch synthetic_batch(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  WindowBatch batch;
  batch.norm_stats = {std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)};
  for (std::size_t i = 0; i < count; ++i) {
    DataFrameWindow w;
    w.features = FeatureMatrix(10, 5);
    for (auto& v : w.features.values()) v = normal(gen);
    w.target = 1.5 * w.features(9, 0);
    w.source_run = "synthetic";
    w.start_step = static_cast<std::int64_t>(i);
    batch.windows.push_back(std::move(w));
  }
  return batch;
}

TEST(Train, ZeroLearningRateLeavesParamsUnchanged) {
  const auto init = ModelParams::initialized(small_config(), 0);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  const auto result = train(init, synthetic_batch(100, 1), synthetic_batch(20, 2), cfg);
  EXPECT_EQ(result.params, init);
  ASSERT_EQ(result.history.size(), 1u);
}

TEST(Train, LossDecreasesOnLearnableTask) {
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.patience = 0;
  const auto result = train(ModelParams::initialized(small_config(), 0), synthetic_batch(512, 1),
                            synthetic_batch(64, 2), cfg);
  ASSERT_EQ(result.history.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e)
    EXPECT_LT(result.history[e].train_mse, result.history[e - 1].train_mse) << "epoch " << e + 1;
}

TEST(Train, DeterministicForFixedSeedAndAnyThreadCount) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.shuffle_seed = 9;
  const auto train_batch = synthetic_batch(200, 3);
  const auto val_batch = synthetic_batch(40, 4);
  const auto init = ModelParams::initialized(small_config(), 5);
  const auto a = train(init, train_batch, val_batch, cfg);
  cfg.threads = 3;
  const auto b = train(init, train_batch, val_batch, cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_mse, b.history[i].train_mse);
    EXPECT_EQ(a.history[i].val_mse, b.history[i].val_mse);
  }
  EXPECT_EQ(a.params, b.params);
}

TEST(Train, ReturnsBestValidationParamsAndStopsEarly) {
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.patience = 2;
  cfg.learning_rate = 0.05;
  const auto result = train(ModelParams::initialized(small_config(), 0), synthetic_batch(128, 1),
                            synthetic_batch(32, 2), cfg);
  double best = 1e300;
  std::size_t best_epoch = 0;
  for (const auto& e : result.history) {
    if (e.val_mse < best) {
      best = e.val_mse;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(result.best_epoch, best_epoch);
  EXPECT_EQ(result.best_val_mse, best);
  const auto val = synthetic_batch(32, 2);
  EXPECT_EQ(mean_squared_error(result.params, val.windows), best);
  if (result.early_stopped) EXPECT_EQ(result.history.size(), best_epoch + 2);
}

TEST(Train, RejectsMismatchedNormStats) {
  auto val = synthetic_batch(10, 2);
  val.norm_stats.mean[0] = 0.5;
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train(ModelParams::initialized(small_config(), 0), synthetic_batch(10, 1), val, cfg),
               ValidationError);
}

TEST(Train, RejectsInvalidConfig) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Train, NonFiniteUpdateRaisesNumericalErrorWithContext) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.optimizer.kind = OptimizerKind::sgd;
  cfg.learning_rate = 1e306;
  try {
    train(ModelParams::initialized(small_config(), 0), synthetic_batch(128, 1), synthetic_batch(8, 2),
          cfg);
    FAIL() << "expected a numerical failure";
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("epoch 1"), std::string::npos) << what;
    EXPECT_NE(what.find("batch"), std::string::npos) << what;
  }
}

TEST(Train, SgdStepMovesAgainstGradient) {
  const auto init = ModelParams::initialized(small_config(), 0);
  const auto batch = synthetic_batch(16, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.01;
  cfg.optimizer.kind = OptimizerKind::sgd;
  const auto grads = loss_and_grads(init, batch.windows).grads;
  const auto result = train(init, batch, WindowBatch{}, cfg);
  for (std::size_t i = 0; i < init.size(); ++i)
    ASSERT_NEAR(result.params.values()[i], init.values()[i] - 0.01 * grads.values()[i], 1e-15);
}

}  // namespace
}  // namespace wortsense
