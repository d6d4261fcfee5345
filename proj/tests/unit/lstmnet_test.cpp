#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wortsense/error.hpp"
#include "wortsense/lstmnet.hpp"

namespace wortsense {
namespace {

FeatureMatrix random_window(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix m(rows, cols);
  for (auto& v : m.values()) v = normal(gen);
  return m;
}

DataFrameWindow window_of(FeatureMatrix features, double target) {
  DataFrameWindow w;
  w.features = std::move(features);
  w.target = target;
  return w;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.windowsize = 5;
  c.features = 3;
  c.lstm_dim = 2;
  c.dense_dims = {4, 3};
  return c;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Reference evaluation written directly from the LSTM equations, one time
// step at a time, reading weights through the block table only.
double reference_forward(const ModelParams& p, const FeatureMatrix& x) {
  const auto& cfg = p.config();
  const std::size_t d = cfg.lstm_dim, f = cfg.features;
  const auto W = p.lstm_input_weights();
  const auto U = p.lstm_recurrent_weights();
  const auto b = p.lstm_bias();
  std::vector<double> h(d, 0.0), c(d, 0.0);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    std::vector<double> z(4 * d);
    for (std::size_t r = 0; r < 4 * d; ++r) {
      double acc = b[r];
      for (std::size_t k = 0; k < f; ++k) acc += W[r * f + k] * x(t, k);
      for (std::size_t k = 0; k < d; ++k) acc += U[r * d + k] * h[k];
      z[r] = acc;
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double i = sigmoid(z[j]);
      const double fg = sigmoid(z[d + j]);
      const double g = std::tanh(z[2 * d + j]);
      const double o = sigmoid(z[3 * d + j]);
      c[j] = fg * c[j] + i * g;
      h[j] = o * std::tanh(c[j]);
    }
  }
  std::vector<double> a = h;
  for (std::size_t l = 0; l < p.dense_layer_count(); ++l) {
    const auto layer = p.dense_layer(l);
    std::vector<double> next(layer.out);
    for (std::size_t r = 0; r < layer.out; ++r) {
      double acc = layer.bias[r];
      for (std::size_t k = 0; k < layer.in; ++k) acc += layer.weights[r * layer.in + k] * a[k];
      next[r] = l + 1 == p.dense_layer_count() ? acc : std::max(0.0, acc);
    }
    a = std::move(next);
  }
  return a.at(0);
}

TEST(ParameterCounts, DefaultArchitecture) {
  const auto counts = parameter_counts(ModelConfig{});
  EXPECT_EQ(counts.lstm, 160u);
  ASSERT_EQ(counts.dense.size(), 3u);
  EXPECT_EQ(counts.dense[0], 640u);
  EXPECT_EQ(counts.dense[1], 8256u);
  EXPECT_EQ(counts.dense[2], 65u);
  EXPECT_EQ(counts.total, 160u + 640u + 8256u + 65u);
  EXPECT_EQ(ModelParams(ModelConfig{}).size(), counts.total);

  ModelConfig ext;
  ext.features = 7;
  EXPECT_EQ(parameter_counts(ext).lstm, 4u * 4u * (7u + 4u + 1u));
}

TEST(ModelParams, BlockLayout) {
  const ModelParams p(ModelConfig{});
  const std::vector<std::string> names{"lstm.W", "lstm.U", "lstm.b", "dense1.W", "dense1.b",
                                       "dense2.W", "dense2.b", "output.W", "output.b"};
  ASSERT_EQ(p.blocks().size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(p.blocks()[i].name, names[i]);
  EXPECT_EQ(p.blocks()[0].rows, 16u);
  EXPECT_EQ(p.blocks()[0].cols, 5u);
  EXPECT_EQ(p.blocks()[5].rows, 64u);
  EXPECT_EQ(p.blocks()[5].cols, 128u);
}

TEST(ModelParams, RejectsInvalidConfig) {
  ModelConfig c;
  c.lstm_dim = 0;
  EXPECT_THROW(ModelParams{c}, ValidationError);
  c = ModelConfig{};
  c.output_dim = 2;
  EXPECT_THROW(ModelParams{c}, ValidationError);
  c = ModelConfig{};
  c.dense_dims = {128, 0};
  EXPECT_THROW(ModelParams{c}, ValidationError);
}

TEST(ModelParams, InitializationBoundsAndForgetBias) {
  const auto p = ModelParams::initialized(ModelConfig{}, 0);
  for (std::size_t i = 0; i < p.blocks().size(); ++i) {
    const auto& b = p.blocks()[i];
    const auto values = p.block(i);
    if (b.cols == 1) continue;
    const double s = 1.0 / std::sqrt(static_cast<double>(b.cols));
    for (double v : values) {
      ASSERT_LE(std::abs(v), s) << b.name;
    }
  }
  const auto bias = p.lstm_bias();
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(bias[j], (j >= 4 && j < 8) ? 1.0 : 0.0) << j;
  EXPECT_EQ(ModelParams::initialized(ModelConfig{}, 0), p);
  EXPECT_FALSE(ModelParams::initialized(ModelConfig{}, 1) == p);
}

TEST(Forward, ZeroNetworkPredictsZero) {
  const ModelParams p(ModelConfig{});
  EXPECT_EQ(forward(p, random_window(100, 5, 1)).prediction, 0.0);
}

TEST(Forward, OutputBiasPassesThrough) {
  ModelParams p(ModelConfig{});
  p.block(8)[0] = 11.25;  // output.b
  EXPECT_EQ(forward(p, random_window(100, 5, 2)).prediction, 11.25);
}

TEST(Forward, MatchesStepByStepReference) {
  const auto p = ModelParams::initialized(ModelConfig{}, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = random_window(100, 5, seed);
    EXPECT_NEAR(forward(p, x).prediction, reference_forward(p, x), 1e-12);
  }
  const auto tiny = ModelParams::initialized(tiny_config(), 3);
  const auto x = random_window(5, 3, 9);
  EXPECT_NEAR(forward(tiny, x).prediction, reference_forward(tiny, x), 1e-12);
}

TEST(Forward, PureAndRepeatable) {
  const auto p = ModelParams::initialized(ModelConfig{}, 4);
  const auto copy = p;
  const auto x = random_window(100, 5, 4);
  const double first = forward(p, x).prediction;
  EXPECT_EQ(forward(p, x).prediction, first);
  EXPECT_EQ(p, copy);
}

TEST(Forward, RejectsBadInput) {
  const auto p = ModelParams::initialized(ModelConfig{}, 0);
  EXPECT_THROW(forward(p, random_window(99, 5, 0)), ValidationError);
  EXPECT_THROW(forward(p, random_window(100, 7, 0)), ValidationError);
  auto x = random_window(100, 5, 0);
  x(50, 2) = std::nan("");
  EXPECT_THROW(forward(p, x), ValidationError);
}

TEST(LossAndGrads, MatchesCentralFiniteDifferences) {
  auto p = ModelParams::initialized(tiny_config(), 11);
  // push dense pre-activations away from the ReLU kink
  for (std::size_t blk : {4u, 6u})
    for (auto& v : p.block(blk)) v = 0.3;
  const std::vector<DataFrameWindow> batch{window_of(random_window(5, 3, 1), 0.7),
                                           window_of(random_window(5, 3, 2), -0.4)};
  const auto analytic = loss_and_grads(p, batch);
  const double eps = 1e-5;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto plus = p, minus = p;
    plus.values()[i] += eps;
    minus.values()[i] -= eps;
    const double numeric =
        (mean_squared_error(plus, batch) - mean_squared_error(minus, batch)) / (2 * eps);
    const double a = analytic.grads.values()[i];
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
    EXPECT_LE(std::abs(a - numeric) / scale, 1e-5) << "param " << i << " analytic " << a
                                                   << " numeric " << numeric;
    ++checked;
  }
  // W 8x3, U 8x2, b 8, dense 4x2+4, dense 3x4+3, output 1x3+1
  EXPECT_EQ(checked, 79u);
}

TEST(LossAndGrads, ZeroAtExactFit) {
  ModelParams p(ModelConfig{});
  p.block(8)[0] = 9.5;
  const std::vector<DataFrameWindow> batch{window_of(random_window(100, 5, 1), 9.5),
                                           window_of(random_window(100, 5, 2), 9.5)};
  const auto r = loss_and_grads(p, batch);
  EXPECT_EQ(r.mse, 0.0);
  for (double g : r.grads.values()) ASSERT_EQ(g, 0.0);
}

TEST(LossAndGrads, MeanSemanticsAndThreadIndependence) {
  const auto p = ModelParams::initialized(ModelConfig{}, 2);
  std::vector<DataFrameWindow> batch;
  for (std::uint64_t s = 0; s < 20; ++s) batch.push_back(window_of(random_window(100, 5, s), 0.1 * s));
  const auto base = loss_and_grads(p, std::span(batch).first(1));
  const std::vector<DataFrameWindow> doubled{batch[0], batch[0]};
  EXPECT_NEAR(loss_and_grads(p, doubled).mse, base.mse, 1e-15);

  std::vector<std::size_t> idx(batch.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto one = loss_and_grads(p, batch, idx, 1);
  const auto four = loss_and_grads(p, batch, idx, 4);
  EXPECT_EQ(one.mse, four.mse);
  EXPECT_EQ(one.grads, four.grads);
  EXPECT_NEAR(one.mse, mean_squared_error(p, batch), 1e-12);

  EXPECT_THROW(loss_and_grads(p, std::span<const DataFrameWindow>{}), ValidationError);
}

TEST(PredictSeries, ConsistentWithForward) {
  const auto p = ModelParams::initialized(ModelConfig{}, 1);
  EXPECT_TRUE(predict_series(p, {}).empty());
  std::vector<DataFrameWindow> windows;
  for (std::int64_t i = 0; i < 3; ++i) {
    auto w = window_of(random_window(100, 5, i), 0.0);
    w.start_step = 7 * i;
    w.source_run = "r";
    windows.push_back(std::move(w));
  }
  const auto single = predict_series(p, std::span(windows).first(1));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].prediction, forward(p, windows[0].features).prediction);
  EXPECT_EQ(single[0].last_step, 99);

  const auto series = predict_series(p, windows);
  ASSERT_EQ(series.size(), 3u);
  EXPECT_EQ(series[2].start_step, 14);

  std::swap(windows[0], windows[1]);
  EXPECT_THROW(predict_series(p, windows), ValidationError);
  std::swap(windows[0], windows[1]);
  windows[2].source_run = "other";
  EXPECT_THROW(predict_series(p, windows), ValidationError);
}

}  // namespace
}  // namespace wortsense
