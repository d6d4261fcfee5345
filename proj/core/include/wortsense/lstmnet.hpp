#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wortsense/frames.hpp"

namespace wortsense {

/// Single LSTM layer returning its final hidden state, followed by ReLU
/// dense layers and one linear output unit.
struct ModelConfig {
  std::size_t windowsize = 100;
  std::size_t features = 5;
  std::size_t lstm_dim = 4;
  std::vector<std::size_t> dense_dims{128, 64};
  std::size_t output_dim = 1;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ParamCounts {
  std::size_t lstm = 0;
  std::vector<std::size_t> dense;  // hidden layers, then the output layer
  std::size_t total = 0;
};

ParamCounts parameter_counts(const ModelConfig& config);

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;  // 1 for bias vectors

  std::size_t size() const { return rows * cols; }
};

/// Read-only view of one dense layer; weights are out x in, row-major.
struct DenseView {
  std::span<const double> weights;
  std::span<const double> bias;
  std::size_t in = 0;
  std::size_t out = 0;
};

/// All trainable weights in one contiguous buffer. Also used for gradients.
///
/// LSTM gate rows are ordered input, forget, candidate, output; each gate
/// owns `lstm_dim` consecutive rows of W (4d x F), U (4d x d) and b (4d).
class ModelParams {
 public:
  ModelParams() = default;
  /// Zero-filled parameters for `config`.
  explicit ModelParams(ModelConfig config);

  /// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases except
  /// the forget gate which starts at +1.
  static ModelParams initialized(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> block(std::size_t index);
  std::span<const double> block(std::size_t index) const;

  std::span<const double> lstm_input_weights() const { return block(0); }
  std::span<const double> lstm_recurrent_weights() const { return block(1); }
  std::span<const double> lstm_bias() const { return block(2); }
  std::size_t dense_layer_count() const { return config_.dense_dims.size() + 1; }
  DenseView dense_layer(std::size_t layer) const;

  bool all_finite() const;
  void set_zero();

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.config_ == b.config_ && a.values_ == b.values_;
  }

 private:
  ModelConfig config_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> values_;
};

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardCache {
  std::vector<double> gates;       // T x 4d, post-activation
  std::vector<double> cells;       // (T+1) x d, row 0 is the zero initial state
  std::vector<double> cell_tanh;   // T x d
  std::vector<double> hidden;      // (T+1) x d
  std::vector<std::vector<double>> activations;  // per dense layer, post-activation
};

struct ForwardResult {
  double prediction = 0.0;
  ForwardCache cache;
};

ForwardResult forward(const ModelParams& params, const FeatureMatrix& window);

/// Adds d(prediction)/d(params) * `output_grad` into `grads`.
void backward(const ModelParams& params, const FeatureMatrix& window, const ForwardCache& cache,
              double output_grad, ModelParams& grads);

struct LossAndGrads {
  double mse = 0.0;
  ModelParams grads;
};

/// Mean squared error over the windows and its exact gradient.
LossAndGrads loss_and_grads(const ModelParams& params, std::span<const DataFrameWindow> windows);
LossAndGrads loss_and_grads(const ModelParams& params, std::span<const DataFrameWindow> windows,
                            std::span<const std::size_t> indices, std::size_t threads = 1);

double mean_squared_error(const ModelParams& params, std::span<const DataFrameWindow> windows);

enum class OptimizerKind { adam, sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  OptimizerConfig optimizer;
  std::uint64_t shuffle_seed = 0;
  std::size_t patience = 10;  // epochs without validation improvement; 0 disables
  std::size_t threads = 1;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  ModelParams params;  // best validation loss
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch training on MSE. Deterministic for a fixed shuffle_seed and any
/// thread count. Without validation windows the epoch training loss selects
/// the returned parameters.
TrainResult train(ModelParams params, const WindowBatch& train_batch,
                  const WindowBatch& val_batch, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

struct SeriesPoint {
  std::int64_t start_step = 0;
  std::int64_t last_step = 0;
  double prediction = 0.0;
};

/// One prediction per window of a single run, in step order.
std::vector<SeriesPoint> predict_series(const ModelParams& params,
                                        std::span<const DataFrameWindow> windows);

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to apply a trained model to new runs.
struct ModelFile {
  ModelParams params;
  std::vector<std::string> feature_names;
  NormStats norm_stats;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& doc);

/// JSON header (version, config, feature names, norm stats, metadata, block
/// table) followed by every parameter block as little-endian f64.
void save_params(const std::filesystem::path& path, const ModelFile& model);

/// Rejects version or shape mismatches. When `expected_features` is given a
/// model trained on a different feature count is rejected as well.
ModelFile load_params(const std::filesystem::path& path,
                      std::optional<std::size_t> expected_features = std::nullopt);

}  // namespace wortsense
