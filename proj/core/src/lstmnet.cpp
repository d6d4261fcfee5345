#include "wortsense/lstmnet.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "lstm_kernels.hpp"
#include "random.hpp"
#include "wortsense/error.hpp"

namespace wortsense {

void ModelConfig::validate() const {
  if (windowsize < 1 || features < 1 || lstm_dim < 1)
    throw ValidationError("model config: windowsize, features and lstm_dim must be >= 1");
  for (auto d : dense_dims) {
    if (d < 1) throw ValidationError("model config: dense layer widths must be >= 1");
  }
  // The loss is defined on a scalar density prediction.
  if (output_dim != 1) throw ValidationError("model config: output_dim must be 1");
}

ParamCounts parameter_counts(const ModelConfig& config) {
  ParamCounts counts;
  const auto d = config.lstm_dim;
  counts.lstm = 4 * d * (config.features + d + 1);
  std::size_t in = d;
  for (auto width : config.dense_dims) {
    counts.dense.push_back(in * width + width);
    in = width;
  }
  counts.dense.push_back(in * config.output_dim + config.output_dim);
  counts.total = counts.lstm;
  for (auto c : counts.dense) counts.total += c;
  return counts;
}

ModelParams::ModelParams(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    blocks_.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  const auto d = config_.lstm_dim;
  add("lstm.W", 4 * d, config_.features);
  add("lstm.U", 4 * d, d);
  add("lstm.b", 4 * d, 1);
  std::size_t in = d;
  std::vector<std::size_t> widths = config_.dense_dims;
  widths.push_back(config_.output_dim);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const bool output = l + 1 == widths.size();
    const std::string prefix = output ? "output" : "dense" + std::to_string(l + 1);
    add(prefix + ".W", widths[l], in);
    add(prefix + ".b", widths[l], 1);
    in = widths[l];
  }
  values_.assign(offset, 0.0);

  const auto counts = parameter_counts(config_);
  std::size_t lstm = blocks_[0].size() + blocks_[1].size() + blocks_[2].size();
  if (lstm != counts.lstm || values_.size() != counts.total)
    throw std::logic_error("parameter layout disagrees with closed-form counts");
  for (std::size_t l = 0; l < counts.dense.size(); ++l) {
    if (blocks_[3 + 2 * l].size() + blocks_[4 + 2 * l].size() != counts.dense[l])
      throw std::logic_error("dense layer layout disagrees with closed-form counts");
  }
}

ModelParams ModelParams::initialized(const ModelConfig& config, std::uint64_t seed) {
  ModelParams params(config);
  detail::Rng rng(seed);
  for (std::size_t i = 0; i < params.blocks_.size(); ++i) {
    const auto& b = params.blocks_[i];
    if (b.cols == 1) continue;  // biases
    const double scale = 1.0 / std::sqrt(static_cast<double>(b.cols));
    for (auto& w : params.block(i)) w = rng.uniform(-scale, scale);
  }
  auto bias = params.block(2);
  const auto d = config.lstm_dim;
  std::fill(bias.begin() + static_cast<std::ptrdiff_t>(d),
            bias.begin() + static_cast<std::ptrdiff_t>(2 * d), 1.0);
  return params;
}

std::span<double> ModelParams::block(std::size_t index) {
  const auto& b = blocks_.at(index);
  return {values_.data() + b.offset, b.size()};
}

std::span<const double> ModelParams::block(std::size_t index) const {
  const auto& b = blocks_.at(index);
  return {values_.data() + b.offset, b.size()};
}

DenseView ModelParams::dense_layer(std::size_t layer) const {
  if (layer >= dense_layer_count()) throw std::out_of_range("dense layer index");
  const auto& w = blocks_[3 + 2 * layer];
  return {block(3 + 2 * layer), block(4 + 2 * layer), w.cols, w.rows};
}

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ModelParams::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

namespace {

void check_window(const ModelParams& params, const FeatureMatrix& window) {
  const auto& cfg = params.config();
  if (window.rows() != cfg.windowsize || window.cols() != cfg.features) {
    throw ValidationError("window shape " + std::to_string(window.rows()) + "x" +
                          std::to_string(window.cols()) + " does not match model " +
                          std::to_string(cfg.windowsize) + "x" + std::to_string(cfg.features));
  }
}

}  // namespace

ForwardResult forward(const ModelParams& params, const FeatureMatrix& window) {
  check_window(params, window);
  for (double v : window.values()) {
    if (!std::isfinite(v)) throw ValidationError("forward: non-finite input value");
  }
  ForwardResult result;
  result.prediction = detail::forward_into(params, window, result.cache);
  return result;
}

void backward(const ModelParams& params, const FeatureMatrix& window, const ForwardCache& cache,
              double output_grad, ModelParams& grads) {
  check_window(params, window);
  if (!(grads.config() == params.config()))
    throw ValidationError("backward: gradient buffer shape differs from params");
  detail::BackwardScratch scratch;
  detail::backward_into(params, window, cache, output_grad, grads, scratch);
}

LossAndGrads loss_and_grads(const ModelParams& params, std::span<const DataFrameWindow> windows) {
  std::vector<std::size_t> indices(windows.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  return loss_and_grads(params, windows, indices, 1);
}

LossAndGrads loss_and_grads(const ModelParams& params, std::span<const DataFrameWindow> windows,
                            std::span<const std::size_t> indices, std::size_t threads) {
  if (indices.empty()) throw ValidationError("loss_and_grads: empty batch");
  for (auto i : indices) {
    if (i >= windows.size()) throw ValidationError("loss_and_grads: window index out of range");
    check_window(params, windows[i].features);
  }
  detail::GradientAccumulator acc(params.config());
  LossAndGrads out{0.0, ModelParams(params.config())};
  out.mse = acc.accumulate(params, windows, indices, threads, out.grads);
  return out;
}

double mean_squared_error(const ModelParams& params, std::span<const DataFrameWindow> windows) {
  if (windows.empty()) throw ValidationError("mean_squared_error: no windows");
  ForwardCache cache;
  double sum = 0.0;
  for (const auto& w : windows) {
    check_window(params, w.features);
    const double e = detail::forward_into(params, w.features, cache) - w.target;
    sum += e * e;
  }
  return sum / static_cast<double>(windows.size());
}

std::vector<SeriesPoint> predict_series(const ModelParams& params,
                                        std::span<const DataFrameWindow> windows) {
  std::vector<SeriesPoint> series;
  series.reserve(windows.size());
  ForwardCache cache;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (i > 0) {
      if (w.source_run != windows[0].source_run)
        throw ValidationError("predict_series: windows come from more than one run");
      if (w.start_step <= windows[i - 1].start_step)
        throw ValidationError("predict_series: windows are not in increasing step order");
    }
    check_window(params, w.features);
    series.push_back({w.start_step, w.last_step(), detail::forward_into(params, w.features, cache)});
  }
  return series;
}

}  // namespace wortsense
