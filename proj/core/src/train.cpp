#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lstm_kernels.hpp"
#include "random.hpp"
#include "wortsense/error.hpp"
#include "wortsense/lstmnet.hpp"

namespace wortsense {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train config: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0)
    throw ValidationError("train config: learning_rate must be finite and >= 0");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) ||
      !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0))
    throw ValidationError("train config: Adam betas must lie in [0, 1)");
  if (!(optimizer.epsilon > 0.0)) throw ValidationError("train config: epsilon must be > 0");
}

namespace {

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, double learning_rate, std::size_t size)
      : config_(config), lr_(learning_rate), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads) {
    ++t_;
    if (config_.kind == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grads[i];
      return;
    }
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      m_[i] = b1 * m_[i] + (1.0 - b1) * g;
      v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
      const double m_hat = m_[i] / c1;
      const double v_hat = v_[i] / c2;
      params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }

 private:
  OptimizerConfig config_;
  double lr_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

[[noreturn]] void numerical_failure(const char* what, std::size_t epoch, std::size_t batch) {
  std::ostringstream os;
  os << "non-finite " << what << " at epoch " << epoch << ", batch " << batch;
  throw NumericalError(os.str());
}

void check_batch_shapes(const ModelParams& params, const WindowBatch& batch, const char* label) {
  const auto& cfg = params.config();
  if (batch.norm_stats.size() != 0 && batch.norm_stats.size() != cfg.features)
    throw ValidationError(std::string(label) + " norm_stats do not match the model's feature count");
  for (const auto& w : batch.windows) {
    if (w.features.rows() != cfg.windowsize || w.features.cols() != cfg.features)
      throw ValidationError(std::string(label) + " window shape does not match the model");
    if (!std::isfinite(w.target))
      throw ValidationError(std::string(label) + " window has a non-finite target");
  }
}

}  // namespace

TrainResult train(ModelParams params, const WindowBatch& train_batch,
                  const WindowBatch& val_batch, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_batch.windows.empty()) throw ValidationError("train: no training windows");
  if (!val_batch.windows.empty() && !(train_batch.norm_stats == val_batch.norm_stats))
    throw ValidationError("train: training and validation windows use different norm_stats");
  if (!params.all_finite()) throw ValidationError("train: initial parameters are not finite");
  check_batch_shapes(params, train_batch, "training");
  check_batch_shapes(params, val_batch, "validation");

  const auto& windows = train_batch.windows;
  const std::size_t n = windows.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  detail::Rng rng(config.shuffle_seed);
  detail::GradientAccumulator accumulator(params.config());
  ModelParams grads(params.config());
  Optimizer optimizer(config.optimizer, config.learning_rate, params.size());

  TrainResult result;
  result.params = params;
  result.best_val_mse = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++batch_index) {
      const std::size_t len = std::min(config.batch_size, n - begin);
      const std::span<const std::size_t> idx(order.data() + begin, len);
      const double loss = accumulator.accumulate(params, windows, idx, config.threads, grads);
      if (!std::isfinite(loss)) numerical_failure("training loss", epoch, batch_index);
      if (!all_finite(grads.values())) numerical_failure("gradient", epoch, batch_index);
      loss_sum += loss * static_cast<double>(len);
      optimizer.step(params.values(), grads.values());
      if (!params.all_finite()) numerical_failure("parameter update", epoch, batch_index);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_mse = loss_sum / static_cast<double>(n);
    record.val_mse = val_batch.windows.empty() ? record.train_mse
                                               : mean_squared_error(params, val_batch.windows);
    if (!std::isfinite(record.val_mse)) numerical_failure("validation loss", epoch, batch_index);
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.val_mse < result.best_val_mse) {
      result.best_val_mse = record.val_mse;
      result.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace wortsense
