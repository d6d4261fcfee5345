#pragma once

#include <span>
#include <vector>

#include "wortsense/lstmnet.hpp"

namespace wortsense::detail {

/// Forward pass without shape checks; reuses the cache's storage.
double forward_into(const ModelParams& params, const FeatureMatrix& window, ForwardCache& cache);

struct BackwardScratch {
  std::vector<double> delta;
  std::vector<double> delta_prev;
  std::vector<double> dh;
  std::vector<double> dh_prev;
  std::vector<double> dc;
  std::vector<double> dz;
};

void backward_into(const ModelParams& params, const FeatureMatrix& window,
                   const ForwardCache& cache, double output_grad, ModelParams& grads,
                   BackwardScratch& scratch);

/// Batch MSE gradient with a fixed partition of the batch into chunks, each
/// summed sequentially and combined in chunk order. Results do not depend on
/// the number of threads.
class GradientAccumulator {
 public:
  static constexpr std::size_t kChunks = 8;

  explicit GradientAccumulator(const ModelConfig& config);

  /// Writes the mean gradient into `grads` and returns the batch MSE.
  double accumulate(const ModelParams& params, std::span<const DataFrameWindow> windows,
                    std::span<const std::size_t> indices, std::size_t threads,
                    ModelParams& grads);

 private:
  struct Chunk {
    ModelParams grads;
    ForwardCache cache;
    BackwardScratch scratch;
    double sse = 0.0;
  };
  std::vector<Chunk> chunks_;
};

}  // namespace wortsense::detail
