#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wortsense/curves.hpp"
#include "wortsense/simkit.hpp"

namespace wortsense {

/// base5 = pressure, steps, ambient temp, wort temp, spindle probe count.
/// extended7 appends the run's initial pressure and initial Plato.
enum class FeatureSet { base5, extended7 };

std::size_t feature_count(FeatureSet set);
std::vector<std::string> feature_names(FeatureSet set);
std::string_view to_string(FeatureSet set);
FeatureSet feature_set_from_string(std::string_view text);

/// Which target value a window is labelled with. `last_step` keeps the
/// prediction causal; `window_mean` averages the target over the window.
enum class TargetAlignment { last_step, window_mean };

std::string_view to_string(TargetAlignment alignment);
TargetAlignment target_alignment_from_string(std::string_view text);

/// Row-major rows x cols matrix of doubles.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct DataFrameWindow {
  FeatureMatrix features;  // windowsize x F
  double target = 0.0;     // °Plato, never normalized
  std::string source_run;
  std::int64_t start_step = 0;

  std::int64_t last_step() const {
    return start_step + static_cast<std::int64_t>(features.rows()) - 1;
  }
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> sd;

  std::size_t size() const { return mean.size(); }
  /// FNV-1a over the raw bytes of mean and sd.
  std::uint64_t checksum() const;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

struct WindowBatch {
  std::vector<DataFrameWindow> windows;
  NormStats norm_stats;
};

struct FramesConfig {
  std::int64_t windowsize = 100;
  std::int64_t overlap = 7;
  FeatureSet feature_set = FeatureSet::base5;
  TargetAlignment alignment = TargetAlignment::last_step;
};

inline constexpr double kNormSdFloor = 1e-8;

/// floor((duration - windowsize) / overlap) + 1, or 0 if the run is shorter
/// than one window.
std::size_t window_count(std::int64_t duration, std::int64_t windowsize, std::int64_t overlap);

std::vector<DataFrameWindow> build_windows(const ProcessRun& run, const TargetCurve& target,
                                           std::int64_t windowsize, std::int64_t overlap,
                                           FeatureSet feature_set,
                                           TargetAlignment alignment = TargetAlignment::last_step);

/// Fuses the run's target curve and windows it.
std::vector<DataFrameWindow> build_windows(const ProcessRun& run, const FramesConfig& config);

NormStats fit_normalizer(std::span<const DataFrameWindow> windows);

WindowBatch apply_normalizer(std::vector<DataFrameWindow> windows, const NormStats& stats);

struct RunSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

/// Shuffles whole runs with `seed` and cuts the order into train/val/test.
RunSplit split_runs(std::span<const std::string> run_ids, std::size_t train_n, std::size_t val_n,
                    std::size_t test_n, std::uint64_t seed);
RunSplit split_runs(std::span<const ProcessRun> runs, std::size_t train_n, std::size_t val_n,
                    std::size_t test_n, std::uint64_t seed);

}  // namespace wortsense
