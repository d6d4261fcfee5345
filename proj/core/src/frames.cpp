#include "wortsense/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "random.hpp"
#include "wortsense/error.hpp"

namespace wortsense {

std::size_t feature_count(FeatureSet set) { return set == FeatureSet::base5 ? 5 : 7; }

std::vector<std::string> feature_names(FeatureSet set) {
  std::vector<std::string> names{"pressure_mbar", "steps", "ambient_temp_c", "wort_temp_c",
                                 "spindle_probe_count"};
  if (set == FeatureSet::extended7) {
    names.emplace_back("initial_pressure_mbar");
    names.emplace_back("initial_plato");
  }
  return names;
}

std::string_view to_string(FeatureSet set) {
  return set == FeatureSet::base5 ? "base5" : "extended7";
}

FeatureSet feature_set_from_string(std::string_view text) {
  if (text == "base5") return FeatureSet::base5;
  if (text == "extended7") return FeatureSet::extended7;
  throw ValidationError("unknown feature set '" + std::string(text) + "' (base5|extended7)");
}

std::string_view to_string(TargetAlignment alignment) {
  return alignment == TargetAlignment::last_step ? "last_step" : "window_mean";
}

TargetAlignment target_alignment_from_string(std::string_view text) {
  if (text == "last_step") return TargetAlignment::last_step;
  if (text == "window_mean") return TargetAlignment::window_mean;
  throw ValidationError("unknown target alignment '" + std::string(text) + "'");
}

std::uint64_t NormStats::checksum() const {
  std::uint64_t hash = 14695981039346656037ull;
  auto mix = [&hash](const std::vector<double>& values) {
    for (double v : values) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 1099511628211ull;
      }
    }
  };
  mix(mean);
  mix(sd);
  return hash;
}

std::size_t window_count(std::int64_t duration, std::int64_t windowsize, std::int64_t overlap) {
  if (windowsize < 1 || overlap < 1)
    throw ValidationError("window_count: windowsize and overlap must be >= 1");
  if (duration < windowsize) return 0;
  return static_cast<std::size_t>((duration - windowsize) / overlap) + 1;
}

std::vector<DataFrameWindow> build_windows(const ProcessRun& run, const TargetCurve& target,
                                           std::int64_t windowsize, std::int64_t overlap,
                                           FeatureSet feature_set, TargetAlignment alignment) {
  if (windowsize < 1) throw ValidationError("build_windows: windowsize must be >= 1");
  if (overlap < 1) throw ValidationError("build_windows: overlap must be >= 1");
  const auto duration = run.duration();
  if (duration < windowsize) {
    throw ValidationError("build_windows: run '" + run.id + "' has " + std::to_string(duration) +
                          " steps, fewer than windowsize " + std::to_string(windowsize));
  }
  if (target.duration() != duration)
    throw ValidationError("build_windows: target curve length differs from run duration");

  const auto probe_count = probe_step_function(run.probes, duration, ProbeKind::spindle);
  const auto cols = feature_count(feature_set);
  const auto rows = static_cast<std::size_t>(windowsize);

  std::vector<DataFrameWindow> windows;
  windows.reserve(window_count(duration, windowsize, overlap));
  for (std::int64_t start = 0; start + windowsize <= duration; start += overlap) {
    DataFrameWindow w;
    w.features = FeatureMatrix(rows, cols);
    w.source_run = run.id;
    w.start_step = start;
    double target_sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto s = static_cast<std::size_t>(start) + r;
      const auto& sample = run.samples[s];
      auto row = w.features.row(r);
      row[0] = sample.pressure_mbar;
      row[1] = static_cast<double>(sample.step);
      row[2] = sample.ambient_temp_c;
      row[3] = sample.wort_temp_c;
      row[4] = static_cast<double>(probe_count.count[s]);
      if (feature_set == FeatureSet::extended7) {
        row[5] = run.initial_pressure_mbar;
        row[6] = run.initial_plato;
      }
      target_sum += target.plato[s];
    }
    w.target = alignment == TargetAlignment::last_step
                   ? target.plato[static_cast<std::size_t>(w.last_step())]
                   : target_sum / static_cast<double>(rows);
    for (double v : w.features.values()) {
      if (!std::isfinite(v))
        throw ValidationError("build_windows: non-finite feature in run '" + run.id + "'");
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<DataFrameWindow> build_windows(const ProcessRun& run, const FramesConfig& config) {
  return build_windows(run, fuse_target(run), config.windowsize, config.overlap,
                       config.feature_set, config.alignment);
}

NormStats fit_normalizer(std::span<const DataFrameWindow> windows) {
  if (windows.empty()) throw ValidationError("fit_normalizer: no training windows");
  const auto cols = windows.front().features.cols();
  std::vector<double> sum(cols, 0.0);
  std::size_t n = 0;
  for (const auto& w : windows) {
    if (w.features.cols() != cols)
      throw ValidationError("fit_normalizer: windows disagree on feature count");
    for (std::size_t r = 0; r < w.features.rows(); ++r) {
      const auto row = w.features.row(r);
      for (std::size_t c = 0; c < cols; ++c) sum[c] += row[c];
    }
    n += w.features.rows();
  }

  NormStats stats;
  stats.mean.resize(cols);
  for (std::size_t c = 0; c < cols; ++c) stats.mean[c] = sum[c] / static_cast<double>(n);

  std::vector<double> sq(cols, 0.0);
  for (const auto& w : windows) {
    for (std::size_t r = 0; r < w.features.rows(); ++r) {
      const auto row = w.features.row(r);
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = row[c] - stats.mean[c];
        sq[c] += d * d;
      }
    }
  }
  stats.sd.resize(cols);
  for (std::size_t c = 0; c < cols; ++c)
    stats.sd[c] = std::max(std::sqrt(sq[c] / static_cast<double>(n)), kNormSdFloor);
  return stats;
}

WindowBatch apply_normalizer(std::vector<DataFrameWindow> windows, const NormStats& stats) {
  if (stats.mean.size() != stats.sd.size())
    throw ValidationError("apply_normalizer: mean and sd differ in length");
  for (double sd : stats.sd) {
    if (!(sd > 0.0)) throw ValidationError("apply_normalizer: sd must be > 0");
  }
  for (auto& w : windows) {
    if (w.features.cols() != stats.size()) {
      throw ValidationError("apply_normalizer: window has " + std::to_string(w.features.cols()) +
                            " features, stats have " + std::to_string(stats.size()));
    }
    for (std::size_t r = 0; r < w.features.rows(); ++r) {
      auto row = w.features.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - stats.mean[c]) / stats.sd[c];
    }
  }
  return {std::move(windows), stats};
}

RunSplit split_runs(std::span<const std::string> run_ids, std::size_t train_n, std::size_t val_n,
                    std::size_t test_n, std::uint64_t seed) {
  if (train_n + val_n + test_n != run_ids.size()) {
    throw ValidationError("split_runs: split " + std::to_string(train_n) + "+" +
                          std::to_string(val_n) + "+" + std::to_string(test_n) +
                          " does not sum to " + std::to_string(run_ids.size()) + " runs");
  }
  std::set<std::string> unique(run_ids.begin(), run_ids.end());
  if (unique.size() != run_ids.size()) throw ValidationError("split_runs: duplicate run ids");

  std::vector<std::string> order(run_ids.begin(), run_ids.end());
  detail::Rng rng(seed);
  rng.shuffle(order);

  RunSplit split;
  const auto first = order.begin();
  const auto train_end = first + static_cast<std::ptrdiff_t>(train_n);
  const auto val_end = train_end + static_cast<std::ptrdiff_t>(val_n);
  split.train.assign(first, train_end);
  split.val.assign(train_end, val_end);
  split.test.assign(val_end, order.end());
  return split;
}

RunSplit split_runs(std::span<const ProcessRun> runs, std::size_t train_n, std::size_t val_n,
                    std::size_t test_n, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(runs.size());
  for (const auto& r : runs) ids.push_back(r.id);
  return split_runs(ids, train_n, val_n, test_n, seed);
}

}  // namespace wortsense
