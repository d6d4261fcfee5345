#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "wortsense/frames.hpp"

namespace wortsense {

inline constexpr int kFramesFormatVersion = 1;

/// Normalized train/val/test windows sharing one set of training statistics.
struct FramesFile {
  FramesConfig config;
  RunSplit split;
  WindowBatch train;
  WindowBatch val;
  WindowBatch test;

  std::size_t window_count() const {
    return train.windows.size() + val.windows.size() + test.windows.size();
  }
};

/// JSON header (version, windowsize, F, feature names, norm_stats, window
/// counts per run) followed by, per window in train/val/test order:
/// start_step, target, then windowsize x F features, all little-endian f64.
void save_frames(const std::filesystem::path& path, const FramesFile& frames);
FramesFile load_frames(const std::filesystem::path& path);

/// First `max_windows` windows of each partition as long-format CSV.
void write_frames_sample_csv(std::ostream& out, const FramesFile& frames,
                             std::size_t max_windows = 2);

}  // namespace wortsense
