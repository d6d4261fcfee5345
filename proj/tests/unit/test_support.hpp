#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "wortsense/simkit.hpp"

namespace wortsense::testing {

/// Fresh empty directory below the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("wortsense-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// A short run with spindle and daily refractometer probes.
inline ProcessConfig short_config(std::int64_t duration = 3000, std::uint64_t seed = 5) {
  ProcessConfig config;
  config.duration_steps = duration;
  config.probe_schedule = default_probe_schedule(duration, seed);
  config.rng_seed = seed;
  return config;
}

}  // namespace wortsense::testing
