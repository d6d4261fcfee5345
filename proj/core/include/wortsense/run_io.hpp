#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wortsense/simkit.hpp"

namespace wortsense {

nlohmann::json config_to_json(const ProcessConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ProcessConfig config_from_json(const nlohmann::json& doc);

ProcessConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ProcessConfig& config);

// `step,pressure_mbar,wort_temp_c,ambient_temp_c`
void write_samples_csv(std::ostream& out, const std::vector<SensorSample>& samples);
std::vector<SensorSample> read_samples_csv(std::istream& in);

// `step,kind,value,removed_volume_l`
void write_probes_csv(std::ostream& out, const std::vector<ProbeEvent>& probes);
std::vector<ProbeEvent> read_probes_csv(std::istream& in);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// One entry of a campaign manifest.
struct ManifestEntry {
  std::string id;
  double initial_plato = 0.0;
  std::uint64_t seed = 0;
  std::int64_t duration_steps = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> runs;
};

inline constexpr const char* kManifestFile = "manifest.json";

/// Writes `<id>.samples.csv`, `<id>.probes.csv`, `<id>.truth.csv` and
/// `<id>.config.json` into `dir`.
void save_run(const std::filesystem::path& dir, const ProcessRun& run);
ProcessRun load_run(const std::filesystem::path& dir, const std::string& id);

void save_manifest(const std::filesystem::path& dir, const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& dir);

}  // namespace wortsense
