#include "wortsense/run_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "csv.hpp"
#include "wortsense/error.hpp"

namespace wortsense {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  std::array<char, 32> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return std::string(buffer.data(), ptr);
}

json config_to_json(const ProcessConfig& c) {
  json schedule = json::array();
  for (const auto& p : c.probe_schedule)
    schedule.push_back({{"step", p.step}, {"kind", std::string(to_string(p.kind))}});
  return json{
      {"initial_plato", c.initial_plato},
      {"final_plato", c.final_plato},
      {"volume_l", c.volume_l},
      {"fill_height_m", c.fill_height_m},
      {"duration_steps", c.duration_steps},
      {"lag_steps", c.lag_steps},
      {"rate_k", c.rate_k},
      {"ambient_mean_c", c.ambient_mean_c},
      {"ambient_amp_c", c.ambient_amp_c},
      {"wort_initial_c", c.wort_initial_c},
      {"airlock_cap_mbar", c.airlock_cap_mbar},
      {"initial_headspace_mbar", c.initial_headspace_mbar},
      {"co2_gain_mbar_per_plato", c.co2_gain_mbar_per_plato},
      {"headspace_leak_steps", c.headspace_leak_steps},
      {"thermal_tau_steps", c.thermal_tau_steps},
      {"rate_temp_coeff", c.rate_temp_coeff},
      {"spindle_volume_l", c.spindle_volume_l},
      {"brix_factor", c.brix_factor},
      {"probe_schedule", schedule},
      {"noise_sd",
       {{"pressure_mbar", c.noise_sd.pressure_mbar},
        {"wort_temp_c", c.noise_sd.wort_temp_c},
        {"ambient_temp_c", c.noise_sd.ambient_temp_c},
        {"spindle_plato", c.noise_sd.spindle_plato},
        {"refractometer_brix", c.noise_sd.refractometer_brix}}},
      {"rng_seed", c.rng_seed},
  };
}

namespace {

template <typename T>
void read_field(const json& doc, const char* key, T& target) {
  if (auto it = doc.find(key); it != doc.end()) {
    try {
      target = it->get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string("config field '") + key + "': " + e.what());
    }
  }
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const char* where) {
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key))
      throw ValidationError(std::string("unknown key '") + key + "' in " + where);
  }
}

}  // namespace

ProcessConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("process config must be a JSON object");
  reject_unknown(doc,
                 {"initial_plato", "final_plato", "volume_l", "fill_height_m", "duration_steps",
                  "lag_steps", "rate_k", "ambient_mean_c", "ambient_amp_c", "wort_initial_c",
                  "airlock_cap_mbar", "initial_headspace_mbar", "co2_gain_mbar_per_plato",
                  "headspace_leak_steps", "thermal_tau_steps", "rate_temp_coeff",
                  "spindle_volume_l", "brix_factor", "probe_schedule", "noise_sd", "rng_seed"},
                 "process config");
  ProcessConfig c;
  read_field(doc, "initial_plato", c.initial_plato);
  read_field(doc, "final_plato", c.final_plato);
  read_field(doc, "volume_l", c.volume_l);
  read_field(doc, "fill_height_m", c.fill_height_m);
  read_field(doc, "duration_steps", c.duration_steps);
  read_field(doc, "lag_steps", c.lag_steps);
  read_field(doc, "rate_k", c.rate_k);
  read_field(doc, "ambient_mean_c", c.ambient_mean_c);
  read_field(doc, "ambient_amp_c", c.ambient_amp_c);
  read_field(doc, "wort_initial_c", c.wort_initial_c);
  read_field(doc, "airlock_cap_mbar", c.airlock_cap_mbar);
  read_field(doc, "initial_headspace_mbar", c.initial_headspace_mbar);
  read_field(doc, "co2_gain_mbar_per_plato", c.co2_gain_mbar_per_plato);
  read_field(doc, "headspace_leak_steps", c.headspace_leak_steps);
  read_field(doc, "thermal_tau_steps", c.thermal_tau_steps);
  read_field(doc, "rate_temp_coeff", c.rate_temp_coeff);
  read_field(doc, "spindle_volume_l", c.spindle_volume_l);
  read_field(doc, "brix_factor", c.brix_factor);
  read_field(doc, "rng_seed", c.rng_seed);
  if (auto it = doc.find("noise_sd"); it != doc.end()) {
    if (!it->is_object()) throw ValidationError("noise_sd must be an object");
    reject_unknown(*it,
                   {"pressure_mbar", "wort_temp_c", "ambient_temp_c", "spindle_plato",
                    "refractometer_brix"},
                   "noise_sd");
    read_field(*it, "pressure_mbar", c.noise_sd.pressure_mbar);
    read_field(*it, "wort_temp_c", c.noise_sd.wort_temp_c);
    read_field(*it, "ambient_temp_c", c.noise_sd.ambient_temp_c);
    read_field(*it, "spindle_plato", c.noise_sd.spindle_plato);
    read_field(*it, "refractometer_brix", c.noise_sd.refractometer_brix);
  }
  if (auto it = doc.find("probe_schedule"); it != doc.end()) {
    if (!it->is_array()) throw ValidationError("probe_schedule must be an array");
    for (const auto& entry : *it) {
      ScheduledProbe probe;
      read_field(entry, "step", probe.step);
      std::string kind = "spindle";
      read_field(entry, "kind", kind);
      probe.kind = probe_kind_from_string(kind);
      c.probe_schedule.push_back(probe);
    }
  }
  return c;
}

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void expect_header(std::istream& in, std::string_view expected) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing CSV header, expected '" + std::string(expected) + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected)
    throw IoError("unexpected CSV header '" + line + "', expected '" + std::string(expected) + "'");
}

}  // namespace

ProcessConfig load_config(const fs::path& path) { return config_from_json(read_json_file(path)); }

void save_config(const fs::path& path, const ProcessConfig& config) {
  write_text_file(path, config_to_json(config).dump(2) + "\n");
}

void write_samples_csv(std::ostream& out, const std::vector<SensorSample>& samples) {
  out << "step,pressure_mbar,wort_temp_c,ambient_temp_c\n";
  for (const auto& s : samples) {
    out << s.step << ',' << format_double(s.pressure_mbar) << ',' << format_double(s.wort_temp_c)
        << ',' << format_double(s.ambient_temp_c) << '\n';
  }
}

std::vector<SensorSample> read_samples_csv(std::istream& in) {
  expect_header(in, "step,pressure_mbar,wort_temp_c,ambient_temp_c");
  std::vector<SensorSample> samples;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 4) throw IoError("line " + std::to_string(line_no) + ": expected 4 cells");
    SensorSample s;
    s.step = detail::parse_int(cells[0], line_no);
    s.pressure_mbar = detail::parse_double(cells[1], line_no);
    s.wort_temp_c = detail::parse_double(cells[2], line_no);
    s.ambient_temp_c = detail::parse_double(cells[3], line_no);
    if (s.step != static_cast<std::int64_t>(samples.size()))
      throw IoError("line " + std::to_string(line_no) + ": step does not match row position");
    samples.push_back(s);
  }
  return samples;
}

void write_probes_csv(std::ostream& out, const std::vector<ProbeEvent>& probes) {
  out << "step,kind,value,removed_volume_l\n";
  for (const auto& p : probes) {
    out << p.step << ',' << to_string(p.kind) << ',' << format_double(p.value) << ','
        << format_double(p.removed_volume_l) << '\n';
  }
}

std::vector<ProbeEvent> read_probes_csv(std::istream& in) {
  expect_header(in, "step,kind,value,removed_volume_l");
  std::vector<ProbeEvent> probes;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 4) throw IoError("line " + std::to_string(line_no) + ": expected 4 cells");
    ProbeEvent p;
    p.step = detail::parse_int(cells[0], line_no);
    p.kind = probe_kind_from_string(cells[1]);
    p.value = detail::parse_double(cells[2], line_no);
    p.removed_volume_l = detail::parse_double(cells[3], line_no);
    probes.push_back(p);
  }
  return probes;
}

void save_run(const fs::path& dir, const ProcessRun& run) {
  if (run.id.empty()) throw ValidationError("save_run: run id must not be empty");
  {
    std::ofstream out(dir / (run.id + ".samples.csv"), std::ios::binary);
    if (!out) throw IoError("cannot write samples for " + run.id + " in " + dir.string());
    write_samples_csv(out, run.samples);
  }
  {
    std::ofstream out(dir / (run.id + ".probes.csv"), std::ios::binary);
    if (!out) throw IoError("cannot write probes for " + run.id + " in " + dir.string());
    write_probes_csv(out, run.probes);
  }
  {
    std::ofstream out(dir / (run.id + ".truth.csv"), std::ios::binary);
    if (!out) throw IoError("cannot write truth for " + run.id + " in " + dir.string());
    out << "step,true_plato,headspace_mbar,fill_height_m\n";
    for (std::size_t i = 0; i < run.true_plato.size(); ++i) {
      out << i << ',' << format_double(run.true_plato[i]) << ','
          << format_double(run.headspace_mbar[i]) << ',' << format_double(run.fill_height_m[i])
          << '\n';
    }
  }
  save_config(dir / (run.id + ".config.json"), run.config);
}

ProcessRun load_run(const fs::path& dir, const std::string& id) {
  ProcessRun run;
  run.id = id;
  run.config = load_config(dir / (id + ".config.json"));
  try {
    auto samples = open_input(dir / (id + ".samples.csv"));
    run.samples = read_samples_csv(samples);
    auto probes = open_input(dir / (id + ".probes.csv"));
    run.probes = read_probes_csv(probes);

    auto truth = open_input(dir / (id + ".truth.csv"));
    expect_header(truth, "step,true_plato,headspace_mbar,fill_height_m");
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(truth, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto cells = detail::split_csv_line(line);
      if (cells.size() != 4) throw IoError("line " + std::to_string(line_no) + ": expected 4 cells");
      run.true_plato.push_back(detail::parse_double(cells[1], line_no));
      run.headspace_mbar.push_back(detail::parse_double(cells[2], line_no));
      run.fill_height_m.push_back(detail::parse_double(cells[3], line_no));
    }
  } catch (const IoError& e) {
    throw IoError("run " + id + ": " + e.what());
  }
  if (run.true_plato.size() != run.samples.size())
    throw IoError("run " + id + ": truth and samples differ in length");
  if (static_cast<std::int64_t>(run.samples.size()) != run.config.duration_steps)
    throw IoError("run " + id + ": sample count does not match duration_steps");
  run.initial_pressure_mbar = run.samples.empty() ? 0.0 : run.samples.front().pressure_mbar;
  run.initial_plato = run.config.initial_plato;
  return run;
}

void save_manifest(const fs::path& dir, const Manifest& manifest) {
  json runs = json::array();
  for (const auto& e : manifest.runs) {
    runs.push_back({{"id", e.id},
                    {"initial_plato", e.initial_plato},
                    {"seed", e.seed},
                    {"duration_steps", e.duration_steps}});
  }
  json doc{{"version", 1}, {"seed", manifest.seed}, {"runs", runs}};
  write_text_file(dir / kManifestFile, doc.dump(2) + "\n");
}

Manifest load_manifest(const fs::path& dir) {
  const auto doc = read_json_file(dir / kManifestFile);
  Manifest manifest;
  try {
    if (doc.at("version").get<int>() != 1) throw IoError("unsupported manifest version");
    manifest.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& r : doc.at("runs")) {
      manifest.runs.push_back({r.at("id").get<std::string>(), r.at("initial_plato").get<double>(),
                               r.at("seed").get<std::uint64_t>(),
                               r.at("duration_steps").get<std::int64_t>()});
    }
  } catch (const json::exception& e) {
    throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
  }
  return manifest;
}

}  // namespace wortsense
