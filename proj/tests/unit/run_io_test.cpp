#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "wortsense/error.hpp"
#include "wortsense/run_io.hpp"

namespace wortsense {
namespace {

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(12.0), "12");
  EXPECT_EQ(format_double(-2.5), "-2.5");
  for (double v : {1.0 / 3.0, 1048.582995951417, 6.02214076e23, 5e-324})
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
}

TEST(SamplesCsv, ExactHeaderAndRoundTrip) {
  const auto run = simulate_process(testing::short_config(50));
  std::stringstream ss;
  write_samples_csv(ss, run.samples);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "step,pressure_mbar,wort_temp_c,ambient_temp_c");
  EXPECT_EQ(ss.str().find('\r'), std::string::npos);
  const auto back = read_samples_csv(ss);
  ASSERT_EQ(back.size(), run.samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].step, run.samples[i].step);
    EXPECT_EQ(back[i].pressure_mbar, run.samples[i].pressure_mbar);
    EXPECT_EQ(back[i].wort_temp_c, run.samples[i].wort_temp_c);
    EXPECT_EQ(back[i].ambient_temp_c, run.samples[i].ambient_temp_c);
  }
}

TEST(SamplesCsv, RejectsWrongHeaderAndGaps) {
  std::istringstream wrong("step;pressure\n0;1\n");
  EXPECT_THROW(read_samples_csv(wrong), IoError);
  std::istringstream gap("step,pressure_mbar,wort_temp_c,ambient_temp_c\n0,1,2,3\n2,1,2,3\n");
  EXPECT_THROW(read_samples_csv(gap), IoError);
  std::istringstream junk("step,pressure_mbar,wort_temp_c,ambient_temp_c\n0,abc,2,3\n");
  EXPECT_THROW(read_samples_csv(junk), IoError);
}

TEST(ProbesCsv, RoundTrip) {
  const std::vector<ProbeEvent> probes{{0, ProbeKind::spindle, 12.01, 0.1},
                                       {30, ProbeKind::refractometer, 12.4, 0.0}};
  std::stringstream ss;
  write_probes_csv(ss, probes);
  EXPECT_EQ(ss.str(), "step,kind,value,removed_volume_l\n0,spindle,12.01,0.1\n30,refractometer,12.4,0\n");
  const auto back = read_probes_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].kind, ProbeKind::refractometer);
  EXPECT_EQ(back[0].value, 12.01);
}

TEST(ConfigJson, RoundTripAndUnknownKeys) {
  auto config = testing::short_config();
  config.initial_headspace_mbar = 7.25;
  config.noise_sd.pressure_mbar = 0.2;
  const auto back = config_from_json(config_to_json(config));
  EXPECT_EQ(config_to_json(back), config_to_json(config));
  EXPECT_EQ(back.probe_schedule.size(), config.probe_schedule.size());

  auto doc = config_to_json(config);
  doc["fil_height_m"] = 0.5;
  EXPECT_THROW(config_from_json(doc), ValidationError);
  EXPECT_THROW(config_from_json(nlohmann::json::array()), ValidationError);

  // missing keys keep defaults
  const auto partial = config_from_json({{"initial_plato", 10.0}});
  EXPECT_EQ(partial.initial_plato, 10.0);
  EXPECT_EQ(partial.fill_height_m, ProcessConfig{}.fill_height_m);
}

TEST(RunFiles, SaveLoadRoundTrip) {
  testing::TempDir dir("runio");
  auto run = simulate_process(testing::short_config(2000, 9));
  run.id = "run_007";
  save_run(dir.path(), run);
  for (const char* suffix : {".samples.csv", ".probes.csv", ".truth.csv", ".config.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / ("run_007" + std::string(suffix)))) << suffix;
  const auto back = load_run(dir.path(), "run_007");
  EXPECT_EQ(back.true_plato, run.true_plato);
  EXPECT_EQ(back.headspace_mbar, run.headspace_mbar);
  EXPECT_EQ(back.fill_height_m, run.fill_height_m);
  EXPECT_EQ(back.initial_pressure_mbar, run.initial_pressure_mbar);
  EXPECT_EQ(back.initial_plato, run.initial_plato);
  EXPECT_EQ(back.probes.size(), run.probes.size());
  EXPECT_THROW(load_run(dir.path(), "run_404"), IoError);
}

TEST(Manifest, RoundTripWithoutTimestamp) {
  testing::TempDir dir("manifest");
  Manifest m;
  m.seed = 3;
  m.runs = {{"run_000", 8.0, 17, 10000}, {"run_001", 10.0, 18, 10000}};
  save_manifest(dir.path(), m);
  const auto back = load_manifest(dir.path());
  EXPECT_EQ(back.seed, 3u);
  ASSERT_EQ(back.runs.size(), 2u);
  EXPECT_EQ(back.runs[1].id, "run_001");
  EXPECT_EQ(back.runs[1].initial_plato, 10.0);
  std::ifstream in(dir / kManifestFile);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(text.find("time"), std::string::npos);
  EXPECT_THROW(load_manifest(dir / "missing"), IoError);
}

}  // namespace
}  // namespace wortsense
