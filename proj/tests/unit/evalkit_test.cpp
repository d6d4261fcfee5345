#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "wortsense/error.hpp"
#include "wortsense/evalkit.hpp"

namespace wortsense {
namespace {

TargetCurve curve(std::vector<double> values) { return TargetCurve{std::move(values)}; }

TEST(AbsoluteErrorCurve, PerfectPrediction) {
  const auto target = curve({12.0, 11.0, 10.0, 9.0});
  const std::vector<PredictedPoint> pred{{1, 11.0}, {2, 10.0}, {3, 9.0}};
  const auto r = absolute_error_curve(pred, target);
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_EQ(r.max_error, 0.0);
  EXPECT_EQ(r.within_0_6, 1.0);
  EXPECT_EQ(r.within_0_3, 1.0);
  EXPECT_FALSE(r.exceeds_5);
}

TEST(AbsoluteErrorCurve, ConstantOffset) {
  const auto target = curve({12.0, 11.0, 10.0});
  const std::vector<PredictedPoint> pred{{0, 12.5}, {1, 11.5}, {2, 10.5}};
  const auto r = absolute_error_curve(pred, target);
  for (double e : r.abs_error) EXPECT_DOUBLE_EQ(e, 0.5);
  EXPECT_EQ(r.within_0_6, 1.0);
  EXPECT_EQ(r.within_0_3, 0.0);
}

TEST(AbsoluteErrorCurve, ThreePointToyCase) {
  const auto target = curve({12.2, 11.5, 9.0});
  const std::vector<PredictedPoint> pred{{0, 12.0}, {1, 11.0}, {2, 10.0}};
  const auto r = absolute_error_curve(pred, target);
  ASSERT_EQ(r.abs_error.size(), 3u);
  EXPECT_NEAR(r.abs_error[0], 0.2, 1e-12);
  EXPECT_NEAR(r.abs_error[1], 0.5, 1e-12);
  EXPECT_NEAR(r.abs_error[2], 1.0, 1e-12);
  EXPECT_NEAR(r.mae, 0.5666666666666667, 1e-12);
  EXPECT_NEAR(r.max_error, 1.0, 1e-12);
  EXPECT_NEAR(r.within_0_6, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.within_0_3, 1.0 / 3.0, 1e-12);
  EXPECT_LE(r.mae, r.max_error);
}

TEST(AbsoluteErrorCurve, FlagsLargeErrors) {
  const auto target = curve({16.0, 15.0});
  const std::vector<PredictedPoint> pred{{0, 10.5}, {1, 14.0}};
  EXPECT_TRUE(absolute_error_curve(pred, target).exceeds_5);
}

TEST(AbsoluteErrorCurve, StatisticsRecomputableFromSeries) {
  const auto run = simulate_process(testing::short_config(2000, 3));
  const auto target = fuse_target(run);
  std::vector<PredictedPoint> pred;
  for (std::int64_t s = 99; s < 2000; s += 7) pred.push_back({s, run.true_plato[s] + 0.4 * std::sin(s * 0.01)});
  const auto r = absolute_error_curve(pred, target);
  double sum = 0.0, max = 0.0;
  std::size_t w6 = 0, w3 = 0;
  for (std::size_t i = 0; i < r.abs_error.size(); ++i) {
    EXPECT_EQ(r.abs_error[i], std::abs(r.predicted[i] - r.target[i]));
    EXPECT_EQ(r.target[i], target.plato[r.steps[i]]);
    sum += r.abs_error[i];
    max = std::max(max, r.abs_error[i]);
    w6 += r.abs_error[i] <= 0.6;
    w3 += r.abs_error[i] <= 0.3;
  }
  const double n = static_cast<double>(r.abs_error.size());
  EXPECT_NEAR(r.mae, sum / n, 1e-12);
  EXPECT_EQ(r.max_error, max);
  EXPECT_DOUBLE_EQ(r.within_0_6, w6 / n);
  EXPECT_DOUBLE_EQ(r.within_0_3, w3 / n);
  EXPECT_DOUBLE_EQ(r.fraction_within(0.3), r.within_0_3);
}

TEST(AbsoluteErrorCurve, RejectsMisalignment) {
  const auto target = curve({1.0, 2.0});
  const std::vector<PredictedPoint> outside{{2, 1.0}};
  EXPECT_THROW(absolute_error_curve(outside, target), ValidationError);
  const std::vector<PredictedPoint> unordered{{1, 1.0}, {0, 1.0}};
  EXPECT_THROW(absolute_error_curve(unordered, target), ValidationError);
}

TEST(AlignToLastStep, UsesWindowEnd) {
  const std::vector<SeriesPoint> series{{0, 99, 1.0}, {7, 106, 2.0}};
  const auto points = align_to_last_step(series);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].step, 99);
  EXPECT_EQ(points[1].step, 106);
  EXPECT_EQ(points[1].plato, 2.0);
}

TEST(HydrostaticBaseline, Examples) {
  // water over a 10 cm gap: 980.665 Pa = 9.80665 mbar
  EXPECT_NEAR(hydrostatic_density_baseline(109.80665, 100.0, 0.10), 0.0, 1e-9);
  // 12 °P wort, 1048.583 kg/m^3: 10.283086437246963 mbar over 10 cm
  EXPECT_NEAR(hydrostatic_density_baseline(60.0 + 10.283086437246963, 60.0, 0.10), 12.0, 1e-9);
  EXPECT_THROW(hydrostatic_density_baseline(50.0, 50.0), ValidationError);
  EXPECT_THROW(hydrostatic_density_baseline(49.0, 50.0), ValidationError);
  EXPECT_THROW(hydrostatic_density_baseline(51.0, 50.0, 0.0), ValidationError);
}

TEST(HydrostaticBaseline, ClosedLoopThroughSimulator) {
  auto config = testing::short_config(10000, 12);
  config.initial_headspace_mbar = 10.0;
  const auto run = simulate_process(config);
  for (std::int64_t s = 0; s < run.duration(); ++s) {
    const auto p = two_sensor_pressures(run, s, kDefaultSensorGapM);
    ASSERT_NEAR(hydrostatic_density_baseline(p.low_mbar, p.high_mbar), run.true_plato[s], 1e-9)
        << "step " << s;
  }
}

ModelFile constant_model(double value) {
  ModelFile m;
  m.params = ModelParams(ModelConfig{});
  m.params.block(8)[0] = value;
  m.feature_names = feature_names(FeatureSet::base5);
  m.norm_stats = {std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)};
  m.metadata = {{"split", {{"train", {"run_a"}}}}};
  return m;
}

TEST(EvaluateSplit, ReportsAndAggregate) {
  std::vector<ProcessRun> runs;
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto run = simulate_process(testing::short_config(1000, s));
    run.id = "run_" + std::to_string(s);
    runs.push_back(std::move(run));
  }
  const auto model = constant_model(11.0);
  const auto eval = evaluate_split(model, runs, FramesConfig{}, "val", {});
  ASSERT_EQ(eval.reports.size(), 3u);
  double mae = 0.0;
  for (const auto& r : eval.reports) {
    EXPECT_EQ(r.split, "val");
    EXPECT_EQ(r.steps.size(), window_count(1000, 100, 7));
    EXPECT_EQ(r.steps.front(), 99);
    for (double p : r.predicted) ASSERT_EQ(p, 11.0);
    mae += r.mae;
  }
  EXPECT_NEAR(eval.aggregate.mae, mae / 3.0, 1e-12);
  EXPECT_EQ(eval.aggregate.runs, 3u);

  EXPECT_TRUE(evaluate_split(model, {}, FramesConfig{}, "test", {}).reports.empty());
}

TEST(EvaluateSplit, LeakageGuardForTestSplit) {
  auto run = simulate_process(testing::short_config(500, 1));
  run.id = "run_a";
  const std::vector<ProcessRun> runs{run};
  const auto model = constant_model(10.0);
  const auto training = training_ids_from_metadata(model.metadata);
  EXPECT_EQ(training, (std::set<std::string>{"run_a"}));
  EXPECT_THROW(evaluate_split(model, runs, FramesConfig{}, "test", training), ValidationError);
  EXPECT_NO_THROW(evaluate_split(model, runs, FramesConfig{}, "train", training));
}

TEST(EvaluateSplit, RejectsFeatureMismatch) {
  auto run = simulate_process(testing::short_config(500, 1));
  run.id = "x";
  const std::vector<ProcessRun> runs{run};
  FramesConfig ext;
  ext.feature_set = FeatureSet::extended7;
  EXPECT_THROW(evaluate_split(constant_model(1.0), runs, ext, "val", {}), ValidationError);
}

TEST(ReportOutput, JsonAndCsv) {
  const auto target = curve({12.2, 11.5, 9.0});
  const std::vector<PredictedPoint> pred{{0, 12.0}, {1, 11.0}, {2, 10.0}};
  auto r = absolute_error_curve(pred, target);
  r.run_id = "run_9";
  r.split = "test";
  const auto doc = report_to_json(r);
  EXPECT_EQ(doc.at("run_id"), "run_9");
  EXPECT_NEAR(doc.at("mae").get<double>(), 0.5666666666666667, 1e-12);
  std::ostringstream csv;
  write_error_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "step,predicted_plato,target_plato,abs_error");
}

}  // namespace
}  // namespace wortsense
