#include "wortsense/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wortsense/error.hpp"
#include "wortsense/run_io.hpp"
#include "wortsense/simkit.hpp"

namespace wortsense {

double ErrorReport::fraction_within(double threshold) const {
  if (abs_error.empty()) return 1.0;
  const auto n = std::count_if(abs_error.begin(), abs_error.end(),
                               [threshold](double e) { return e <= threshold; });
  return static_cast<double>(n) / static_cast<double>(abs_error.size());
}

ErrorReport absolute_error_curve(std::span<const PredictedPoint> predicted,
                                 const TargetCurve& target) {
  ErrorReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& p = predicted[i];
    if (p.step < 0 || p.step >= target.duration()) {
      throw ValidationError("absolute_error_curve: prediction at step " + std::to_string(p.step) +
                            " outside target [0, " + std::to_string(target.duration()) + ")");
    }
    if (i > 0 && p.step <= predicted[i - 1].step)
      throw ValidationError("absolute_error_curve: prediction steps must be strictly increasing");
    if (!std::isfinite(p.plato)) throw NumericalError("absolute_error_curve: non-finite prediction");
    const double t = target.plato[static_cast<std::size_t>(p.step)];
    const double e = std::abs(p.plato - t);
    report.steps.push_back(p.step);
    report.predicted.push_back(p.plato);
    report.target.push_back(t);
    report.abs_error.push_back(e);
    sum += e;
    report.max_error = std::max(report.max_error, e);
  }
  if (!predicted.empty()) report.mae = sum / static_cast<double>(predicted.size());
  report.within_0_6 = report.fraction_within(kAcceptableErrorPlato);
  report.within_0_3 = report.fraction_within(kGoodErrorPlato);
  report.exceeds_5 = report.max_error > kFailureErrorPlato;
  return report;
}

std::vector<PredictedPoint> align_to_last_step(std::span<const SeriesPoint> series) {
  std::vector<PredictedPoint> points;
  points.reserve(series.size());
  for (const auto& s : series) points.push_back({s.last_step, s.prediction});
  return points;
}

double hydrostatic_density_baseline(double p_low_mbar, double p_high_mbar, double gap_m) {
  if (!(gap_m > 0.0)) throw ValidationError("hydrostatic baseline: sensor gap must be > 0");
  if (!(p_high_mbar >= 0.0)) throw ValidationError("hydrostatic baseline: pressures must be >= 0");
  const double dp = p_low_mbar - p_high_mbar;
  if (!(dp > 0.0)) {
    throw ValidationError(
        "hydrostatic baseline: nonpositive pressure differential (sensor fault or uncovered "
        "upper sensor)");
  }
  const double density = dp * 100.0 / (kGravity * gap_m);
  return density_to_plato(density);
}

SplitEvaluation evaluate_split(const ModelFile& model, std::span<const ProcessRun> runs,
                               const FramesConfig& frames, const std::string& split,
                               const std::set<std::string>& training_ids) {
  if (split == "test") {
    for (const auto& run : runs) {
      if (training_ids.contains(run.id))
        throw ValidationError("evaluate_split: test run '" + run.id +
                              "' was used for training (leakage)");
    }
  }
  const auto& cfg = model.params.config();
  if (feature_count(frames.feature_set) != cfg.features)
    throw ValidationError("evaluate_split: frames feature set does not match the model");
  if (static_cast<std::size_t>(frames.windowsize) != cfg.windowsize)
    throw ValidationError("evaluate_split: frames windowsize does not match the model");

  SplitEvaluation eval;
  eval.split = split;
  for (const auto& run : runs) {
    const auto target = fuse_target(run);
    auto windows = build_windows(run, target, frames.windowsize, frames.overlap,
                                 frames.feature_set, frames.alignment);
    const auto batch = apply_normalizer(std::move(windows), model.norm_stats);
    const auto series = predict_series(model.params, batch.windows);
    const auto points = align_to_last_step(series);
    auto report = absolute_error_curve(points, target);
    report.run_id = run.id;
    report.split = split;
    eval.reports.push_back(std::move(report));
  }

  auto& agg = eval.aggregate;
  agg.runs = eval.reports.size();
  for (const auto& r : eval.reports) {
    agg.mae += r.mae;
    agg.within_0_6 += r.within_0_6;
    agg.within_0_3 += r.within_0_3;
    agg.max_error = std::max(agg.max_error, r.max_error);
  }
  if (agg.runs > 0) {
    const auto n = static_cast<double>(agg.runs);
    agg.mae /= n;
    agg.within_0_6 /= n;
    agg.within_0_3 /= n;
  }
  return eval;
}

std::set<std::string> training_ids_from_metadata(const nlohmann::json& metadata) {
  std::set<std::string> ids;
  if (auto split = metadata.find("split"); split != metadata.end()) {
    if (auto train = split->find("train"); train != split->end()) {
      for (const auto& id : *train) ids.insert(id.get<std::string>());
    }
  }
  return ids;
}

nlohmann::json report_to_json(const ErrorReport& r) {
  return {{"run_id", r.run_id},
          {"split", r.split},
          {"predicted_steps", r.steps.size()},
          {"first_predicted_step", r.steps.empty() ? -1 : r.steps.front()},
          {"mae", r.mae},
          {"max_error", r.max_error},
          {"within_0_6", r.within_0_6},
          {"within_0_3", r.within_0_3},
          {"exceeds_5", r.exceeds_5}};
}

nlohmann::json aggregate_to_json(const SplitAggregate& a) {
  return {{"runs", a.runs},
          {"mae", a.mae},
          {"max_error", a.max_error},
          {"within_0_6", a.within_0_6},
          {"within_0_3", a.within_0_3}};
}

void write_error_csv(std::ostream& out, const ErrorReport& r) {
  out << "step,predicted_plato,target_plato,abs_error\n";
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    out << r.steps[i] << ',' << format_double(r.predicted[i]) << ',' << format_double(r.target[i])
        << ',' << format_double(r.abs_error[i]) << '\n';
  }
}

}  // namespace wortsense
