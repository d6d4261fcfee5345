#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wortsense/curves.hpp"
#include "wortsense/frames.hpp"
#include "wortsense/lstmnet.hpp"

namespace wortsense {

/// Error levels reported for every run, in °Plato.
inline constexpr double kGoodErrorPlato = 0.3;
inline constexpr double kAcceptableErrorPlato = 0.6;
inline constexpr double kFailureErrorPlato = 5.0;
inline constexpr double kDefaultSensorGapM = 0.10;

/// A prediction attributed to one step (the last step of its window).
struct PredictedPoint {
  std::int64_t step = 0;
  double plato = 0.0;
};

struct ErrorReport {
  std::string run_id;
  std::string split;
  std::vector<std::int64_t> steps;
  std::vector<double> predicted;
  std::vector<double> target;
  std::vector<double> abs_error;
  double mae = 0.0;
  double max_error = 0.0;
  double within_0_6 = 0.0;  // fraction of steps with error <= 0.6 °P
  double within_0_3 = 0.0;  // fraction of steps with error <= 0.3 °P
  bool exceeds_5 = false;   // any error above 5 °P

  /// Fraction of predicted steps with error <= threshold.
  double fraction_within(double threshold) const;
};

ErrorReport absolute_error_curve(std::span<const PredictedPoint> predicted,
                                 const TargetCurve& target);

/// Predictions from `predict_series` attributed to each window's last step.
std::vector<PredictedPoint> align_to_last_step(std::span<const SeriesPoint> series);

/// Density from two sensors `gap_m` apart, as °Plato. Rejects a nonpositive
/// differential, which indicates a sensor fault or an uncovered upper sensor.
double hydrostatic_density_baseline(double p_low_mbar, double p_high_mbar,
                                    double gap_m = kDefaultSensorGapM);

struct SplitAggregate {
  std::size_t runs = 0;
  double mae = 0.0;  // mean of per-run MAEs
  double max_error = 0.0;
  double within_0_6 = 0.0;  // mean of per-run fractions
  double within_0_3 = 0.0;
};

struct SplitEvaluation {
  std::string split;
  std::vector<ErrorReport> reports;
  SplitAggregate aggregate;
};

/// Normalizes each run with the model's stored statistics, predicts and
/// scores it against the fused target curve. For split "test" every run id
/// must be absent from `training_ids`.
SplitEvaluation evaluate_split(const ModelFile& model, std::span<const ProcessRun> runs,
                               const FramesConfig& frames, const std::string& split,
                               const std::set<std::string>& training_ids);

/// Training run ids recorded in a model's metadata.
std::set<std::string> training_ids_from_metadata(const nlohmann::json& metadata);

nlohmann::json report_to_json(const ErrorReport& report);
nlohmann::json aggregate_to_json(const SplitAggregate& aggregate);

// `step,predicted_plato,target_plato,abs_error`
void write_error_csv(std::ostream& out, const ErrorReport& report);

}  // namespace wortsense
