#include "wortsense/curves.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "wortsense/error.hpp"
#include "wortsense/run_io.hpp"

namespace wortsense {

namespace {

void check_increasing(std::span<const Reading> readings, const char* what) {
  for (std::size_t i = 1; i < readings.size(); ++i) {
    if (readings[i].step <= readings[i - 1].step)
      throw ValidationError(std::string(what) + ": reading steps must be strictly increasing");
  }
}

// Linear interpolation between knots, constant outside.
double piecewise_linear(std::span<const std::int64_t> steps, std::span<const double> values,
                        std::int64_t step) {
  if (step <= steps.front()) return values.front();
  if (step >= steps.back()) return values.back();
  const auto upper = std::upper_bound(steps.begin(), steps.end(), step);
  const auto hi = static_cast<std::size_t>(upper - steps.begin());
  const auto lo = hi - 1;
  if (steps[lo] == step) return values[lo];
  const double t = static_cast<double>(step - steps[lo]) / static_cast<double>(steps[hi] - steps[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

}  // namespace

double brix_to_plato(double brix, double factor) {
  if (!(brix >= 0.0)) throw ValidationError("brix_to_plato: brix must be >= 0");
  if (!(factor > 0.0)) throw ValidationError("brix_to_plato: correction factor must be > 0");
  return brix / factor;
}

TargetCurve interpolate_refractometer(std::span<const Reading> readings, std::int64_t duration) {
  if (readings.size() < 2) {
    throw ValidationError("interpolate_refractometer: need at least 2 readings, got " +
                          std::to_string(readings.size()));
  }
  if (duration < 0) throw ValidationError("interpolate_refractometer: negative duration");
  check_increasing(readings, "interpolate_refractometer");

  std::vector<std::int64_t> steps;
  std::vector<double> values;
  for (const auto& r : readings) {
    if (r.kind != ProbeKind::refractometer)
      throw ValidationError("interpolate_refractometer: all readings must be refractometer");
    if (!std::isfinite(r.value) || r.value < 0.0)
      throw ValidationError("interpolate_refractometer: readings must be finite and >= 0");
    steps.push_back(r.step);
    values.push_back(r.value);
  }

  TargetCurve curve;
  curve.plato.resize(static_cast<std::size_t>(duration));
  for (std::int64_t s = 0; s < duration; ++s)
    curve.plato[static_cast<std::size_t>(s)] = piecewise_linear(steps, values, s);
  return curve;
}

TargetCurve anchor_spindle(std::span<const Reading> spindle, const TargetCurve& refr_curve) {
  if (spindle.empty()) return refr_curve;
  check_increasing(spindle, "anchor_spindle");

  const auto duration = refr_curve.duration();
  std::vector<std::int64_t> steps;
  std::vector<double> offsets;
  for (const auto& r : spindle) {
    if (r.step < 0 || r.step >= duration) {
      throw ValidationError("anchor_spindle: spindle reading at step " + std::to_string(r.step) +
                            " outside [0, " + std::to_string(duration) + ")");
    }
    steps.push_back(r.step);
    offsets.push_back(r.value - refr_curve.plato[static_cast<std::size_t>(r.step)]);
  }

  TargetCurve out = refr_curve;
  for (std::int64_t s = 0; s < duration; ++s) {
    auto& v = out.plato[static_cast<std::size_t>(s)];
    v += piecewise_linear(steps, offsets, s);
  }
  // refr + (value - refr) need not round back to value; pin the anchors.
  for (const auto& r : spindle) out.plato[static_cast<std::size_t>(r.step)] = r.value;
  return out;
}

StepFunction probe_step_function(std::span<const ProbeEvent> events, std::int64_t duration,
                                 ProbeKind kind_filter) {
  if (duration < 0) throw ValidationError("probe_step_function: negative duration");
  StepFunction fn;
  fn.count.assign(static_cast<std::size_t>(duration), 0);

  std::int64_t previous = -1;
  std::vector<std::int64_t> event_steps;
  for (const auto& e : events) {
    if (e.kind != kind_filter) continue;
    if (e.step < 0 || e.step >= duration) {
      throw ValidationError("probe_step_function: event step " + std::to_string(e.step) +
                            " outside [0, " + std::to_string(duration) + ")");
    }
    if (e.step <= previous)
      throw ValidationError("probe_step_function: event steps must be strictly increasing");
    previous = e.step;
    event_steps.push_back(e.step);
  }

  std::int64_t running = 0;
  auto next = event_steps.begin();
  for (std::int64_t s = 0; s < duration; ++s) {
    if (next != event_steps.end() && *next == s) {
      ++running;
      ++next;
    }
    fn.count[static_cast<std::size_t>(s)] = running;
  }
  return fn;
}

TargetCurve fuse_target(std::span<const ProbeEvent> probes, std::int64_t duration,
                        double brix_factor) {
  std::vector<Reading> refractometer;
  std::vector<Reading> spindle;
  for (const auto& p : probes) {
    if (p.kind == ProbeKind::refractometer) {
      refractometer.push_back({p.step, brix_to_plato(p.value, brix_factor), p.kind});
    } else {
      spindle.push_back({p.step, p.value, p.kind});
    }
  }
  return anchor_spindle(spindle, interpolate_refractometer(refractometer, duration));
}

TargetCurve fuse_target(const ProcessRun& run) {
  return fuse_target(run.probes, run.duration(), run.config.brix_factor);
}

void write_target_csv(std::ostream& out, const TargetCurve& curve) {
  out << "step,plato\n";
  for (std::size_t i = 0; i < curve.plato.size(); ++i)
    out << i << ',' << format_double(curve.plato[i]) << '\n';
}

}  // namespace wortsense
