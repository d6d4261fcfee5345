#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "wortsense/simkit.hpp"

namespace wortsense {

inline constexpr double kDefaultBrixFactor = 1.04;

struct Reading {
  std::int64_t step = 0;
  double value = 0.0;
  ProbeKind kind = ProbeKind::spindle;
};

/// Dense per-step target in °Plato.
struct TargetCurve {
  std::vector<double> plato;

  std::int64_t duration() const { return static_cast<std::int64_t>(plato.size()); }
};

/// Cumulative number of probe events up to and including each step.
struct StepFunction {
  std::vector<std::int64_t> count;
};

double brix_to_plato(double brix, double factor = kDefaultBrixFactor);

/// Piecewise-linear through the readings (already in °Plato), held constant
/// outside the first and last reading. Needs at least two readings.
TargetCurve interpolate_refractometer(std::span<const Reading> readings, std::int64_t duration);

/// Warps `refr_curve` by an additive piecewise-affine correction so that it
/// passes through every spindle reading.
TargetCurve anchor_spindle(std::span<const Reading> spindle, const TargetCurve& refr_curve);

StepFunction probe_step_function(std::span<const ProbeEvent> events, std::int64_t duration,
                                 ProbeKind kind_filter = ProbeKind::spindle);

/// Full target construction for one run: refractometer readings are
/// converted to Plato, interpolated and anchored to the spindle readings.
TargetCurve fuse_target(std::span<const ProbeEvent> probes, std::int64_t duration,
                        double brix_factor = kDefaultBrixFactor);
TargetCurve fuse_target(const ProcessRun& run);

// `step,plato`
void write_target_csv(std::ostream& out, const TargetCurve& curve);

}  // namespace wortsense
