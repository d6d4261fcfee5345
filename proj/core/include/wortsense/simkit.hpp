#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wortsense {

/// One sensor sampling cycle lasts 60 s; a day is 1440 steps.
inline constexpr std::int64_t kStepsPerDay = 1440;
inline constexpr double kGravity = 9.80665;  // m/s^2

enum class ProbeKind { spindle, refractometer };

std::string_view to_string(ProbeKind kind);
ProbeKind probe_kind_from_string(std::string_view text);

struct ScheduledProbe {
  std::int64_t step = 0;
  ProbeKind kind = ProbeKind::spindle;
};

/// Standard deviations of the independent Gaussian noise added per step.
struct NoiseSd {
  double pressure_mbar = 0.15;
  double wort_temp_c = 0.05;
  double ambient_temp_c = 0.05;
  double spindle_plato = 0.02;
  double refractometer_brix = 0.10;
};

/// Parameters of one simulated fermentation. Every field has a usable
/// default; `probe_schedule` is empty unless filled in by the caller or by
/// make_campaign().
struct ProcessConfig {
  double initial_plato = 12.0;
  double final_plato = 3.0;
  double volume_l = 60.0;
  double fill_height_m = 0.55;
  std::int64_t duration_steps = 10000;
  std::int64_t lag_steps = 600;
  double rate_k = 1.0 / 1500.0;  // first-order extract consumption per step at 20 °C
  double ambient_mean_c = 21.0;
  double ambient_amp_c = 2.0;
  double wort_initial_c = 26.0;
  double airlock_cap_mbar = 50.0;

  // Headspace pressure present at pitching. Zero gives a flat start, a
  // positive value an early pressure drop while it leaks off.
  double initial_headspace_mbar = 0.0;
  // Headspace pressure added per °P of extract fermented before the airlock
  // vents. 60 l of wort releases roughly 0.46 g CO2 per g of extract into
  // about 10 l of headspace, which is of order 1e4 mbar per °P, so the
  // headspace sits at the airlock cap until fermentation nearly stops.
  double co2_gain_mbar_per_plato = 15000.0;
  double headspace_leak_steps = 240.0;
  double thermal_tau_steps = 600.0;
  // Relative change of rate_k per °C of wort temperature above 20 °C.
  double rate_temp_coeff = 0.03;
  double spindle_volume_l = 0.1;
  double brix_factor = 1.04;

  std::vector<ScheduledProbe> probe_schedule;
  NoiseSd noise_sd;
  std::uint64_t rng_seed = 0;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
};

struct SensorSample {
  std::int64_t step = 0;
  double pressure_mbar = 0.0;
  double wort_temp_c = 0.0;
  double ambient_temp_c = 0.0;
};

struct ProbeEvent {
  std::int64_t step = 0;
  ProbeKind kind = ProbeKind::spindle;
  double value = 0.0;  // °Plato for spindle, °Brix for refractometer
  double removed_volume_l = 0.0;
};

/// A complete simulated fermentation. `headspace_mbar` and `fill_height_m`
/// are the noise-free internal states behind each recorded sample.
struct ProcessRun {
  std::string id;
  ProcessConfig config;
  std::vector<SensorSample> samples;
  std::vector<ProbeEvent> probes;
  std::vector<double> true_plato;
  std::vector<double> headspace_mbar;
  std::vector<double> fill_height_m;
  double initial_pressure_mbar = 0.0;
  double initial_plato = 0.0;

  std::int64_t duration() const { return static_cast<std::int64_t>(samples.size()); }
};

ProcessRun simulate_process(const ProcessConfig& config);

double ambient_temperature(std::int64_t step, double mean_c, double amp_c);

/// rho * g * h converted from Pa to mbar.
double hydrostatic_pressure(double density_kg_m3, double height_m);

/// Specific gravity approximation SG = 259 / (259 - P) at reference temperature.
double plato_to_density(double plato);
double density_to_plato(double density_kg_m3);

/// Wort cross-section of the cylindrical vessel in m^2.
double vessel_cross_section_m2(const ProcessConfig& config);

/// Noise-free hydrostatic component at the bottom sensor.
double noise_free_hydrostatic(const ProcessRun& run, std::int64_t step);

struct SensorPair {
  double low_mbar = 0.0;
  double high_mbar = 0.0;
};

/// Noise-free pressures of a bottom sensor and a second sensor `gap_m` above
/// it, both seeing the same headspace.
SensorPair two_sensor_pressures(const ProcessRun& run, std::int64_t step, double gap_m);

/// Options for generating a whole brewing campaign of varied runs.
struct CampaignOptions {
  std::vector<double> initial_plato_cycle{8.0, 10.0, 12.0};
  std::uint64_t seed = 0;
};

/// Derives the configuration of run `index` from `base`: initial density is
/// cycled, kinetics, temperatures, start regime and the probe schedule are
/// drawn from a generator seeded by (seed, index).
ProcessConfig campaign_config(const ProcessConfig& base, std::size_t index,
                              const CampaignOptions& options);

/// Daily refractometer probes plus one to five spindle probes, the first at step 0.
std::vector<ScheduledProbe> default_probe_schedule(std::int64_t duration_steps,
                                                   std::uint64_t seed);

}  // namespace wortsense
