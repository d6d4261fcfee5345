#include "wortsense/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "random.hpp"
#include "wortsense/error.hpp"

namespace wortsense {

namespace {

[[noreturn]] void reject(const std::string& message) {
  throw ValidationError("invalid process config: " + message);
}

bool finite_all(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double removed_volume(ProbeKind kind, const ProcessConfig& config) {
  return kind == ProbeKind::spindle ? config.spindle_volume_l : 0.0;
}

}  // namespace

std::string_view to_string(ProbeKind kind) {
  return kind == ProbeKind::spindle ? "spindle" : "refractometer";
}

ProbeKind probe_kind_from_string(std::string_view text) {
  if (text == "spindle") return ProbeKind::spindle;
  if (text == "refractometer") return ProbeKind::refractometer;
  throw ValidationError("unknown probe kind '" + std::string(text) + "'");
}

void ProcessConfig::validate() const {
  if (!finite_all({initial_plato, final_plato, volume_l, fill_height_m, rate_k, ambient_mean_c,
                   ambient_amp_c, wort_initial_c, airlock_cap_mbar, initial_headspace_mbar,
                   co2_gain_mbar_per_plato, headspace_leak_steps, thermal_tau_steps,
                   rate_temp_coeff, spindle_volume_l, brix_factor}))
    reject("all numeric fields must be finite");
  if (!(initial_plato > final_plato)) reject("initial_plato must exceed final_plato");
  if (final_plato < 0.0) reject("final_plato must be >= 0");
  if (initial_plato > 30.0) reject("initial_plato must be <= 30");
  if (duration_steps < 0) reject("duration_steps must be >= 0");
  if (lag_steps < 0) reject("lag_steps must be >= 0");
  if (!(airlock_cap_mbar > 0.0)) reject("airlock_cap_mbar must be > 0");
  if (!(fill_height_m > 0.0)) reject("fill_height_m must be > 0");
  if (!(volume_l > 0.0)) reject("volume_l must be > 0");
  if (rate_k < 0.0) reject("rate_k must be >= 0");
  if (initial_headspace_mbar < 0.0 || initial_headspace_mbar > airlock_cap_mbar)
    reject("initial_headspace_mbar must lie in [0, airlock_cap_mbar]");
  if (co2_gain_mbar_per_plato < 0.0) reject("co2_gain_mbar_per_plato must be >= 0");
  if (!(headspace_leak_steps > 0.0)) reject("headspace_leak_steps must be > 0");
  if (!(thermal_tau_steps > 0.0)) reject("thermal_tau_steps must be > 0");
  if (spindle_volume_l < 0.0) reject("spindle_volume_l must be >= 0");
  if (!(brix_factor > 0.0)) reject("brix_factor must be > 0");
  if (noise_sd.pressure_mbar < 0.0 || noise_sd.wort_temp_c < 0.0 ||
      noise_sd.ambient_temp_c < 0.0 || noise_sd.spindle_plato < 0.0 ||
      noise_sd.refractometer_brix < 0.0)
    reject("noise standard deviations must be >= 0");

  double removed = 0.0;
  for (std::size_t i = 0; i < probe_schedule.size(); ++i) {
    const auto step = probe_schedule[i].step;
    if (step < 0 || step >= duration_steps) {
      std::ostringstream os;
      os << "probe_schedule[" << i << "] step " << step << " outside [0, " << duration_steps
         << ")";
      reject(os.str());
    }
    if (i > 0 && step <= probe_schedule[i - 1].step) {
      std::ostringstream os;
      os << "probe_schedule steps must be strictly increasing (entry " << i << " at step " << step
         << ")";
      reject(os.str());
    }
    removed += removed_volume(probe_schedule[i].kind, *this);
  }
  if (removed >= volume_l) reject("probes would remove the whole wort volume");
}

double ambient_temperature(std::int64_t step, double mean_c, double amp_c) {
  const double phase =
      2.0 * std::numbers::pi * static_cast<double>(step) / static_cast<double>(kStepsPerDay);
  return mean_c + amp_c * std::sin(phase);
}

double hydrostatic_pressure(double density_kg_m3, double height_m) {
  if (!(density_kg_m3 >= 0.0) || !(height_m >= 0.0))
    throw ValidationError("hydrostatic_pressure: density and height must be >= 0");
  return density_kg_m3 * kGravity * height_m / 100.0;
}

double plato_to_density(double plato) {
  if (!(plato >= 0.0 && plato <= 30.0))
    throw ValidationError("plato_to_density: plato must lie in [0, 30]");
  return 1000.0 * 259.0 / (259.0 - plato);
}

double density_to_plato(double density_kg_m3) {
  if (!(density_kg_m3 > 0.0)) throw ValidationError("density_to_plato: density must be > 0");
  return 259.0 - 259.0 * 1000.0 / density_kg_m3;
}

double vessel_cross_section_m2(const ProcessConfig& config) {
  return config.volume_l / 1000.0 / config.fill_height_m;
}

double noise_free_hydrostatic(const ProcessRun& run, std::int64_t step) {
  const auto i = static_cast<std::size_t>(step);
  return hydrostatic_pressure(plato_to_density(run.true_plato.at(i)), run.fill_height_m.at(i));
}

SensorPair two_sensor_pressures(const ProcessRun& run, std::int64_t step, double gap_m) {
  const auto i = static_cast<std::size_t>(step);
  const double height = run.fill_height_m.at(i);
  if (!(gap_m > 0.0) || gap_m >= height)
    throw ValidationError("two_sensor_pressures: gap must be in (0, fill height)");
  const double density = plato_to_density(run.true_plato.at(i));
  const double head = run.headspace_mbar.at(i);
  return {head + hydrostatic_pressure(density, height),
          head + hydrostatic_pressure(density, height - gap_m)};
}

ProcessRun simulate_process(const ProcessConfig& config) {
  config.validate();

  ProcessRun run;
  run.config = config;
  const auto n = static_cast<std::size_t>(config.duration_steps);
  run.samples.reserve(n);
  run.true_plato.reserve(n);
  run.headspace_mbar.reserve(n);
  run.fill_height_m.reserve(n);
  run.probes.reserve(config.probe_schedule.size());

  detail::Rng rng(config.rng_seed);
  const double area = vessel_cross_section_m2(config);
  const double leak = std::exp(-1.0 / config.headspace_leak_steps);
  const double thermal = std::exp(-1.0 / config.thermal_tau_steps);

  double plato = config.initial_plato;
  double headspace = config.initial_headspace_mbar;
  double height = config.fill_height_m;
  double wort = config.wort_initial_c;
  auto next_probe = config.probe_schedule.begin();

  for (std::int64_t step = 0; step < config.duration_steps; ++step) {
    const double ambient = ambient_temperature(step, config.ambient_mean_c, config.ambient_amp_c);
    const double hydro = hydrostatic_pressure(plato_to_density(plato), height);

    SensorSample sample;
    sample.step = step;
    sample.pressure_mbar =
        std::max(0.0, headspace + hydro + rng.normal(0.0, config.noise_sd.pressure_mbar));
    sample.wort_temp_c = wort + rng.normal(0.0, config.noise_sd.wort_temp_c);
    sample.ambient_temp_c = ambient + rng.normal(0.0, config.noise_sd.ambient_temp_c);
    run.samples.push_back(sample);
    run.true_plato.push_back(plato);
    run.headspace_mbar.push_back(headspace);
    run.fill_height_m.push_back(height);

    // Probes are drawn right after the measurement of their step.
    if (next_probe != config.probe_schedule.end() && next_probe->step == step) {
      ProbeEvent event;
      event.step = step;
      event.kind = next_probe->kind;
      if (event.kind == ProbeKind::spindle) {
        event.value = plato + rng.normal(0.0, config.noise_sd.spindle_plato);
      } else {
        event.value =
            config.brix_factor * plato + rng.normal(0.0, config.noise_sd.refractometer_brix);
      }
      event.value = std::clamp(event.value, 0.0, 30.0);
      event.removed_volume_l = removed_volume(event.kind, config);
      height -= event.removed_volume_l / 1000.0 / area;
      run.probes.push_back(event);
      ++next_probe;
    }

    double consumed = 0.0;
    if (step >= config.lag_steps) {
      const double k = config.rate_k * std::exp(config.rate_temp_coeff * (wort - 20.0));
      const double next = config.final_plato + (plato - config.final_plato) * std::exp(-k);
      consumed = plato - next;
      plato = next;
    }
    headspace = std::clamp(headspace * leak + config.co2_gain_mbar_per_plato * consumed, 0.0,
                           config.airlock_cap_mbar);
    wort = ambient + (wort - ambient) * thermal;
  }

  if (!run.samples.empty()) {
    run.initial_pressure_mbar = run.samples.front().pressure_mbar;
  }
  run.initial_plato = config.initial_plato;
  return run;
}

std::vector<ScheduledProbe> default_probe_schedule(std::int64_t duration_steps,
                                                   std::uint64_t seed) {
  std::vector<ScheduledProbe> schedule;
  if (duration_steps <= 0) return schedule;

  constexpr std::int64_t kRefractometerOffset = 30;
  constexpr std::int64_t kFirstExtraSpindle = 1500;
  std::set<std::int64_t> refractometer;
  for (std::int64_t s = kRefractometerOffset; s < duration_steps; s += kStepsPerDay)
    refractometer.insert(s);
  // a closing reading at the last step, so even runs shorter than a day have
  // two refractometer points to interpolate between
  if (duration_steps > 1) refractometer.insert(duration_steps - 1);

  std::set<std::int64_t> spindle{0};
  detail::Rng rng(seed);
  const auto extra = rng.uniform_int(0, 4);
  if (duration_steps > kFirstExtraSpindle + 1) {
    for (std::int64_t i = 0; i < extra; ++i) {
      // bounded retries; a collision simply yields one probe fewer
      for (int attempt = 0; attempt < 16; ++attempt) {
        const auto s = rng.uniform_int(kFirstExtraSpindle, duration_steps - 1);
        if (!spindle.contains(s) && !refractometer.contains(s)) {
          spindle.insert(s);
          break;
        }
      }
    }
  }

  for (auto s : spindle) schedule.push_back({s, ProbeKind::spindle});
  for (auto s : refractometer) schedule.push_back({s, ProbeKind::refractometer});
  std::sort(schedule.begin(), schedule.end(),
            [](const ScheduledProbe& a, const ScheduledProbe& b) { return a.step < b.step; });
  return schedule;
}

ProcessConfig campaign_config(const ProcessConfig& base, std::size_t index,
                              const CampaignOptions& options) {
  if (options.initial_plato_cycle.empty())
    throw ValidationError("campaign: initial_plato_cycle must not be empty");

  detail::Rng rng(options.seed, index);
  ProcessConfig config = base;
  config.initial_plato = options.initial_plato_cycle[index % options.initial_plato_cycle.size()];
  config.final_plato = config.initial_plato * rng.uniform(0.2, 0.3);
  config.rate_k = base.rate_k * rng.uniform(0.8, 1.25);
  config.lag_steps = rng.uniform_int(300, 900);
  config.ambient_mean_c = base.ambient_mean_c + rng.uniform(-1.5, 1.5);
  config.ambient_amp_c = base.ambient_amp_c * rng.uniform(0.7, 1.3);
  config.wort_initial_c = base.wort_initial_c + rng.uniform(-2.0, 2.0);
  const bool early_drop = rng.canonical() < 0.5;
  const double early_headspace = rng.uniform(5.0, 15.0);
  config.initial_headspace_mbar = early_drop ? std::min(early_headspace, base.airlock_cap_mbar) : 0.0;
  config.probe_schedule = default_probe_schedule(base.duration_steps, rng.next());
  config.rng_seed = rng.next();
  return config;
}

}  // namespace wortsense
