#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "svg_plot.hpp"
#include "wortsense/error.hpp"
#include "wortsense/evalkit.hpp"
#include "wortsense/frames_io.hpp"
#include "wortsense/lstmnet.hpp"
#include "wortsense/run_io.hpp"

namespace wortsense::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "wortsense 0.1.0";

std::string run_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%03zu", index);
  return buf;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (values.empty()) throw ValidationError(std::string(what) + ": empty list");
  return values;
}

std::vector<std::string> parse_id_list(const std::string& text) {
  std::vector<std::string> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) ids.push_back(item);
  }
  return ids;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  const auto probe = dir / ".wortsense-write-test";
  {
    std::ofstream test(probe);
    if (!test) throw IoError("directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string config_path;
  std::string out_dir;
  std::size_t runs = 31;
  std::uint64_t seed = 0;
  std::string initial_plato = "8,10,12";
};

void cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  ProcessConfig base;
  if (!o.config_path.empty()) base = load_config(o.config_path);
  ensure_directory(o.out_dir);

  CampaignOptions campaign;
  campaign.seed = o.seed;
  campaign.initial_plato_cycle = parse_double_list(o.initial_plato, "--initial-plato");

  Manifest manifest;
  manifest.seed = o.seed;
  for (std::size_t i = 0; i < o.runs; ++i) {
    auto run = simulate_process(campaign_config(base, i, campaign));
    run.id = run_id(i);
    save_run(o.out_dir, run);
    manifest.runs.push_back({run.id, run.config.initial_plato, run.config.rng_seed,
                             run.config.duration_steps});
  }
  save_manifest(o.out_dir, manifest);
  out << "simulated " << o.runs << " runs into " << o.out_dir << "\n";
}

// ------------------------------------------------------------ build-frames

struct BuildFramesOptions {
  std::string data_dir;
  std::int64_t windowsize = 100;
  std::int64_t overlap = 7;
  std::string features = "base5";
  std::string alignment = "last_step";
  std::string split = "24,4,3";
  std::uint64_t split_seed = 7;
  std::string out;
};

std::vector<DataFrameWindow> windows_for(const fs::path& dir, const std::vector<std::string>& ids,
                                         const FramesConfig& cfg) {
  std::vector<DataFrameWindow> all;
  for (const auto& id : ids) {
    const auto run = load_run(dir, id);
    auto windows = build_windows(run, cfg);
    std::move(windows.begin(), windows.end(), std::back_inserter(all));
  }
  return all;
}

void cmd_build_frames(const BuildFramesOptions& o, std::ostream& out) {
  FramesConfig cfg;
  cfg.windowsize = o.windowsize;
  cfg.overlap = o.overlap;
  cfg.feature_set = feature_set_from_string(o.features);
  cfg.alignment = target_alignment_from_string(o.alignment);
  if (cfg.windowsize < 1 || cfg.overlap < 1)
    throw ValidationError("--windowsize and --overlap must be >= 1");

  const auto counts = parse_double_list(o.split, "--split");
  if (counts.size() != 3 || std::any_of(counts.begin(), counts.end(), [](double c) {
        return c < 0 || c != std::floor(c);
      }))
    throw ValidationError("--split expects three nonnegative integers train,val,test");

  const auto manifest = load_manifest(o.data_dir);
  std::vector<std::string> ids;
  for (const auto& r : manifest.runs) ids.push_back(r.id);
  FramesFile frames;
  frames.config = cfg;
  frames.split = split_runs(ids, static_cast<std::size_t>(counts[0]),
                            static_cast<std::size_t>(counts[1]),
                            static_cast<std::size_t>(counts[2]), o.split_seed);
  if (frames.split.train.empty()) throw ValidationError("--split must assign at least one training run");

  auto train = windows_for(o.data_dir, frames.split.train, cfg);
  const auto stats = fit_normalizer(train);
  frames.train = apply_normalizer(std::move(train), stats);
  frames.val = apply_normalizer(windows_for(o.data_dir, frames.split.val, cfg), stats);
  frames.test = apply_normalizer(windows_for(o.data_dir, frames.split.test, cfg), stats);

  save_frames(o.out, frames);
  {
    std::ofstream sample(o.out + ".sample.csv", std::ios::binary);
    if (!sample) throw IoError("cannot write " + o.out + ".sample.csv");
    write_frames_sample_csv(sample, frames);
  }
  out << "frames: train " << frames.train.windows.size() << " (" << frames.split.train.size()
      << " runs), val " << frames.val.windows.size() << " (" << frames.split.val.size()
      << " runs), test " << frames.test.windows.size() << " (" << frames.split.test.size()
      << " runs)\n";
  out << "total windows: " << frames.window_count() << "\n";
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  std::string frames;
  std::string model_out;
  std::string history;
  std::size_t epochs = 40;
  double lr = 1e-3;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
  std::size_t patience = 10;
  std::size_t threads = 0;
  std::size_t lstm_dim = 4;
  std::string optimizer = "adam";
  bool quiet = false;
};

json frames_config_to_json(const FramesConfig& c) {
  return {{"windowsize", c.windowsize},
          {"overlap", c.overlap},
          {"features", std::string(to_string(c.feature_set))},
          {"target_alignment", std::string(to_string(c.alignment))}};
}

FramesConfig frames_config_from_json(const json& doc) {
  FramesConfig c;
  try {
    c.windowsize = doc.at("windowsize").get<std::int64_t>();
    c.overlap = doc.at("overlap").get<std::int64_t>();
    c.feature_set = feature_set_from_string(doc.at("features").get<std::string>());
    c.alignment = target_alignment_from_string(doc.at("target_alignment").get<std::string>());
  } catch (const json::exception& e) {
    throw IoError(std::string("model metadata lacks a frames config: ") + e.what());
  }
  return c;
}

void cmd_train(const TrainOptions& o, std::ostream& out) {
  const auto frames = load_frames(o.frames);

  ModelConfig mcfg;
  mcfg.windowsize = static_cast<std::size_t>(frames.config.windowsize);
  mcfg.features = feature_count(frames.config.feature_set);
  mcfg.lstm_dim = o.lstm_dim;

  TrainConfig tcfg;
  tcfg.epochs = o.epochs;
  tcfg.batch_size = o.batch;
  tcfg.learning_rate = o.lr;
  tcfg.shuffle_seed = o.seed;
  tcfg.patience = o.patience;
  tcfg.threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;
  if (o.optimizer == "adam") {
    tcfg.optimizer.kind = OptimizerKind::adam;
  } else if (o.optimizer == "sgd") {
    tcfg.optimizer.kind = OptimizerKind::sgd;
  } else {
    throw ValidationError("--optimizer must be adam or sgd");
  }

  auto params = ModelParams::initialized(mcfg, o.seed);
  const auto result = train(std::move(params), frames.train, frames.val, tcfg,
                            [&](const EpochRecord& e) {
                              if (o.quiet) return;
                              out << "epoch " << e.epoch << "  train_mse " << format_double(e.train_mse)
                                  << "  val_mse " << format_double(e.val_mse) << "\n";
                              out.flush();
                            });

  ModelFile model;
  model.params = result.params;
  model.feature_names = feature_names(frames.config.feature_set);
  model.norm_stats = frames.train.norm_stats;
  model.metadata = {
      {"tool", kToolVersion},
      {"frames", frames_config_to_json(frames.config)},
      {"split", {{"train", frames.split.train}, {"val", frames.split.val}, {"test", frames.split.test}}},
      {"training",
       {{"epochs", tcfg.epochs},
        {"batch_size", tcfg.batch_size},
        {"learning_rate", tcfg.learning_rate},
        {"optimizer", o.optimizer},
        {"seed", o.seed},
        {"patience", tcfg.patience},
        {"epochs_run", result.history.size()},
        {"best_epoch", result.best_epoch},
        {"best_val_mse", result.best_val_mse},
        {"early_stopped", result.early_stopped}}},
  };
  save_params(o.model_out, model);

  const std::string history_path = o.history.empty() ? o.model_out + ".history.csv" : o.history;
  std::ostringstream history;
  history << "epoch,train_mse,val_mse\n";
  for (const auto& e : result.history)
    history << e.epoch << ',' << format_double(e.train_mse) << ',' << format_double(e.val_mse) << '\n';
  write_file(history_path, history.str());

  const auto& best = result.history.at(result.best_epoch - 1);
  const auto& last = result.history.back();
  out << "final train_mse " << format_double(last.train_mse) << " val_mse "
      << format_double(last.val_mse) << "\n";
  out << "best epoch " << result.best_epoch << ": train_mse " << format_double(best.train_mse)
      << " val_mse " << format_double(best.val_mse) << "\n";
  out << "weights written to " << o.model_out << "\n";
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string model;
  std::string data_dir;
  std::string split = "test";
  std::string runs;
  std::string report_dir;
};

void write_series_csv(const fs::path& path, const ProcessRun& run, const TargetCurve& target,
                      const ErrorReport& report) {
  std::map<std::int64_t, std::size_t> predicted_at;
  for (std::size_t i = 0; i < report.steps.size(); ++i) predicted_at[report.steps[i]] = i;
  std::ostringstream csv;
  csv << "step,pressure_mbar,wort_temp_c,ambient_temp_c,target_plato,predicted_plato,abs_error\n";
  for (std::size_t s = 0; s < run.samples.size(); ++s) {
    const auto& smp = run.samples[s];
    csv << smp.step << ',' << format_double(smp.pressure_mbar) << ','
        << format_double(smp.wort_temp_c) << ',' << format_double(smp.ambient_temp_c) << ','
        << format_double(target.plato[s]) << ',';
    if (auto it = predicted_at.find(smp.step); it != predicted_at.end()) {
      csv << format_double(report.predicted[it->second]) << ','
          << format_double(report.abs_error[it->second]);
    } else {
      csv << ',';
    }
    csv << '\n';
  }
  write_file(path, csv.str());
}

void cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  if (o.split != "train" && o.split != "val" && o.split != "test")
    throw ValidationError("--split must be train, val or test");
  const auto model = load_params(o.model);
  const auto frames_cfg = frames_config_from_json(model.metadata.value("frames", json::object()));
  if (feature_count(frames_cfg.feature_set) != model.params.config().features)
    throw IoError(o.model + ": frames metadata disagrees with the model's feature count");

  std::vector<std::string> ids;
  if (!o.runs.empty()) {
    ids = parse_id_list(o.runs);
  } else {
    const auto split = model.metadata.value("split", json::object());
    if (auto it = split.find(o.split); it != split.end()) ids = it->get<std::vector<std::string>>();
  }

  std::vector<ProcessRun> runs;
  for (const auto& id : ids) runs.push_back(load_run(o.data_dir, id));
  const auto training_ids = training_ids_from_metadata(model.metadata);
  const auto eval = evaluate_split(model, runs, frames_cfg, o.split, training_ids);

  ensure_directory(o.report_dir);
  json summary_runs = json::array();
  std::ostringstream summary_csv;
  summary_csv << "run_id,split,mae,max_error,within_0_6,within_0_3,exceeds_5\n";
  for (std::size_t i = 0; i < eval.reports.size(); ++i) {
    const auto& report = eval.reports[i];
    const auto& run = runs[i];
    auto doc = report_to_json(report);
    doc["features"] = std::string(to_string(frames_cfg.feature_set));
    doc["frames"] = frames_config_to_json(frames_cfg);
    doc["initial_pressure_mbar"] = run.initial_pressure_mbar;
    doc["initial_plato"] = run.initial_plato;
    doc["duration_steps"] = run.duration();
    write_file(fs::path(o.report_dir) / (report.run_id + ".report.json"), doc.dump(2) + "\n");
    write_series_csv(fs::path(o.report_dir) / (report.run_id + ".series.csv"), run,
                     fuse_target(run), report);
    summary_runs.push_back(report_to_json(report));
    summary_csv << report.run_id << ',' << report.split << ',' << format_double(report.mae) << ','
                << format_double(report.max_error) << ',' << format_double(report.within_0_6)
                << ',' << format_double(report.within_0_3) << ','
                << (report.exceeds_5 ? "true" : "false") << '\n';
  }
  const json summary{{"split", o.split},
                     {"model", fs::path(o.model).filename().string()},
                     {"aggregate", aggregate_to_json(eval.aggregate)},
                     {"runs", summary_runs}};
  write_file(fs::path(o.report_dir) / "summary.json", summary.dump(2) + "\n");
  write_file(fs::path(o.report_dir) / "summary.csv", summary_csv.str());

  out << std::left << std::setw(12) << "run" << std::right << std::setw(9) << "mae"
      << std::setw(9) << "max" << std::setw(9) << "<=0.6" << std::setw(9) << "<=0.3" << "\n";
  auto row = [&](const std::string& name, double mae, double max, double w6, double w3) {
    out << std::left << std::setw(12) << name << std::right << std::fixed << std::setprecision(3)
        << std::setw(9) << mae << std::setw(9) << max << std::setw(9) << w6 << std::setw(9) << w3
        << "\n";
    out.unsetf(std::ios::fixed);
  };
  for (const auto& r : eval.reports) row(r.run_id, r.mae, r.max_error, r.within_0_6, r.within_0_3);
  const auto& a = eval.aggregate;
  row("mean(" + std::to_string(a.runs) + ")", a.mae, a.max_error, a.within_0_6, a.within_0_3);
}

// -------------------------------------------------------------------- plot

struct PlotOptions {
  std::string run;
  std::string report_dir;
  std::string out;
};

struct SeriesTable {
  std::vector<double> step, pressure, wort, ambient, target, predicted, error;
};

SeriesTable read_series(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  SeriesTable t;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 7) cells.emplace_back();
    auto parse = [](const std::string& c) { return c.empty() ? NAN : std::stod(c); };
    t.step.push_back(parse(cells[0]));
    t.pressure.push_back(parse(cells[1]));
    t.wort.push_back(parse(cells[2]));
    t.ambient.push_back(parse(cells[3]));
    t.target.push_back(parse(cells[4]));
    t.predicted.push_back(parse(cells[5]));
    t.error.push_back(parse(cells[6]));
  }
  return t;
}

void cmd_plot(const PlotOptions& o, std::ostream& out) {
  const fs::path report_path = fs::path(o.report_dir) / (o.run + ".report.json");
  const fs::path series_path = fs::path(o.report_dir) / (o.run + ".series.csv");
  if (!fs::exists(report_path) || !fs::exists(series_path))
    throw ValidationError("unknown run id '" + o.run + "' in report dir " + o.report_dir);
  const auto report = read_json(report_path);
  const auto t = read_series(series_path);
  const bool extended = report.value("features", std::string("base5")) == "extended7";

  std::vector<PlotPanel> panels(4);
  panels[0].title = "Pressure";
  panels[0].y_label = "mbar";
  panels[0].series.push_back({"bottom pressure", "#1f77b4", t.step, t.pressure});
  panels[1].title = "Temperatures";
  panels[1].y_label = "°C";
  panels[1].series.push_back({"wort", "#d62728", t.step, t.wort});
  panels[1].series.push_back({"ambient", "#2ca02c", t.step, t.ambient});
  panels[2].title = "Target and predicted density";
  panels[2].y_label = "°Plato";
  panels[2].series.push_back({"target", "#2ca02c", t.step, t.target});
  panels[2].series.push_back({"predicted", "#ff7f0e", t.step, t.predicted});
  panels[3].title = "Absolute error";
  panels[3].y_label = "°Plato";
  panels[3].series.push_back({"|predicted - target|", "#9467bd", t.step, t.error});
  panels[3].references.push_back({"0.3 °P", "#999999", "ref-threshold-0.3", kGoodErrorPlato, true});
  panels[3].references.push_back({"0.6 °P", "#555555", "ref-threshold-0.6", kAcceptableErrorPlato, true});
  if (extended) {
    panels[0].references.push_back({"initial pressure", "#000000", "ref-initial-pressure",
                                    report.at("initial_pressure_mbar").get<double>(), true});
    panels[2].references.push_back({"initial plato", "#000000", "ref-initial-plato",
                                    report.at("initial_plato").get<double>(), true});
  }

  std::ostringstream title;
  title << o.run << " (" << report.value("split", std::string("?")) << "), MAE "
        << std::fixed << std::setprecision(3) << report.value("mae", 0.0) << " °P";
  write_file(o.out, render_panels_svg(title.str(), panels));
  out << "plot written to " << o.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soft-sensor toolkit: simulate fermentation runs, build data frames, train and "
               "evaluate an LSTM wort-density regressor"};
  app.name("wortsense");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a campaign of fermentation runs");
  simulate->add_option("--config", sim.config_path, "Base process config (JSON)")->check(CLI::ExistingFile);
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  simulate->add_option("--runs", sim.runs, "Number of runs")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Campaign seed")->capture_default_str();
  simulate->add_option("--initial-plato", sim.initial_plato, "Initial densities cycled over runs")
      ->capture_default_str();

  BuildFramesOptions bf;
  auto* build = app.add_subcommand("build-frames", "Window simulated runs into data frames");
  build->add_option("--data-dir", bf.data_dir, "Directory written by simulate")->required();
  build->add_option("--windowsize", bf.windowsize, "Rows per frame")->capture_default_str();
  build->add_option("--overlap", bf.overlap, "Steps between frame starts")->capture_default_str();
  build->add_option("--features", bf.features, "base5 or extended7")->capture_default_str();
  build->add_option("--alignment", bf.alignment, "last_step or window_mean")->capture_default_str();
  build->add_option("--split", bf.split, "train,val,test run counts")->capture_default_str();
  build->add_option("--split-seed", bf.split_seed, "Seed of the run shuffle")->capture_default_str();
  build->add_option("--out", bf.out, "Frames file")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train the LSTM regressor");
  train_cmd->add_option("--frames", tr.frames, "Frames file")->required();
  train_cmd->add_option("--model-out", tr.model_out, "Weights file")->required();
  train_cmd->add_option("--history", tr.history, "Loss history CSV (default <model-out>.history.csv)");
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->capture_default_str();
  train_cmd->add_option("--batch", tr.batch)->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Initialization and shuffle seed")->capture_default_str();
  train_cmd->add_option("--patience", tr.patience, "Early-stop patience, 0 disables")->capture_default_str();
  train_cmd->add_option("--threads", tr.threads, "Worker threads, 0 = all cores")->capture_default_str();
  train_cmd->add_option("--lstm-dim", tr.lstm_dim)->capture_default_str();
  train_cmd->add_option("--optimizer", tr.optimizer, "adam or sgd")->capture_default_str();
  train_cmd->add_flag("--quiet", tr.quiet, "Do not print per-epoch losses");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on a split");
  evaluate->add_option("--model", ev.model, "Weights file")->required();
  evaluate->add_option("--data-dir", ev.data_dir, "Directory written by simulate")->required();
  evaluate->add_option("--split", ev.split, "train, val or test")->capture_default_str();
  evaluate->add_option("--runs", ev.runs, "Comma-separated run ids instead of the stored split");
  evaluate->add_option("--report-dir", ev.report_dir, "Output directory")->required();

  PlotOptions pl;
  auto* plot = app.add_subcommand("plot", "Four-panel SVG of one evaluated run");
  plot->add_option("--run", pl.run, "Run id")->required();
  plot->add_option("--report-dir", pl.report_dir, "Directory written by evaluate")->required();
  plot->add_option("--out", pl.out, "SVG file")->required();

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (*simulate) cmd_simulate(sim, out);
    else if (*build) cmd_build_frames(bf, out);
    else if (*train_cmd) cmd_train(tr, out);
    else if (*evaluate) cmd_evaluate(ev, out);
    else if (*plot) cmd_plot(pl, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const json::exception& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

}  // namespace wortsense::cli
