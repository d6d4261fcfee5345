#include "wortsense/frames_io.hpp"

#include <map>
#include <ostream>

#include "container.hpp"
#include "wortsense/error.hpp"
#include "wortsense/run_io.hpp"

namespace wortsense {

namespace {

using nlohmann::json;

constexpr detail::Magic kFramesMagic{'W', 'S', 'F', 'R', 'A', 'M', 'E', '1'};

struct Partition {
  const char* label;
  const WindowBatch* batch;
  const std::vector<std::string>* run_ids;
};

// Windows are stored grouped by run, in the partition's run order.
json partition_header(const WindowBatch& batch, const std::vector<std::string>& run_ids) {
  std::map<std::string, std::size_t> counts;
  for (const auto& w : batch.windows) ++counts[w.source_run];
  json runs = json::array();
  std::size_t position = 0;
  for (const auto& id : run_ids) {
    const auto n = counts.contains(id) ? counts.at(id) : 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (batch.windows.at(position + i).source_run != id)
        throw ValidationError("save_frames: windows are not grouped in split run order");
    }
    position += n;
    runs.push_back({{"id", id}, {"windows", n}});
  }
  if (position != batch.windows.size())
    throw ValidationError("save_frames: windows from runs outside the split");
  return {{"runs", runs}, {"window_count", batch.windows.size()}};
}

}  // namespace

void save_frames(const std::filesystem::path& path, const FramesFile& frames) {
  const auto& cfg = frames.config;
  const auto names = feature_names(cfg.feature_set);
  const std::array<Partition, 3> parts{{{"train", &frames.train, &frames.split.train},
                                        {"val", &frames.val, &frames.split.val},
                                        {"test", &frames.test, &frames.split.test}}};
  for (const auto& p : parts) {
    if (!p.batch->windows.empty() && !(p.batch->norm_stats == frames.train.norm_stats))
      throw ValidationError("save_frames: partitions normalized with different statistics");
    for (const auto& w : p.batch->windows) {
      if (w.features.rows() != static_cast<std::size_t>(cfg.windowsize) ||
          w.features.cols() != names.size())
        throw ValidationError("save_frames: window shape does not match the frames config");
    }
  }

  json partitions = json::object();
  for (const auto& p : parts) partitions[p.label] = partition_header(*p.batch, *p.run_ids);

  const json header{
      {"version", kFramesFormatVersion},
      {"windowsize", cfg.windowsize},
      {"overlap", cfg.overlap},
      {"features", std::string(to_string(cfg.feature_set))},
      {"F", names.size()},
      {"feature_names", names},
      {"target_alignment", std::string(to_string(cfg.alignment))},
      {"norm_stats", {{"mean", frames.train.norm_stats.mean}, {"sd", frames.train.norm_stats.sd}}},
      {"window_count", frames.window_count()},
      {"partitions", partitions},
  };

  detail::ContainerWriter writer(path, kFramesMagic, header);
  for (const auto& p : parts) {
    for (const auto& w : p.batch->windows) {
      writer.write(static_cast<double>(w.start_step));
      writer.write(w.target);
      writer.write(w.features.values());
    }
  }
  writer.finish();
}

FramesFile load_frames(const std::filesystem::path& path) {
  detail::ContainerReader reader(path, kFramesMagic, "frames");
  const auto& h = reader.header();
  FramesFile frames;
  std::vector<std::pair<std::string, std::size_t>> layout[3];
  try {
    if (h.at("version").get<int>() != kFramesFormatVersion)
      throw IoError(path.string() + ": unsupported frames version " + h.at("version").dump());
    auto& cfg = frames.config;
    cfg.windowsize = h.at("windowsize").get<std::int64_t>();
    cfg.overlap = h.at("overlap").get<std::int64_t>();
    cfg.feature_set = feature_set_from_string(h.at("features").get<std::string>());
    cfg.alignment = target_alignment_from_string(h.at("target_alignment").get<std::string>());
    if (h.at("F").get<std::size_t>() != feature_count(cfg.feature_set) ||
        h.at("feature_names").get<std::vector<std::string>>() != feature_names(cfg.feature_set))
      throw IoError(path.string() + ": feature header inconsistent with feature set");
    if (cfg.windowsize < 1) throw IoError(path.string() + ": invalid windowsize");
    NormStats stats;
    stats.mean = h.at("norm_stats").at("mean").get<std::vector<double>>();
    stats.sd = h.at("norm_stats").at("sd").get<std::vector<double>>();
    if (stats.mean.size() != feature_count(cfg.feature_set) || stats.sd.size() != stats.mean.size())
      throw IoError(path.string() + ": norm_stats length does not match F");
    frames.train.norm_stats = frames.val.norm_stats = frames.test.norm_stats = stats;

    const char* labels[3] = {"train", "val", "test"};
    std::vector<std::string>* ids[3] = {&frames.split.train, &frames.split.val, &frames.split.test};
    std::size_t total = 0;
    for (int i = 0; i < 3; ++i) {
      for (const auto& r : h.at("partitions").at(labels[i]).at("runs")) {
        const auto id = r.at("id").get<std::string>();
        const auto n = r.at("windows").get<std::size_t>();
        ids[i]->push_back(id);
        layout[i].emplace_back(id, n);
        total += n;
      }
    }
    if (total != h.at("window_count").get<std::size_t>())
      throw IoError(path.string() + ": window_count does not match partition sizes");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": malformed frames header: " + e.what());
  }

  const auto rows = static_cast<std::size_t>(frames.config.windowsize);
  const auto cols = feature_count(frames.config.feature_set);
  WindowBatch* batches[3] = {&frames.train, &frames.val, &frames.test};
  for (int i = 0; i < 3; ++i) {
    for (const auto& [id, n] : layout[i]) {
      for (std::size_t k = 0; k < n; ++k) {
        DataFrameWindow w;
        w.source_run = id;
        w.start_step = static_cast<std::int64_t>(reader.read_one());
        w.target = reader.read_one();
        w.features = FeatureMatrix(rows, cols);
        reader.read(w.features.values());
        batches[i]->windows.push_back(std::move(w));
      }
    }
  }
  reader.expect_end();
  return frames;
}

void write_frames_sample_csv(std::ostream& out, const FramesFile& frames,
                             std::size_t max_windows) {
  const auto names = feature_names(frames.config.feature_set);
  out << "partition,source_run,window,row,step";
  for (const auto& n : names) out << ',' << n;
  out << ",target\n";
  const std::pair<const char*, const WindowBatch*> parts[] = {
      {"train", &frames.train}, {"val", &frames.val}, {"test", &frames.test}};
  for (const auto& [label, batch] : parts) {
    const auto n = std::min(max_windows, batch->windows.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& w = batch->windows[i];
      for (std::size_t r = 0; r < w.features.rows(); ++r) {
        out << label << ',' << w.source_run << ',' << i << ',' << r << ','
            << w.start_step + static_cast<std::int64_t>(r);
        for (double v : w.features.row(r)) out << ',' << format_double(v);
        out << ',' << format_double(w.target) << '\n';
      }
    }
  }
}

}  // namespace wortsense
