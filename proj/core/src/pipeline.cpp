#include "hacl/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "hacl/dataset_json.hpp"
#include "hacl/error.hpp"
#include "io_util.hpp"
#include "json_codec.hpp"

namespace hacl {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw Error(Errc::InvalidConfig, std::string(key) + ": expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

std::int64_t parse_int(std::string_view key, std::string_view value) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(Errc::InvalidConfig, std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
  }
  return out;
}

std::int64_t parse_non_negative(std::string_view key, std::string_view value) {
  const auto v = parse_int(key, value);
  if (v < 0) throw Error(Errc::InvalidConfig, std::string(key) + " must be >= 0");
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "off" || value == "no" || value == "0") return false;
  throw Error(Errc::InvalidConfig, std::string(key) + ": expected a boolean, got '" + std::string(value) + "'");
}

std::vector<double> parse_double_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(parse_double(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

template <typename Apply>
void parse_key_values(std::string_view text, const std::string& source, Apply&& apply) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::InvalidConfig, source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(e.code(), source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

void PipelineConfig::validate() const {
  cluster.validate();
  crf.validate();
  if (!(cover_percent > 0 && cover_percent < 100)) throw Error(Errc::InvalidConfig, "cover_percent must lie in (0, 100)");
  if (!(dedup_iou > 0 && dedup_iou <= 1)) throw Error(Errc::InvalidConfig, "dedup_iou must lie in (0, 1]");
  if (filter.max_corner_count < 0 || filter.max_corner_count > 4) {
    throw Error(Errc::InvalidConfig, "max_corner_count must lie in [0, 4]");
  }
  if (workers == 0) throw Error(Errc::InvalidConfig, "workers must be >= 1");
  if (npy_patch_size == 0) throw Error(Errc::InvalidConfig, "npy_patch_size must be >= 1");
}

void apply_pipeline_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "thresholds") {
    cfg.cluster.thresholds = parse_double_list(key, value);
  } else if (key == "connectivity") {
    if (value == "4") {
      cfg.cluster.connectivity = Connectivity::Four;
    } else if (value == "8") {
      cfg.cluster.connectivity = Connectivity::Eight;
    } else {
      throw Error(Errc::InvalidConfig, "connectivity must be 4 or 8");
    }
  } else if (key == "cover_percent") {
    cfg.cover_percent = parse_double(key, value);
  } else if (key == "crf") {
    cfg.crf_enabled = parse_bool(key, value);
  } else if (key == "crf_iterations") {
    cfg.crf.iterations = static_cast<int>(parse_non_negative(key, value));
  } else if (key == "crf_spatial_sigma") {
    cfg.crf.spatial_sigma = parse_double(key, value);
  } else if (key == "crf_spatial_weight") {
    cfg.crf.spatial_weight = parse_double(key, value);
  } else if (key == "crf_bilateral_sigma_xy") {
    cfg.crf.bilateral_sigma_xy = parse_double(key, value);
  } else if (key == "crf_bilateral_sigma_rgb") {
    cfg.crf.bilateral_sigma_rgb = parse_double(key, value);
  } else if (key == "crf_bilateral_weight") {
    cfg.crf.bilateral_weight = parse_double(key, value);
  } else if (key == "crf_unary_confidence") {
    cfg.crf.unary_confidence = parse_double(key, value);
  } else if (key == "min_crf_iou") {
    cfg.filter.min_crf_iou = parse_double(key, value);
  } else if (key == "min_area_px") {
    cfg.filter.min_area_px = static_cast<std::uint64_t>(parse_non_negative(key, value));
  } else if (key == "max_corner_count") {
    cfg.filter.max_corner_count = static_cast<int>(parse_non_negative(key, value));
  } else if (key == "dedup_iou") {
    cfg.dedup_iou = parse_double(key, value);
  } else if (key == "workers") {
    cfg.workers = static_cast<unsigned>(parse_non_negative(key, value));
  } else if (key == "npy_patch_size") {
    cfg.npy_patch_size = static_cast<std::uint32_t>(parse_non_negative(key, value));
  } else {
    throw Error(Errc::InvalidConfig, "unknown pipeline key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_pipeline_config(std::string_view text, const std::string& source) {
  PipelineConfig cfg;
  parse_key_values(text, source, [&](std::string_view k, std::string_view v) { apply_pipeline_setting(cfg, k, v); });
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_text(path), path.string());
}

void apply_schedule_setting(ScheduleConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "total_iters") {
    cfg.total_iters = parse_int(key, value);
  } else if (key == "burn_in_iters") {
    cfg.burn_in_iters = parse_int(key, value);
  } else if (key == "lr_start") {
    cfg.lr_start = parse_double(key, value);
  } else if (key == "lr_end") {
    cfg.lr_end = parse_double(key, value);
  } else if (key == "label_weight_start") {
    cfg.label_weight_start = parse_double(key, value);
  } else if (key == "label_weight_end") {
    cfg.label_weight_end = parse_double(key, value);
  } else if (key == "teacher_weight_start") {
    cfg.teacher_weight_start = parse_double(key, value);
  } else if (key == "teacher_weight_end") {
    cfg.teacher_weight_end = parse_double(key, value);
  } else if (key == "ema_momentum") {
    cfg.ema_momentum = parse_double(key, value);
  } else {
    throw Error(Errc::InvalidConfig, "unknown schedule key '" + std::string(key) + "'");
  }
}

ScheduleConfig parse_schedule_config(std::string_view text, const std::string& source) {
  ScheduleConfig cfg;
  parse_key_values(text, source, [&](std::string_view k, std::string_view v) { apply_schedule_setting(cfg, k, v); });
  cfg.validate();
  return cfg;
}

ScheduleConfig load_schedule_config(const std::filesystem::path& path) {
  return parse_schedule_config(read_text(path), path.string());
}

ImageLabels generate_labels(const FeatureMap& fm, const RgbImage* image, const PipelineConfig& cfg) {
  cfg.validate();
  const GridGeometry& grid = fm.geometry();
  ImageLabels out;
  out.image_id = fm.image_id();
  out.width = grid.pixel_width();
  out.height = grid.pixel_height();
  out.thresholds = cfg.cluster.thresholds;

  std::optional<CrfModel> crf;
  if (image && cfg.crf_enabled) {
    if (image->width != out.width || image->height != out.height) {
      throw Error(Errc::DimensionMismatch, "image " + image->image_id + " is " + std::to_string(image->width) + "x" +
                                               std::to_string(image->height) + ", features cover " +
                                               std::to_string(out.width) + "x" + std::to_string(out.height));
    }
    crf.emplace(*image, cfg.crf);
    out.crf_applied = true;
  }

  const auto snapshots = cluster(fm, cfg.cluster);

  // A region id denotes the same cell set in every snapshot it survives to,
  // so its post-processed mask is computed once.
  struct Processed {
    Bitmap mask;
    double pre_crf_iou = 1.0;
  };
  std::unordered_map<std::uint32_t, Processed> cache;

  std::vector<std::vector<MaskRecord>> per_threshold;
  for (const auto& snap : snapshots) {
    std::vector<MaskRecord> records;
    for (const auto& region : snap.regions) {
      auto it = cache.find(region.id);
      if (it == cache.end()) {
        Processed p;
        p.mask = fill_holes(region_to_mask(region, grid));
        if (crf) {
          Bitmap refined = crf->refine(p.mask);
          p.pre_crf_iou = refined.empty() ? 0.0 : bitmap_iou(p.mask, refined);
          p.mask = std::move(refined);
        }
        it = cache.emplace(region.id, std::move(p)).first;
      }
      if (it->second.mask.empty()) continue;
      records.push_back(MaskRecord::from_bitmap(out.image_id, it->second.mask, snap.threshold, it->second.pre_crf_iou));
    }
    out.regions_per_threshold.push_back(snap.regions.size());
    auto kept = filter_masks(records, out.width, out.height, cfg.filter);
    out.labels_per_threshold.push_back(kept.size());
    per_threshold.push_back(std::move(kept));
  }

  out.masks = ensemble(per_threshold, cfg.dedup_iou);
  out.forest = build_forest(std::span<const MaskRecord>(out.masks), cfg.cover_percent);
  return out;
}

std::vector<std::filesystem::path> list_feature_files(const std::filesystem::path& feature_dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(feature_dir, ec)) {
    throw Error(Errc::Io, feature_dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(feature_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".fmap" || ext == ".npy") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

json categories_json() {
  return json::array({json{{"id", 1}, {"name", "whole"}}, json{{"id", 2}, {"name", "part"}},
                      json{{"id", 3}, {"name", "subpart"}}});
}

json box_json(const Box& b) {
  return json::array({std::llround(b.x), std::llround(b.y), std::llround(b.w), std::llround(b.h)});
}

}  // namespace

std::string annotations_to_json(const std::vector<ImageLabels>& labels) {
  json root;
  root["categories"] = categories_json();
  json images = json::array();
  json anns = json::array();
  std::int64_t ann_id = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& im = labels[i];
    const auto image_id = static_cast<std::int64_t>(i + 1);
    images.push_back({{"id", image_id}, {"file_name", im.image_id}, {"width", im.width}, {"height", im.height}});
    for (std::size_t m = 0; m < im.masks.size(); ++m) {
      const auto& rec = im.masks[m];
      anns.push_back({{"id", ann_id++},
                      {"image_id", image_id},
                      {"category_id", static_cast<int>(im.forest.level[m])},
                      {"bbox", box_json(rec.bbox)},
                      {"area", rec.area_px},
                      {"segmentation", detail::rle_to_json(rec.mask)},
                      {"iscrowd", 0},
                      {"score", 1.0},
                      {"source_threshold", rec.source_threshold}});
    }
  }
  root["images"] = std::move(images);
  root["annotations"] = std::move(anns);
  return root.dump() + "\n";
}

namespace {

json level_counts_json(const LevelCounts& c) {
  return json{{"whole", c.whole},
              {"part", c.part},
              {"subpart", c.subpart},
              {"fractions",
               {{"whole", c.fraction(HierLevel::Whole)},
                {"part", c.fraction(HierLevel::Part)},
                {"subpart", c.fraction(HierLevel::Subpart)}}}};
}

}  // namespace

std::string generate_stats_to_json(const std::vector<ImageLabels>& labels) {
  json per_image = json::array();
  std::vector<double> thresholds = labels.empty() ? std::vector<double>{} : labels.front().thresholds;
  std::vector<double> label_sum(thresholds.size(), 0.0);
  std::vector<double> region_sum(thresholds.size(), 0.0);
  double ensemble_sum = 0;
  LevelCounts levels;
  for (const auto& im : labels) {
    const auto counts = level_distribution(im.forest);
    levels += counts;
    ensemble_sum += double(im.masks.size());
    for (std::size_t t = 0; t < thresholds.size() && t < im.labels_per_threshold.size(); ++t) {
      label_sum[t] += double(im.labels_per_threshold[t]);
      region_sum[t] += double(im.regions_per_threshold[t]);
    }
    per_image.push_back({{"image", im.image_id},
                         {"regions_per_threshold", im.regions_per_threshold},
                         {"labels_per_threshold", im.labels_per_threshold},
                         {"ensemble_labels", im.masks.size()},
                         {"crf_applied", im.crf_applied},
                         {"levels", {{"whole", counts.whole}, {"part", counts.part}, {"subpart", counts.subpart}}}});
  }
  const double n = labels.empty() ? 1.0 : double(labels.size());
  json by_threshold = json::array();
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    by_threshold.push_back({{"threshold", thresholds[t]},
                            {"mean_regions_per_image", region_sum[t] / n},
                            {"mean_labels_per_image", label_sum[t] / n}});
  }
  json root{{"images", labels.size()},
            {"per_threshold", by_threshold},
            {"mean_ensemble_labels_per_image", ensemble_sum / n},
            {"levels", level_counts_json(levels)},
            {"per_image", per_image}};
  return root.dump(2) + "\n";
}

GenerateSummary run_generate(const GenerateOptions& options) {
  options.config.validate();
  auto log = options.log ? options.log : [](const std::string& msg) { std::cerr << msg << '\n'; };
  const auto files = list_feature_files(options.feature_dir);
  if (files.empty()) throw Error(Errc::Io, "no .fmap or .npy files in " + options.feature_dir.string());

  std::vector<std::optional<ImageLabels>> results(files.size());
  std::vector<std::string> errors(files.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      try {
        const FeatureMap fm = load_any_feature_map(files[i], options.config.npy_patch_size);
        std::optional<RgbImage> image;
        if (options.image_dir && options.config.crf_enabled) {
          const auto path = find_image(*options.image_dir, fm.image_id());
          if (!path) throw Error(Errc::MissingImage, "no image for '" + fm.image_id() + "' in " + options.image_dir->string());
          image = load_image(*path);
        }
        results[i] = generate_labels(fm, image ? &*image : nullptr, options.config);
      } catch (const std::exception& e) {
        errors[i] = files[i].filename().string() + ": " + e.what();
      }
    }
  };

  const unsigned count = std::max(1u, std::min<unsigned>(options.config.workers, static_cast<unsigned>(files.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  GenerateSummary summary;
  summary.images_total = files.size();
  std::vector<ImageLabels> ok;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (results[i]) {
      summary.annotations += results[i]->masks.size();
      ok.push_back(std::move(*results[i]));
    } else {
      log("skipped " + errors[i]);
      summary.failures.push_back(errors[i]);
    }
  }
  summary.images_ok = ok.size();
  if (!ok.empty()) {
    detail::write_text_file(options.out_path, annotations_to_json(ok));
    if (options.stats_path) detail::write_text_file(*options.stats_path, generate_stats_to_json(ok));
  }
  return summary;
}

std::string annotation_stats_to_json(const std::filesystem::path& annotations) {
  const Dataset ds = load_dataset(annotations);
  std::map<std::int64_t, std::size_t> per_image;
  for (const auto& im : ds.images) per_image[im.id] = 0;
  std::vector<HierLevel> levels;
  std::map<std::string, std::size_t> by_threshold;
  std::size_t unlabeled = 0;
  for (std::size_t i = 0; i < ds.annotations.size(); ++i) {
    ++per_image[ds.annotations[i].image_id];
    if (ds.annotations[i].level) {
      levels.push_back(*ds.annotations[i].level);
    } else {
      ++unlabeled;
    }
    const double t = ds.source_thresholds[i];
    if (!std::isnan(t)) ++by_threshold[detail::format_double(t)];
  }
  const double n = per_image.empty() ? 1.0 : double(per_image.size());
  std::size_t max_labels = 0;
  for (const auto& [_, c] : per_image) max_labels = std::max(max_labels, c);
  json thresholds = json::object();
  for (const auto& [t, c] : by_threshold) thresholds[t] = {{"labels", c}, {"mean_per_image", double(c) / n}};
  json root{{"images", per_image.size()},
            {"annotations", ds.annotations.size()},
            {"mean_labels_per_image", double(ds.annotations.size()) / n},
            {"max_labels_per_image", max_labels},
            {"levels", level_counts_json(level_distribution(std::span<const HierLevel>(levels)))},
            {"annotations_without_level", unlabeled},
            {"source_thresholds", thresholds}};
  return root.dump(2) + "\n";
}

}  // namespace hacl
