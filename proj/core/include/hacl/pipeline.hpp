#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hacl/clustering.hpp"
#include "hacl/feature_map.hpp"
#include "hacl/hierarchy.hpp"
#include "hacl/image_io.hpp"
#include "hacl/postprocess.hpp"
#include "hacl/schedule.hpp"

namespace hacl {

struct PipelineConfig {
  ClusterConfig cluster;
  double cover_percent = 90.0;
  bool crf_enabled = true;  // only takes effect when an image is available
  CrfParams crf;
  FilterRules filter;
  double dedup_iou = 0.95;
  unsigned workers = 1;
  std::uint32_t npy_patch_size = 8;

  void validate() const;
};

// Flat "key = value" text; '#' starts a comment; unknown keys are errors.
// Keys: thresholds, connectivity, cover_percent, crf, crf_iterations,
// crf_spatial_sigma, crf_spatial_weight, crf_bilateral_sigma_xy,
// crf_bilateral_sigma_rgb, crf_bilateral_weight, crf_unary_confidence,
// min_crf_iou, min_area_px, max_corner_count, dedup_iou, workers,
// npy_patch_size.
void apply_pipeline_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);
PipelineConfig parse_pipeline_config(std::string_view text, const std::string& source = "<memory>");
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Keys: total_iters, burn_in_iters, lr_start, lr_end, label_weight_start,
// label_weight_end, teacher_weight_start, teacher_weight_end, ema_momentum.
void apply_schedule_setting(ScheduleConfig& cfg, std::string_view key, std::string_view value);
ScheduleConfig parse_schedule_config(std::string_view text, const std::string& source = "<memory>");
ScheduleConfig load_schedule_config(const std::filesystem::path& path);

struct ImageLabels {
  std::string image_id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<MaskRecord> masks;  // post-ensemble
  HierarchyForest forest;
  std::vector<double> thresholds;
  std::vector<std::size_t> regions_per_threshold;
  std::vector<std::size_t> labels_per_threshold;  // after filtering
  bool crf_applied = false;
};

/// Merge -> per-threshold post-process -> ensemble -> hierarchy for one image.
/// `image` enables CRF (if configured); its size must match the feature grid.
ImageLabels generate_labels(const FeatureMap& fm, const RgbImage* image, const PipelineConfig& cfg);

struct GenerateOptions {
  std::filesystem::path feature_dir;
  std::optional<std::filesystem::path> image_dir;
  std::filesystem::path out_path;
  std::optional<std::filesystem::path> stats_path;
  PipelineConfig config;
  // Receives per-image failure messages; defaults to stderr.
  std::function<void(const std::string&)> log;
};

struct GenerateSummary {
  std::size_t images_total = 0;
  std::size_t images_ok = 0;
  std::vector<std::string> failures;
  std::size_t annotations = 0;
};

// Feature files are *.fmap and *.npy directly under feature_dir, processed in
// file-name order. Output is identical for any worker count.
std::vector<std::filesystem::path> list_feature_files(const std::filesystem::path& feature_dir);
GenerateSummary run_generate(const GenerateOptions& options);

// Annotation JSON (category_id = level) for already generated labels.
std::string annotations_to_json(const std::vector<ImageLabels>& labels);
std::string generate_stats_to_json(const std::vector<ImageLabels>& labels);

// Summary of an annotation file: labels per image, level and threshold mix.
std::string annotation_stats_to_json(const std::filesystem::path& annotations);

}  // namespace hacl
