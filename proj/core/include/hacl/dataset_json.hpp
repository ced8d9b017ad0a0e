#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hacl/eval.hpp"

namespace hacl {

struct ImageInfo {
  std::int64_t id = 0;
  std::string file_name;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

// Ground-truth side of the detection-JSON layout:
//   {"images": [{id, width, height, file_name?}],
//    "annotations": [{id, image_id, bbox, area?, segmentation?: {size, counts}, category_id?}]}
// `counts` may be the integer-list or the compressed string form. When
// `area` is missing it falls back to mask area, then box area.
struct Dataset {
  std::vector<ImageInfo> images;
  std::vector<GroundTruth> annotations;
  // category_id of each annotation (0 when absent), parallel to `annotations`.
  std::vector<int> category_ids;
  // Optional "source_threshold" of each annotation (NaN when absent).
  std::vector<double> source_thresholds;

  std::vector<std::int64_t> image_ids() const;
};

// Throws Errc::ParseError naming `source` and the byte offset (or JSON path).
Dataset parse_dataset(std::string_view text, const std::string& source = "<memory>");
Dataset load_dataset(const std::filesystem::path& path);

// Results: either a bare array of {image_id, bbox, score, segmentation?,
// category_id?} or a dataset object whose "annotations" are used as results
// (score defaults to 1). category_id 1..3 is read as the hierarchy level.
std::vector<Detection> parse_detections(std::string_view text, const std::string& source = "<memory>");
std::vector<Detection> load_detections(const std::filesystem::path& path);

std::string eval_result_to_json(const EvalResult& result, int indent = 2);

}  // namespace hacl
