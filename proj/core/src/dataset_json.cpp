#include "hacl/dataset_json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "hacl/error.hpp"
#include "io_util.hpp"
#include "json_codec.hpp"

namespace hacl {

using nlohmann::json;

namespace detail {

json rle_to_json(const RleMask& mask) {
  return json{{"size", {mask.height(), mask.width()}}, {"counts", mask.to_compressed()}};
}

RleMask rle_from_json(const json& seg) {
  if (!seg.is_object()) throw Error(Errc::ParseError, "segmentation must be an RLE object (polygons unsupported)");
  const auto& size = seg.at("size");
  if (!size.is_array() || size.size() != 2) throw Error(Errc::ParseError, "RLE size must be [h, w]");
  const auto h = size[0].get<std::uint32_t>();
  const auto w = size[1].get<std::uint32_t>();
  const auto& counts = seg.at("counts");
  if (counts.is_string()) return RleMask::from_compressed(h, w, counts.get<std::string>());
  if (counts.is_array()) return RleMask(h, w, counts.get<std::vector<std::uint32_t>>());
  throw Error(Errc::ParseError, "RLE counts must be a string or an integer list");
}

json box_to_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(Errc::ParseError, "bbox must be [x, y, w, h]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace detail

namespace {

json parse_or_throw(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, source + " at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

// Runs `fn`, turning JSON type/key errors into ParseError tagged with `where`.
template <typename Fn>
decltype(auto) with_context(const std::string& source, const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, source + " at " + where + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError || e.code() == Errc::DimensionMismatch) {
      throw Error(Errc::ParseError, source + " at " + where + ": " + e.what());
    }
    throw;
  }
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.image_id = j.at("image_id").get<std::int64_t>();
  if (j.contains("segmentation") && !j["segmentation"].is_null()) d.mask = detail::rle_from_json(j["segmentation"]);
  if (j.contains("bbox")) {
    d.box = detail::box_from_json(j["bbox"]);
  } else if (d.mask) {
    d.box = d.mask->bbox();
  } else {
    throw Error(Errc::ParseError, "result needs a bbox or a segmentation");
  }
  d.score = j.contains("score") ? j["score"].get<double>() : 1.0;
  if (!std::isfinite(d.score)) throw Error(Errc::ParseError, "score must be finite");
  if (j.contains("category_id")) d.level = level_from_category(j["category_id"].get<int>());
  return d;
}

}  // namespace

std::vector<std::int64_t> Dataset::image_ids() const {
  std::vector<std::int64_t> ids;
  ids.reserve(images.size());
  for (const auto& im : images) ids.push_back(im.id);
  return ids;
}

Dataset parse_dataset(std::string_view text, const std::string& source) {
  const json root = parse_or_throw(text, source);
  Dataset ds;
  with_context(source, "/images", [&] {
    for (const auto& im : root.at("images")) {
      ImageInfo info;
      info.id = im.at("id").get<std::int64_t>();
      info.width = im.at("width").get<std::uint32_t>();
      info.height = im.at("height").get<std::uint32_t>();
      if (im.contains("file_name")) info.file_name = im["file_name"].get<std::string>();
      ds.images.push_back(std::move(info));
    }
    return 0;
  });
  const auto& anns = with_context(source, "/annotations", [&]() -> const json& { return root.at("annotations"); });
  for (std::size_t i = 0; i < anns.size(); ++i) {
    with_context(source, "/annotations/" + std::to_string(i), [&] {
      const auto& a = anns[i];
      GroundTruth gt;
      gt.id = a.contains("id") ? a["id"].get<std::int64_t>() : std::int64_t(i + 1);
      gt.image_id = a.at("image_id").get<std::int64_t>();
      if (a.contains("segmentation") && !a["segmentation"].is_null()) {
        gt.mask = detail::rle_from_json(a["segmentation"]);
      }
      if (a.contains("bbox")) {
        gt.box = detail::box_from_json(a["bbox"]);
      } else if (gt.mask) {
        gt.box = gt.mask->bbox();
      } else {
        throw Error(Errc::ParseError, "annotation needs a bbox or a segmentation");
      }
      if (a.contains("area")) {
        gt.area = a["area"].get<double>();
      } else {
        gt.area = gt.mask ? double(gt.mask->area()) : gt.box.area();
      }
      const int category = a.contains("category_id") ? a["category_id"].get<int>() : 0;
      gt.level = level_from_category(category);
      ds.category_ids.push_back(category);
      ds.source_thresholds.push_back(a.contains("source_threshold") ? a["source_threshold"].get<double>()
                                                                    : std::numeric_limits<double>::quiet_NaN());
      ds.annotations.push_back(std::move(gt));
      return 0;
    });
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return parse_dataset(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

std::vector<Detection> parse_detections(std::string_view text, const std::string& source) {
  const json root = parse_or_throw(text, source);
  const json* list = &root;
  std::string base;
  if (root.is_object()) {
    list = &with_context(source, "/annotations", [&]() -> const json& { return root.at("annotations"); });
    base = "/annotations";
  }
  if (!list->is_array()) throw Error(Errc::ParseError, source + ": results must be a JSON array");
  std::vector<Detection> out;
  out.reserve(list->size());
  for (std::size_t i = 0; i < list->size(); ++i) {
    out.push_back(with_context(source, base + "/" + std::to_string(i), [&] { return detection_from_json((*list)[i]); }));
  }
  return out;
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return parse_detections(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                          path.string());
}

namespace {

json metric_set_to_json(const MetricSet& m) {
  json ar = json::object();
  for (std::size_t i = 0; i < m.max_dets.size(); ++i) ar["AR@" + std::to_string(m.max_dets[i])] = m.ar[i];
  return json{{"AR", ar},
              {"AR_S", m.ar_small},
              {"AR_M", m.ar_medium},
              {"AR_L", m.ar_large},
              {"AP", m.ap},
              {"AP50", m.ap50},
              {"AP75", m.ap75},
              {"AP_S", m.ap_small},
              {"AP_M", m.ap_medium},
              {"AP_L", m.ap_large}};
}

}  // namespace

std::string eval_result_to_json(const EvalResult& result, int indent) {
  json j;
  j["box"] = metric_set_to_json(result.box);
  j["mask"] = result.mask ? metric_set_to_json(*result.mask) : json(nullptr);
  json levels = json::object();
  for (const auto& [level, ar] : result.per_level_ar) levels[std::string(to_string(level))] = ar;
  j["per_level_AR"] = levels;
  return j.dump(indent) + "\n";
}

}  // namespace hacl
