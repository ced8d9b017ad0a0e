#pragma once

#include <json.hpp>

#include "hacl/mask.hpp"

namespace hacl::detail {

nlohmann::json rle_to_json(const RleMask& mask);
RleMask rle_from_json(const nlohmann::json& segmentation);
nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& bbox);

}  // namespace hacl::detail
