#pragma once

#include <string>

#include <json.hpp>

#include "bpre/environment.h"

namespace bpre {

// {"states":[{"type":"finite","probs":[...]} | {"type":"lf","m":..,"b":..}], "weights":[...]}
// Malformed text raises Contract_error naming line and column.
auto parse_model(const std::string& text) -> Environment_model;
auto load_model(const std::string& path) -> Environment_model;
auto model_to_json(const Environment_model& model) -> nlohmann::json;

}  // namespace bpre
