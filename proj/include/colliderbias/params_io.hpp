#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "colliderbias/structures.hpp"

namespace colliderbias {

// JSON schema:
//   {"kind": "V", "p_left": f, "p_right": f,
//    "p_c_given": {"00": f, "01": f, "10": f, "11": f},
//    "p_x_given_a": {"0": f, "1": f}, "p_y_given_b": {...}, "p_d_given_c": {...}}
// Key "01" of p_c_given means left parent = 0, right parent = 1. Optional
// blocks are emitted only when set. Unknown keys are rejected.
nlohmann::json params_to_json(const StructureParams& params);
StructureParams params_from_json(const nlohmann::json& doc);

std::string serialize_params(const StructureParams& params);
StructureParams parse_params(std::string_view text);
StructureParams load_params_file(const std::string& path);

// Sets one field from a dotted key ("p_left", "p_c_given.01",
// "p_d_given_c.1", "kind"). Used by command-line overrides.
void set_param_field(StructureParams& params, std::string_view key,
                     std::string_view value);

}  // namespace colliderbias
