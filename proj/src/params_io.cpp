#include "colliderbias/params_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "colliderbias/error.hpp"

namespace colliderbias {

using nlohmann::json;

namespace {

json conditional_to_json(const BinaryConditional& bc) {
  json out = json::object();
  out["0"] = bc.given0;
  out["1"] = bc.given1;
  return out;
}

double number_at(const json& obj, const std::string& key,
                 const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw BiasError(ErrorCode::MissingField, where + "." + key);
  }
  if (!it->is_number()) {
    throw BiasError(ErrorCode::ParseError, where + "." + key +
                                               " must be a number");
  }
  return it->get<double>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> keys,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) {
      throw BiasError(ErrorCode::ParseError,
                      "unknown key '" + it.key() + "' in " + where);
    }
  }
}

BinaryConditional conditional_from_json(const json& obj,
                                        const std::string& where) {
  if (!obj.is_object()) {
    throw BiasError(ErrorCode::ParseError, where + " must be an object");
  }
  reject_unknown_keys(obj, {"0", "1"}, where);
  return {number_at(obj, "0", where), number_at(obj, "1", where)};
}

double parse_double(std::string_view text, std::string_view key) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw BiasError(ErrorCode::ParseError, "value for " + std::string(key) +
                                               " is not a number: '" +
                                               std::string(text) + "'");
  }
  return value;
}

}  // namespace

json params_to_json(const StructureParams& params) {
  json out = json::object();
  out["kind"] = std::string(to_string(params.kind));
  out["p_left"] = params.p_left;
  if (params.p_right) out["p_right"] = *params.p_right;
  const ColliderTable& c = params.p_c_given;
  out["p_c_given"] = {{"00", c.p00}, {"01", c.p01}, {"10", c.p10},
                      {"11", c.p11}};
  if (params.p_x_given_a) {
    out["p_x_given_a"] = conditional_to_json(*params.p_x_given_a);
  }
  if (params.p_y_given_b) {
    out["p_y_given_b"] = conditional_to_json(*params.p_y_given_b);
  }
  if (params.p_d_given_c) {
    out["p_d_given_c"] = conditional_to_json(*params.p_d_given_c);
  }
  return out;
}

StructureParams params_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw BiasError(ErrorCode::ParseError, "parameter document must be an object");
  }
  reject_unknown_keys(doc,
                      {"kind", "p_left", "p_right", "p_c_given", "p_x_given_a",
                       "p_y_given_b", "p_d_given_c"},
                      "parameters");
  StructureParams p;
  auto kind = doc.find("kind");
  if (kind == doc.end()) throw BiasError(ErrorCode::MissingField, "kind");
  if (!kind->is_string()) {
    throw BiasError(ErrorCode::ParseError, "kind must be a string");
  }
  p.kind = parse_kind(kind->get<std::string>());
  p.p_left = number_at(doc, "p_left", "parameters");
  if (doc.contains("p_right")) p.p_right = number_at(doc, "p_right", "parameters");

  auto collider = doc.find("p_c_given");
  if (collider == doc.end()) {
    throw BiasError(ErrorCode::MissingField, "p_c_given");
  }
  if (!collider->is_object()) {
    throw BiasError(ErrorCode::ParseError, "p_c_given must be an object");
  }
  reject_unknown_keys(*collider, {"00", "01", "10", "11"}, "p_c_given");
  p.p_c_given.p00 = number_at(*collider, "00", "p_c_given");
  p.p_c_given.p01 = number_at(*collider, "01", "p_c_given");
  p.p_c_given.p10 = number_at(*collider, "10", "p_c_given");
  p.p_c_given.p11 = number_at(*collider, "11", "p_c_given");

  if (doc.contains("p_x_given_a")) {
    p.p_x_given_a = conditional_from_json(doc["p_x_given_a"], "p_x_given_a");
  }
  if (doc.contains("p_y_given_b")) {
    p.p_y_given_b = conditional_from_json(doc["p_y_given_b"], "p_y_given_b");
  }
  if (doc.contains("p_d_given_c")) {
    p.p_d_given_c = conditional_from_json(doc["p_d_given_c"], "p_d_given_c");
  }
  return p;
}

std::string serialize_params(const StructureParams& params) {
  return params_to_json(params).dump();
}

StructureParams parse_params(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw BiasError(ErrorCode::ParseError, "malformed JSON parameter document");
  }
  return params_from_json(doc);
}

StructureParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BiasError(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_params(buf.str());
}

void set_param_field(StructureParams& params, std::string_view key,
                     std::string_view value) {
  if (key == "kind") {
    params.kind = parse_kind(value);
    return;
  }
  const double v = parse_double(value, key);
  if (key == "p_left") {
    params.p_left = v;
    return;
  }
  if (key == "p_right") {
    params.p_right = v;
    return;
  }
  const auto dot = key.find('.');
  if (dot == std::string_view::npos) {
    throw BiasError(ErrorCode::ParseError,
                    "unknown parameter '" + std::string(key) + "'");
  }
  const std::string_view block = key.substr(0, dot);
  const std::string_view index = key.substr(dot + 1);
  if (block == "p_c_given") {
    ColliderTable& c = params.p_c_given;
    if (index == "00") c.p00 = v;
    else if (index == "01") c.p01 = v;
    else if (index == "10") c.p10 = v;
    else if (index == "11") c.p11 = v;
    else throw BiasError(ErrorCode::ParseError, "bad index in " + std::string(key));
    return;
  }
  std::optional<BinaryConditional>* slot = nullptr;
  if (block == "p_x_given_a") slot = &params.p_x_given_a;
  else if (block == "p_y_given_b") slot = &params.p_y_given_b;
  else if (block == "p_d_given_c") slot = &params.p_d_given_c;
  if (slot == nullptr || (index != "0" && index != "1")) {
    throw BiasError(ErrorCode::ParseError,
                    "unknown parameter '" + std::string(key) + "'");
  }
  if (!slot->has_value()) *slot = BinaryConditional{};
  if (index == "0") (*slot)->given0 = v;
  else (*slot)->given1 = v;
}

}  // namespace colliderbias
