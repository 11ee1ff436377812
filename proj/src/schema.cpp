#include "tw/schema.hpp"

#include <fstream>

#include "tw/config.hpp"
#include "tw/errors.hpp"

namespace tw {

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "number") return v.is_number();
  if (t == "null") return v.is_null();
  return false;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check(const json& v, const json& s_in, const json& root, const std::string& path,
           std::vector<std::string>& out) {
  const std::string where = path.empty() ? "(root)" : path;
  const json& s = s_in.contains("$ref") ? root.at(json::json_pointer(s_in["$ref"].get<std::string>().substr(1))) : s_in;
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) ok = ok || has_type(v, t.get<std::string>());
    } else {
      ok = has_type(v, s["type"].get<std::string>());
    }
    if (!ok) {
      out.push_back(where + ": expected " + s["type"].dump());
      return;
    }
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) out.push_back(where + ": must be one of " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>())
      out.push_back(where + ": must be >= " + s["minimum"].dump());
    if (s.contains("maximum") && x > s["maximum"].get<double>())
      out.push_back(where + ": must be <= " + s["maximum"].dump());
    if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>())
      out.push_back(where + ": must be > " + s["exclusiveMinimum"].dump());
    if (s.contains("exclusiveMaximum") && x >= s["exclusiveMaximum"].get<double>())
      out.push_back(where + ": must be < " + s["exclusiveMaximum"].dump());
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
      out.push_back(where + ": needs at least " + s["minItems"].dump() + " items");
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
      out.push_back(where + ": allows at most " + s["maxItems"].dump() + " items");
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], root, path + "[" + std::to_string(i) + "]", out);
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& r : s["required"]) {
        const std::string key = r.get<std::string>();
        if (!v.contains(key)) out.push_back("missing required field '" + join(path, key) + "'");
      }
    const json props = s.value("properties", json::object());
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key())) {
        check(it.value(), props[it.key()], root, join(path, it.key()), out);
      } else if (s.contains("additionalProperties")) {
        const json& ap = s["additionalProperties"];
        if (ap.is_boolean() && !ap.get<bool>())
          out.push_back("unknown field '" + join(path, it.key()) + "'");
        else if (ap.is_object())
          check(it.value(), ap, root, join(path, it.key()), out);
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate_json(const json& doc, const json& schema) {
  std::vector<std::string> out;
  check(doc, schema, schema, "", out);
  return out;
}

json load_schema(const std::string& name) {
  const std::string path = schema_dir() + "/" + name + ".schema.json";
  std::ifstream is(path);
  if (!is) fail(ErrorKind::io, "cannot read schema " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorKind::io, "malformed schema " + path + ": " + e.what());
  }
}

}  // namespace tw
