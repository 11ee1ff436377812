#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace tw {

// Validates `doc` against a JSON Schema restricted to the keywords the shipped
// schemas use: type, required, properties, additionalProperties, items,
// minItems, maxItems, minimum, maximum, exclusiveMinimum, exclusiveMaximum
// enum and local $ref pointers. Returns one message per violation, prefixed by the dotted path.
std::vector<std::string> validate_json(const nlohmann::json& doc, const nlohmann::json& schema);

// Loads <schema_dir>/<name>.schema.json.
nlohmann::json load_schema(const std::string& name);

}  // namespace tw
