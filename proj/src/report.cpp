#include "fgs/report.hpp"

#include <fstream>

namespace fgs {

namespace {

[[noreturn]] void schema_fail(const std::string& where,
                              const std::string& what) {
  throw ParseError("schema violation at " + (where.empty() ? "$" : where) +
                   ": " + what);
}

bool matches_type(const Json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  throw ParseError("unsupported schema type '" + type + "'");
}

void validate_node(const Json& value, const Json& schema,
                   const std::string& where) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) schema_fail(where, "value not allowed");
    return;
  }
  if (!schema.is_object())
    throw ParseError("schema node at " + where + " must be an object");

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_array()) {
      for (const Json& t : *it)
        if (matches_type(value, t.get<std::string>())) ok = true;
    } else {
      ok = matches_type(value, it->get<std::string>());
    }
    if (!ok)
      schema_fail(where, "type mismatch (expected " + it->dump() + ")");
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool ok = false;
    for (const Json& candidate : *it)
      if (candidate == value) ok = true;
    if (!ok) schema_fail(where, "value not in enum " + it->dump());
  }
  if (auto it = schema.find("minimum");
      it != schema.end() && value.is_number()) {
    if (value.get<double>() < it->get<double>())
      schema_fail(where, "value below minimum " + it->dump());
  }
  if (value.is_object()) {
    if (auto it = schema.find("required"); it != schema.end())
      for (const Json& key : *it)
        if (!value.contains(key.get<std::string>()))
          schema_fail(where, "missing required member '" +
                                 key.get<std::string>() + "'");
    const Json* properties = nullptr;
    if (auto it = schema.find("properties"); it != schema.end())
      properties = &*it;
    const Json* additional = nullptr;
    if (auto it = schema.find("additionalProperties"); it != schema.end())
      additional = &*it;
    for (auto it = value.begin(); it != value.end(); ++it) {
      const std::string child = where + "/" + it.key();
      if (properties && properties->contains(it.key()))
        validate_node(it.value(), (*properties)[it.key()], child);
      else if (additional)
        validate_node(it.value(), *additional, child);
    }
  }
  if (value.is_array()) {
    if (auto it = schema.find("items"); it != schema.end()) {
      std::size_t index = 0;
      for (const Json& element : value)
        validate_node(element, *it, where + "/" + std::to_string(index++));
    }
  }
}

} // namespace

void Report::add_metric(const std::string& name, double value,
                        const std::string& definition) {
  metrics[name] = Json{{"value", value}, {"definition", definition}};
}

void Report::add_metric(const std::string& name,
                        const std::vector<double>& values,
                        const std::string& definition) {
  metrics[name] = Json{{"value", values}, {"definition", definition}};
}

void Report::add_timing(const std::string& phase, double seconds) {
  timings[phase] = seconds;
}

Json Report::to_json() const {
  Json out{{"schema", "fgs-report-v1"},
           {"command", command},
           {"method", method},
           {"parameters", parameters},
           {"seed", seed},
           {"eigenvalues", eigenvalues},
           {"metrics", metrics},
           {"timings_seconds", timings},
           {"status", status},
           {"diagnostic", diagnostic}};
  if (!extra.empty()) out["extra"] = extra;
  return out;
}

Json write_report(const Report& report, const std::string& path) {
  Json json = report.to_json();
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << json.dump(2) << '\n';
  if (!out) throw ParseError(path + ": write failed");
  return json;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& error) {
    throw ParseError(path + ": " + error.what());
  }
}

void validate_json(const Json& instance, const Json& schema) {
  validate_node(instance, schema, "");
}

void validate_report(const Json& report, const std::string& repo_root) {
  validate_json(report, load_json(repo_root + "/schema/report.schema.json"));
}

} // namespace fgs
