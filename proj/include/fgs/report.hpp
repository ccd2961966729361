#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgs/errors.hpp"

namespace fgs {

using Json = nlohmann::json;

/// Machine-readable run summary written by every command.  Each numeric
/// metric carries a prose definition so the JSON is self-describing.
struct Report {
  std::string command;
  std::string method;
  Json parameters = Json::object();  ///< echo of the effective options
  std::uint64_t seed = 0;
  std::vector<double> eigenvalues;
  Json metrics = Json::object();     ///< name -> {value, definition}
  Json timings = Json::object();     ///< phase -> seconds
  Json extra = Json::object();       ///< command-specific payload (may be empty)
  std::string status = "ok";
  std::string diagnostic;

  void add_metric(const std::string& name, double value,
                  const std::string& definition);
  void add_metric(const std::string& name, const std::vector<double>& values,
                  const std::string& definition);
  void add_timing(const std::string& phase, double seconds);

  Json to_json() const;
};

/// Serializes the report (pretty-printed) to `path` and returns the JSON.
Json write_report(const Report& report, const std::string& path);

/// Parses a JSON document from disk; parse failures carry the file name.
Json load_json(const std::string& path);

/// Validates `instance` against a JSON-schema subset (type / enum / required /
/// properties / items / additionalProperties / minimum).  Violations raise a
/// parse error naming the offending path.
void validate_json(const Json& instance, const Json& schema);

/// Loads the shipped report schema (schema/report.schema.json under the given
/// repository root) and validates the report against it.
void validate_report(const Json& report, const std::string& repo_root);

} // namespace fgs
