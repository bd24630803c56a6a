// Shared helpers for the test suite: scratch directories, a subprocess
// runner for the CLI binary, and a small JSON-schema subset validator
// (type / required / properties / enum / items) for summary lines.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

namespace testutil {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

// Scratch directory removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("qds_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str(const std::string& rel = "") const {
    return rel.empty() ? path.string() : (path / rel).string();
  }
};

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI through the shell; `env_prefix` may hold "VAR=value "
// assignments.
inline CliResult run_cli(const std::string& args,
                         const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path tmp = fs::temp_directory_path();
  const std::string tag =
      std::to_string(::getpid()) + "_" + std::to_string(counter++);
  const std::string out_path = (tmp / ("qds_out_" + tag)).string();
  const std::string err_path = (tmp / ("qds_err_" + tag)).string();
  const std::string cmd = env_prefix + std::string(QDS_CLI_PATH) + " " +
                          args + " >" + out_path + " 2>" + err_path;
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  return r;
}

// ---------------------------------------------------------------------------
// JSON-schema subset validation

inline bool type_matches(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "boolean") return doc.is_boolean();
  if (type == "integer")
    return doc.is_number_integer() || doc.is_number_unsigned();
  if (type == "number") return doc.is_number();
  return false;
}

inline void validate_node(const json& schema, const json& doc,
                          const std::string& where,
                          std::vector<std::string>& errors) {
  if (schema.contains("type") &&
      !type_matches(doc, schema["type"].get<std::string>())) {
    errors.push_back(where + ": expected type " +
                     schema["type"].get<std::string>());
    return;
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& v : schema["enum"]) found = found || v == doc;
    if (!found) errors.push_back(where + ": value not in enum");
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      if (!doc.contains(key.get<std::string>()))
        errors.push_back(where + ": missing required key " +
                         key.get<std::string>());
    }
  }
  if (schema.contains("properties") && doc.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (doc.contains(key))
        validate_node(sub, doc[key], where + "." + key, errors);
    }
  }
  if (schema.contains("items") && doc.is_array()) {
    for (size_t i = 0; i < doc.size(); ++i)
      validate_node(schema["items"], doc[i], where + "[" + std::to_string(i) +
                    "]", errors);
  }
}

inline std::vector<std::string> validate_schema(const json& schema,
                                                const json& doc) {
  std::vector<std::string> errors;
  validate_node(schema, doc, "$", errors);
  return errors;
}

inline json load_schema() {
  return json::parse(read_file(QDS_SCHEMA_PATH));
}

// Parses the one-line summary a subcommand printed and checks it against
// the shipped schema; fails the doctest assertion context on mismatch.
inline json parse_summary(const std::string& stdout_text) {
  const json doc = json::parse(stdout_text);
  return doc;
}

}  // namespace testutil
