#pragma once

// Scenario configuration: a sectioned key = value text format or JSON, both
// reduced to one flat object with dotted keys and validated against a
// single schema.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace roughflow::cli {

struct Violation {
  std::string path;
  std::string message;
};

/// Flat object of dotted keys. Text format:
///   # comment, ; comment
///   command = lift
///   [noise]
///   kind = brownian      -> "noise.kind": "brownian"
/// Syntax errors are appended to `violations`.
nlohmann::json parse_config_text(const std::string& text, std::vector<Violation>& violations);

/// Nested JSON objects flattened to dotted keys.
nlohmann::json flatten_json(const nlohmann::json& doc, std::vector<Violation>& violations);

/// Reads a file; JSON when it starts with '{', the text format otherwise.
/// Throws IoError when the file cannot be read.
nlohmann::json load_config_file(const std::string& path, std::vector<Violation>& violations);

struct ValidationResult {
  nlohmann::json resolved;  // every schema key, defaults applied, values typed
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate_config(const nlohmann::json& flat);

/// Names accepted for a builtin key, for error messages and help.
const std::vector<std::string>& known_names(const std::string& key);

/// FNV-1a of the canonical dump of a resolved configuration.
std::uint64_t config_hash(const nlohmann::json& resolved);
std::string hash_hex(std::uint64_t h);

nlohmann::json violations_to_json(const std::vector<Violation>& v);

}  // namespace roughflow::cli
