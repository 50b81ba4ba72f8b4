#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogrelay/experiment.hpp"

namespace cogrelay {

/**
 * Plain-text config format, one statement per line:
 *
 *   schema_version 1
 *   section {          # opens a nested scope
 *     key value        # scalar
 *     key v1 v2 v3     # list
 *   }                  # closes it
 *
 * '#' starts a comment. Keys are unique within their scope.
 */
struct ConfigValue {
  std::vector<std::string> tokens;
  int line = 0;
};

struct ConfigNode {
  std::map<std::string, ConfigValue> values;
  std::map<std::string, ConfigNode> sections;
  std::map<std::string, int> section_lines;
};

class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(int line, int col, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + message),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// Throws ConfigParseError on malformed syntax.
ConfigNode parse_config_text(const std::string& text);

struct ConfigLoadResult {
  ExperimentConfig config;
  // Key-path-labeled problems: missing keys, unknown keys, range violations.
  // Empty iff the config is usable.
  std::vector<std::string> diagnostics;
};

ConfigLoadResult bind_experiment_config(const ConfigNode& root);
ConfigLoadResult load_experiment_config_text(const std::string& text);
ConfigLoadResult load_experiment_config(const std::string& path);

}  // namespace cogrelay
