#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace taylornet {

// Bad flag, unknown key, missing key or unparsable value (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string key;
  std::string default_value;  // ignored when required
  bool required = false;
  std::string help;
};

// Flat key=value configuration with precedence overrides > file > defaults.
class RunConfig {
 public:
  RunConfig() = default;
  RunConfig(std::string command, const std::vector<KeySpec>& schema);

  // Parses "key = value" lines; '#' starts a comment.
  void apply_file_text(const std::string& text, const std::string& origin);
  void apply_override(const std::string& key, const std::string& value);
  // Throws ConfigError naming the first required key without a value.
  void require_complete() const;

  const std::string& command() const { return command_; }
  bool has(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  int i32(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  double f64(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;

  // Effective values in schema order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  // Canonical "key = value" text of the effective config (hashed into the manifest).
  std::string canonical_text() const;

 private:
  void check_known(const std::string& key, const std::string& origin) const;

  std::string command_;
  std::vector<KeySpec> schema_;
  std::map<std::string, std::string> values_;
};

std::string trim(const std::string& s);

}  // namespace taylornet
