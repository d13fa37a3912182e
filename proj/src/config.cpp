#include "taylornet/config.hpp"

#include <charconv>
#include <sstream>

namespace taylornet {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

RunConfig::RunConfig(std::string command, const std::vector<KeySpec>& schema)
    : command_(std::move(command)), schema_(schema) {
  for (const auto& k : schema_)
    if (!k.required) values_[k.key] = k.default_value;
}

void RunConfig::check_known(const std::string& key, const std::string& origin) const {
  for (const auto& k : schema_)
    if (k.key == key) return;
  throw ConfigError("unknown config key '" + key + "' (" + origin + ") for command " + command_);
}

void RunConfig::apply_file_text(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    check_known(key, origin + ":" + std::to_string(lineno));
    if (seen.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key + "' repeated (first on line " +
                        std::to_string(seen[key]) + ")");
    seen[key] = lineno;
    values_[key] = value;
  }
}

void RunConfig::apply_override(const std::string& key, const std::string& value) {
  check_known(key, "command line");
  values_[key] = value;
}

void RunConfig::require_complete() const {
  for (const auto& k : schema_)
    if (k.required && (!values_.count(k.key) || values_.at(k.key).empty()))
      throw ConfigError("missing required config key '" + k.key + "' for command " + command_);
}

bool RunConfig::has(const std::string& key) const {
  auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

const std::string& RunConfig::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required config key '" + key + "' for command " + command_);
  return it->second;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T out{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e || text.empty())
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return out;
}

}  // namespace

int RunConfig::i32(const std::string& key) const { return parse_number<int>(key, str(key)); }
std::uint64_t RunConfig::u64(const std::string& key) const { return parse_number<std::uint64_t>(key, str(key)); }

double RunConfig::f64(const std::string& key) const {
  const std::string& s = str(key);
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + s + "' as a number");
  }
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + s + "'");
}

std::vector<int> RunConfig::int_list(const std::string& key) const {
  std::vector<int> out;
  std::istringstream is(str(key));
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : schema_) {
    auto it = values_.find(k.key);
    out.emplace_back(k.key, it == values_.end() ? "" : it->second);
  }
  return out;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  os << "command = " << command_ << "\n";
  for (const auto& [k, v] : entries()) os << k << " = " << v << "\n";
  return os.str();
}

}  // namespace taylornet
