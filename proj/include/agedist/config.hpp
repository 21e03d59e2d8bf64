#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agedist/ps.hpp"
#include "agedist/synthetic.hpp"

namespace agedist {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// `key = value` lines, '#' comments. Remembers line numbers for error messages.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::filesystem::path& path);
  static KeyValueFile parse_string(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<std::string> get_string_list(const std::string& key,
                                           const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  [[noreturn]] void bad_value(const std::string& key) const;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string origin_;
};

TrainConfig train_config_from(const KeyValueFile& kv);
SyntheticConfig synthetic_config_from(const KeyValueFile& kv);

// Resolved config as header comment pairs for output CSVs.
std::vector<std::pair<std::string, std::string>> config_header(const TrainConfig& config);

}  // namespace agedist
