#include "agedist/config.hpp"

#include <fstream>
#include <sstream>

namespace agedist {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_string(buf.str(), path.string());
}

KeyValueFile KeyValueFile::parse_string(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (kv.values_.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key `" + key + "`");
    }
    kv.values_[key] = value;
    kv.lines_[key] = lineno;
  }
  return kv;
}

void KeyValueFile::bad_value(const std::string& key) const {
  const auto it = lines_.find(key);
  const std::string where =
      it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
  throw ConfigError(where + ": invalid value for `" + key + "`: " + values_.at(key));
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) bad_value(key);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_value(key);
  }
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) bad_value(key);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    bad_value(key);
  }
}

std::vector<std::string> KeyValueFile::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  std::istringstream ls(it->second);
  std::string item;
  while (std::getline(ls, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> KeyValueFile::get_int_list(const std::string& key,
                                            const std::vector<int>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  for (const std::string& item : get_string_list(key, {})) {
    try {
      out.push_back(std::stoi(item));
    } catch (...) {
      bad_value(key);
    }
  }
  return out;
}

TrainConfig train_config_from(const KeyValueFile& kv) {
  TrainConfig cfg;
  cfg.spec.input_dim = static_cast<int>(kv.get_int("input_dim", 32));
  cfg.spec.hidden_dims = kv.get_int_list("hidden_dims", {64});
  cfg.spec.num_classes = static_cast<int>(kv.get_int("c", 70));
  cfg.spec.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  cfg.n_workers = static_cast<int>(kv.get_int("n_workers", 4));
  cfg.filter = filter_kind_from_string(kv.get_string("filter", "raw"));
  cfg.delta = kv.get_double("delta", 0.0);
  cfg.lr = kv.get_double("lr", 0.05);
  cfg.batch_size = static_cast<int>(kv.get_int("batch_size", 8));
  cfg.max_iterations = static_cast<int>(kv.get_int("max_iterations", 100));
  cfg.eval_every = static_cast<int>(kv.get_int("eval_every", 0));
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

SyntheticConfig synthetic_config_from(const KeyValueFile& kv) {
  SyntheticConfig cfg;
  cfg.n_samples = static_cast<int>(kv.get_int("n_samples", 1000));
  cfg.input_dim = static_cast<int>(kv.get_int("input_dim", 32));
  cfg.classes.min_age = static_cast<int>(kv.get_int("min_age", 1));
  cfg.classes.max_age = static_cast<int>(kv.get_int("max_age", 70));
  cfg.theta = kv.get_double("theta", 1.0);
  cfg.noise_stddev = kv.get_double("noise_stddev", 0.05);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  if (cfg.classes.min_age < 1 || cfg.classes.max_age < cfg.classes.min_age) {
    throw ConfigError("invalid age class range [" + std::to_string(cfg.classes.min_age) + ", " +
                      std::to_string(cfg.classes.max_age) + "]");
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_header(const TrainConfig& config) {
  std::vector<std::pair<std::string, std::string>> h;
  h.emplace_back("input_dim", std::to_string(config.spec.input_dim));
  std::string dims;
  for (std::size_t i = 0; i < config.spec.hidden_dims.size(); ++i) {
    if (i) dims += ",";
    dims += std::to_string(config.spec.hidden_dims[i]);
  }
  h.emplace_back("hidden_dims", dims);
  h.emplace_back("c", std::to_string(config.spec.num_classes));
  h.emplace_back("n_workers", std::to_string(config.n_workers));
  h.emplace_back("filter", to_string(config.filter));
  std::ostringstream delta_s, lr_s;
  delta_s.precision(17);
  delta_s << config.delta;
  lr_s.precision(17);
  lr_s << config.lr;
  h.emplace_back("delta", delta_s.str());
  h.emplace_back("lr", lr_s.str());
  h.emplace_back("batch_size", std::to_string(config.batch_size));
  h.emplace_back("max_iterations", std::to_string(config.max_iterations));
  h.emplace_back("eval_every", std::to_string(config.eval_every));
  h.emplace_back("seed", std::to_string(config.seed));
  h.emplace_back("update_rule", "server-side averaged-gradient SGD");
  return h;
}

}  // namespace agedist
