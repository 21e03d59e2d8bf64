#include "agedist/synthetic.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "agedist/label_dist.hpp"

namespace agedist {

Dataset generate_synthetic(const SyntheticConfig& config) {
  if (config.n_samples < 2) {
    throw std::invalid_argument("generate_synthetic: need at least 2 samples");
  }
  if (config.input_dim < 1) {
    throw std::invalid_argument("generate_synthetic: input_dim must be >= 1");
  }
  if (!(config.noise_stddev >= 0.0)) {
    throw std::invalid_argument("generate_synthetic: noise_stddev must be >= 0");
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  // fixed random embedding direction plus a per-dimension offset
  Vec direction(static_cast<std::size_t>(config.input_dim));
  Vec offset(static_cast<std::size_t>(config.input_dim));
  for (auto& v : direction) v = unit(rng);
  for (auto& v : offset) v = unit(rng);

  std::uniform_int_distribution<int> age_dist(config.classes.min_age, config.classes.max_age);
  std::normal_distribution<double> noise(0.0, config.noise_stddev);
  const double span = static_cast<double>(config.classes.max_age - config.classes.min_age);

  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(config.n_samples));
  for (int k = 0; k < config.n_samples; ++k) {
    Sample s;
    s.true_age = age_dist(rng);
    const double a = span > 0.0
                         ? (static_cast<double>(s.true_age - config.classes.min_age) / span) * 2.0 - 1.0
                         : 0.0;
    s.features.resize(static_cast<std::size_t>(config.input_dim));
    for (std::size_t d = 0; d < s.features.size(); ++d) {
      s.features[d] = a * direction[d] + offset[d] + noise(rng);
    }
    s.label = gaussian_label_distribution(s.true_age, config.theta, config.classes);
    samples.push_back(std::move(s));
  }

  Dataset out;
  const std::size_t n_train = (samples.size() * 8) / 10;
  out.train.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());
  if (out.train.empty() || out.test.empty()) {
    throw std::invalid_argument("generate_synthetic: split left an empty partition");
  }
  return out;
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_samples_csv: cannot open " + path.string());
  os.precision(17);
  for (const Sample& s : samples) {
    os << s.true_age;
    for (double f : s.features) os << ',' << f;
    os << "\n";
  }
  if (!os) throw std::runtime_error("write_samples_csv: write failed for " + path.string());
}

std::vector<Sample> read_samples_csv(const std::filesystem::path& path,
                                     const AgeClassSet& classes, double theta) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_samples_csv: cannot open " + path.string());
  std::vector<Sample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string field;
    Sample s;
    if (!std::getline(ls, field, ',')) continue;
    try {
      s.true_age = std::stoi(field);
      while (std::getline(ls, field, ',')) s.features.push_back(std::stod(field));
    } catch (...) {
      throw std::runtime_error("read_samples_csv: bad value at " + path.string() + ":" +
                               std::to_string(lineno));
    }
    s.label = gaussian_label_distribution(s.true_age, theta, classes);
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace agedist
