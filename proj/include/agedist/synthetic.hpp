#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "agedist/model.hpp"

namespace agedist {

struct SyntheticConfig {
  int n_samples = 1000;
  int input_dim = 32;
  AgeClassSet classes{1, 70};
  double theta = 1.0;
  double noise_stddev = 0.05;
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

// Latent age uniform over the class range; features are a noisy random linear
// embedding of the normalized age. Deterministic 80/20 split by seed.
Dataset generate_synthetic(const SyntheticConfig& config);

// Sample CSV: rows `age,f_0,...,f_{d-1}`; labels are re-derived on load from
// (classes, theta).
void write_samples_csv(const std::filesystem::path& path, const std::vector<Sample>& samples);
std::vector<Sample> read_samples_csv(const std::filesystem::path& path,
                                     const AgeClassSet& classes, double theta);

}  // namespace agedist
