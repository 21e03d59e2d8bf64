#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "agedist/label_dist.hpp"

namespace agedist {

// Feed-forward architecture: input_dim -> hidden_dims... -> num_classes,
// ReLU between hidden layers, linear output.
struct ModelSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims;
  int num_classes = 1;
  std::uint64_t seed = 0;

  std::size_t num_layers() const { return hidden_dims.size() + 1; }
  int layer_in(std::size_t layer) const;
  int layer_out(std::size_t layer) const;
  std::size_t param_count() const;
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

struct Sample {
  Vec features;
  Vec label;      // distribution over num_classes
  int true_age = 0;  // ground truth in years, 0 when unknown
};

// Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)), zero biases.
// Deterministic for a fixed spec.seed.
Vec init_model(const ModelSpec& spec);

Vec forward(const Vec& params, const ModelSpec& spec, const Vec& features);

struct BatchGradient {
  Vec grad;          // mean d(kl_loss)/d(params) over the batch
  double mean_loss;  // mean kl_loss over the batch
};

BatchGradient batch_gradient(const Vec& params, const ModelSpec& spec,
                             std::span<const Sample> batch);

// W <- W - lr * aggregate / n_workers.
void apply_update(Vec& params, const Vec& aggregate, double lr, int n_workers);

double mean_loss(const Vec& params, const ModelSpec& spec, std::span<const Sample> data);

// Checkpoint file: little-endian header (magic "ADCK", version u32, seed u64,
// input_dim u32, num_hidden u32, hidden dims u32..., num_classes u32,
// param_count u64) followed by param_count f32 values. Parameters are
// narrowed to f32 on write; a save/load/save cycle is byte-identical.
void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec,
                     const Vec& params);
std::pair<ModelSpec, Vec> load_checkpoint(const std::filesystem::path& path);

}  // namespace agedist
