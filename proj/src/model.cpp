#include "agedist/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "checkpoint/wire formats assume a little-endian host");

namespace agedist {

int ModelSpec::layer_in(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_dims[layer - 1];
}

int ModelSpec::layer_out(std::size_t layer) const {
  return layer == hidden_dims.size() ? num_classes : hidden_dims[layer];
}

std::size_t ModelSpec::param_count() const {
  std::size_t p = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    p += static_cast<std::size_t>(layer_in(l)) * static_cast<std::size_t>(layer_out(l)) +
         static_cast<std::size_t>(layer_out(l));
  }
  return p;
}

void ModelSpec::validate() const {
  if (input_dim < 1 || num_classes < 1) {
    throw std::invalid_argument("ModelSpec: input_dim and num_classes must be >= 1");
  }
  for (int h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("ModelSpec: hidden dims must be >= 1");
  }
}

Vec init_model(const ModelSpec& spec) {
  spec.validate();
  Vec params(spec.param_count(), 0.0);
  std::mt19937_64 rng(spec.seed);
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t fan_in = static_cast<std::size_t>(spec.layer_in(l));
    const std::size_t fan_out = static_cast<std::size_t>(spec.layer_out(l));
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) params[off + i] = dist(rng);
    off += fan_in * fan_out + fan_out;  // biases stay zero
  }
  return params;
}

namespace {

// Affine layers with ReLU between hidden layers; stores post-activation
// values per layer when `acts` is given (for backprop).
Vec forward_impl(const Vec& params, const ModelSpec& spec, const Vec& features,
                 std::vector<Vec>* acts) {
  if (features.size() != static_cast<std::size_t>(spec.input_dim)) {
    throw std::invalid_argument("forward: feature length " + std::to_string(features.size()) +
                                " != input_dim " + std::to_string(spec.input_dim));
  }
  if (params.size() != spec.param_count()) {
    throw std::invalid_argument("forward: parameter vector length mismatch");
  }
  Vec a = features;
  if (acts) acts->push_back(a);
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = static_cast<std::size_t>(spec.layer_in(l));
    const std::size_t out = static_cast<std::size_t>(spec.layer_out(l));
    Vec z(out);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = params[off + in * out + r];  // bias
      const double* w = &params[off + r * in];
      for (std::size_t c = 0; c < in; ++c) acc += w[c] * a[c];
      z[r] = acc;
    }
    if (l + 1 < spec.num_layers()) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
    a = std::move(z);
    if (acts) acts->push_back(a);
    off += in * out + out;
  }
  return a;
}

}  // namespace

Vec forward(const Vec& params, const ModelSpec& spec, const Vec& features) {
  return forward_impl(params, spec, features, nullptr);
}

BatchGradient batch_gradient(const Vec& params, const ModelSpec& spec,
                             std::span<const Sample> batch) {
  if (batch.empty()) {
    throw std::invalid_argument("batch_gradient: empty batch");
  }
  BatchGradient result;
  result.grad.assign(spec.param_count(), 0.0);
  result.mean_loss = 0.0;

  const std::size_t layers = spec.num_layers();
  std::vector<std::size_t> offsets(layers);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      offsets[l] = off;
      off += static_cast<std::size_t>(spec.layer_in(l)) * spec.layer_out(l) + spec.layer_out(l);
    }
  }

  for (const Sample& sample : batch) {
    std::vector<Vec> acts;
    acts.reserve(layers + 1);
    const Vec logits = forward_impl(params, spec, sample.features, &acts);
    result.mean_loss += kl_loss(sample.label, logits);

    Vec delta = kl_loss_gradient(sample.label, logits);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = static_cast<std::size_t>(spec.layer_in(l));
      const std::size_t out = static_cast<std::size_t>(spec.layer_out(l));
      const Vec& a = acts[l];
      double* gw = &result.grad[offsets[l]];
      double* gb = &result.grad[offsets[l] + in * out];
      for (std::size_t r = 0; r < out; ++r) {
        for (std::size_t c = 0; c < in; ++c) gw[r * in + c] += delta[r] * a[c];
        gb[r] += delta[r];
      }
      if (l == 0) break;
      Vec prev(in, 0.0);
      const double* w = &params[offsets[l]];
      for (std::size_t r = 0; r < out; ++r) {
        for (std::size_t c = 0; c < in; ++c) prev[c] += w[r * in + c] * delta[r];
      }
      // ReLU mask: acts[l] holds the post-activation of layer l-1
      for (std::size_t c = 0; c < in; ++c) {
        if (a[c] <= 0.0) prev[c] = 0.0;
      }
      delta = std::move(prev);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& g : result.grad) g *= inv_n;
  result.mean_loss *= inv_n;
  return result;
}

void apply_update(Vec& params, const Vec& aggregate, double lr, int n_workers) {
  if (params.size() != aggregate.size()) {
    throw std::invalid_argument("apply_update: length mismatch");
  }
  if (!(lr > 0.0) || n_workers < 1) {
    throw std::invalid_argument("apply_update: need lr > 0 and n_workers >= 1");
  }
  const double scale = lr / static_cast<double>(n_workers);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= scale * aggregate[i];
}

double mean_loss(const Vec& params, const ModelSpec& spec, std::span<const Sample> data) {
  if (data.empty()) {
    throw std::invalid_argument("mean_loss: empty dataset");
  }
  double total = 0.0;
  for (const Sample& s : data) {
    total += kl_loss(s.label, forward(params, spec, s.features));
  }
  return total / static_cast<double>(data.size());
}

namespace {

constexpr char kMagic[4] = {'A', 'D', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelSpec& spec,
                     const Vec& params) {
  if (params.size() != spec.param_count()) {
    throw std::invalid_argument("save_checkpoint: parameter count does not match spec");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod(os, spec.seed);
  write_pod(os, static_cast<std::uint32_t>(spec.input_dim));
  write_pod(os, static_cast<std::uint32_t>(spec.hidden_dims.size()));
  for (int h : spec.hidden_dims) write_pod(os, static_cast<std::uint32_t>(h));
  write_pod(os, static_cast<std::uint32_t>(spec.num_classes));
  write_pod(os, static_cast<std::uint64_t>(params.size()));
  for (double v : params) write_pod(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

std::pair<ModelSpec, Vec> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
  }
  if (read_pod<std::uint32_t>(is) != kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version in " + path.string());
  }
  ModelSpec spec;
  spec.seed = read_pod<std::uint64_t>(is);
  spec.input_dim = static_cast<int>(read_pod<std::uint32_t>(is));
  const std::uint32_t num_hidden = read_pod<std::uint32_t>(is);
  spec.hidden_dims.resize(num_hidden);
  for (std::uint32_t i = 0; i < num_hidden; ++i) {
    spec.hidden_dims[i] = static_cast<int>(read_pod<std::uint32_t>(is));
  }
  spec.num_classes = static_cast<int>(read_pod<std::uint32_t>(is));
  const std::uint64_t count = read_pod<std::uint64_t>(is);
  if (!is || count != spec.param_count()) {
    throw std::runtime_error("load_checkpoint: corrupt header in " + path.string());
  }
  Vec params(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    params[i] = static_cast<double>(read_pod<float>(is));
  }
  if (!is) throw std::runtime_error("load_checkpoint: truncated payload in " + path.string());
  return {spec, params};
}

}  // namespace agedist
