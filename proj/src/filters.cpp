#include "agedist/filters.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace agedist {

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "raw" || name == "RAW") return FilterKind::Raw;
  if (name == "dsu" || name == "DSU") return FilterKind::Dsu;
  if (name == "asu" || name == "ASU") return FilterKind::Asu;
  throw std::invalid_argument("unknown filter kind: " + name);
}

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Raw: return "raw";
    case FilterKind::Dsu: return "dsu";
    case FilterKind::Asu: return "asu";
  }
  return "?";
}

FilterState::FilterState(FilterKind kind_, double delta_, std::size_t total_dims)
    : kind(kind_), delta(delta_), residual(total_dims, 0.0) {
  if (delta < 0.0) throw std::invalid_argument("FilterState: delta must be >= 0");
}

SparseUpdate filter_push(FilterState& state, const Vec& update,
                         std::uint32_t worker_id, std::uint64_t iteration) {
  if (update.size() != state.residual.size()) {
    throw std::invalid_argument("filter_push: update length does not match state");
  }
  SparseUpdate out;
  out.worker_id = worker_id;
  out.iteration = iteration;
  out.total_dims = update.size();

  const bool asu = state.kind == FilterKind::Asu;
  const double delta = state.kind == FilterKind::Raw ? 0.0 : state.delta;
  for (std::size_t j = 0; j < update.size(); ++j) {
    const double effective = asu ? update[j] + state.residual[j] : update[j];
    if (std::abs(effective) > delta) {
      out.indices.push_back(static_cast<std::uint32_t>(j));
      out.values.push_back(effective);
      if (asu) state.residual[j] = 0.0;
    } else if (asu) {
      state.residual[j] = effective;
    }
  }
  return out;
}

double drop_fraction(const SparseUpdate& pushed) {
  if (pushed.total_dims == 0) {
    throw std::domain_error("drop_fraction: total_dims is zero");
  }
  return 1.0 - static_cast<double>(pushed.indices.size()) /
                   static_cast<double>(pushed.total_dims);
}

Vec densify(const SparseUpdate& sparse) {
  Vec dense(sparse.total_dims, 0.0);
  for (std::size_t k = 0; k < sparse.indices.size(); ++k) {
    if (sparse.indices[k] >= sparse.total_dims) {
      throw std::out_of_range("densify: index " + std::to_string(sparse.indices[k]) +
                              " >= total_dims " + std::to_string(sparse.total_dims));
    }
    dense[sparse.indices[k]] = sparse.values[k];
  }
  return dense;
}

namespace {

template <typename T>
void append_pod(std::vector<std::uint8_t>& buf, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buf.insert(buf.end(), p, p + sizeof(v));
}

template <typename T>
T take_pod(const std::vector<std::uint8_t>& buf, std::size_t& off) {
  if (off + sizeof(T) > buf.size()) {
    throw std::runtime_error("decode_sparse_update: truncated message");
  }
  T v{};
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_sparse_update(const SparseUpdate& sparse) {
  std::vector<std::uint8_t> buf;
  buf.reserve(kSparseHeaderBytes + kSparseEntryBytes * sparse.indices.size());
  append_pod(buf, sparse.worker_id);
  append_pod(buf, static_cast<std::uint32_t>(sparse.indices.size()));
  append_pod(buf, sparse.iteration);
  append_pod(buf, static_cast<std::uint64_t>(sparse.total_dims));
  for (std::size_t k = 0; k < sparse.indices.size(); ++k) {
    append_pod(buf, sparse.indices[k]);
    append_pod(buf, static_cast<float>(sparse.values[k]));
  }
  return buf;
}

SparseUpdate decode_sparse_update(const std::vector<std::uint8_t>& bytes) {
  std::size_t off = 0;
  SparseUpdate s;
  s.worker_id = take_pod<std::uint32_t>(bytes, off);
  const std::uint32_t count = take_pod<std::uint32_t>(bytes, off);
  s.iteration = take_pod<std::uint64_t>(bytes, off);
  s.total_dims = static_cast<std::size_t>(take_pod<std::uint64_t>(bytes, off));
  s.indices.reserve(count);
  s.values.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto idx = take_pod<std::uint32_t>(bytes, off);
    const auto val = take_pod<float>(bytes, off);
    if (idx >= s.total_dims) {
      throw std::runtime_error("decode_sparse_update: index out of range");
    }
    if (!s.indices.empty() && idx <= s.indices.back()) {
      throw std::runtime_error("decode_sparse_update: indices not strictly increasing");
    }
    s.indices.push_back(idx);
    s.values.push_back(static_cast<double>(val));
  }
  return s;
}

}  // namespace agedist
