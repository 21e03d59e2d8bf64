#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agedist/label_dist.hpp"

namespace agedist {

enum class FilterKind { Raw, Dsu, Asu };

FilterKind filter_kind_from_string(const std::string& name);
std::string to_string(FilterKind kind);

// Surviving (index, value) entries of one push. Indices strictly increasing.
struct SparseUpdate {
  std::uint32_t worker_id = 0;
  std::uint64_t iteration = 0;
  std::vector<std::uint32_t> indices;
  Vec values;
  std::size_t total_dims = 0;
};

// Per-worker filter state. RAW/DSU keep the residual identically zero.
struct FilterState {
  FilterKind kind = FilterKind::Raw;
  double delta = 0.0;
  Vec residual;

  FilterState() = default;
  FilterState(FilterKind kind, double delta, std::size_t total_dims);
};

// Threshold filter: entries of the effective update with |v| > delta are
// pushed; |v| <= delta is dropped (carried in the residual for ASU, discarded
// for DSU). RAW pushes every nonzero entry. Mutates `state` (ASU residual).
SparseUpdate filter_push(FilterState& state, const Vec& update,
                         std::uint32_t worker_id = 0, std::uint64_t iteration = 0);

// 1 - pushed / total.
double drop_fraction(const SparseUpdate& pushed);

Vec densify(const SparseUpdate& sparse);

// Wire format, little-endian: header {worker_id u32, entry_count u32,
// iteration u64, total_dims u64} (24 bytes) then entry_count x (u32 index,
// f32 value). Values are narrowed to f32 on encode.
std::vector<std::uint8_t> encode_sparse_update(const SparseUpdate& sparse);
SparseUpdate decode_sparse_update(const std::vector<std::uint8_t>& bytes);

constexpr std::size_t kSparseHeaderBytes = 24;
constexpr std::size_t kSparseEntryBytes = 8;

}  // namespace agedist
