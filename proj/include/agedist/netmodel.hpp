#pragma once

#include <cstdint>
#include <stdexcept>

#include "agedist/filters.hpp"

namespace agedist {

// Single full-duplex link between a worker and the server.
struct LinkModel {
  double bandwidth_bps = 1e9;       // bits per second
  double per_message_latency = 0.0; // seconds

  void validate() const {
    if (!(bandwidth_bps > 0.0) || per_message_latency < 0.0) {
      throw std::invalid_argument("LinkModel: bandwidth must be > 0, latency >= 0");
    }
  }
};

struct IterationTiming {
  double compute_seconds = 0.0;
  double push_seconds = 0.0;
  double pull_seconds = 0.0;
  double total_seconds = 0.0;
};

inline std::uint64_t dense_bytes(std::uint64_t num_params, std::uint64_t bytes_per_value) {
  return num_params * bytes_per_value;
}

inline std::uint64_t sparse_bytes(std::uint64_t num_entries) {
  return kSparseHeaderBytes + num_entries * kSparseEntryBytes;
}

inline IterationTiming iteration_time(double compute_seconds, std::uint64_t push_bytes,
                                      std::uint64_t pull_bytes, const LinkModel& link) {
  link.validate();
  if (compute_seconds < 0.0) {
    throw std::invalid_argument("iteration_time: compute_seconds must be >= 0");
  }
  IterationTiming t;
  t.compute_seconds = compute_seconds;
  t.push_seconds = link.per_message_latency +
                   8.0 * static_cast<double>(push_bytes) / link.bandwidth_bps;
  t.pull_seconds = link.per_message_latency +
                   8.0 * static_cast<double>(pull_bytes) / link.bandwidth_bps;
  t.total_seconds = t.compute_seconds + t.push_seconds + t.pull_seconds;
  return t;
}

inline double speedup_ratio(const IterationTiming& baseline, const IterationTiming& candidate) {
  if (!(candidate.total_seconds > 0.0)) {
    throw std::domain_error("speedup_ratio: candidate total time must be > 0");
  }
  return baseline.total_seconds / candidate.total_seconds;
}

}  // namespace agedist
