#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "agedist/metrics.hpp"
#include "agedist/model.hpp"

namespace agedist {

struct FaceRecord {
  std::string record_id;
  double timestamp = 0.0;  // seconds since epoch
  Vec features;
};

struct IntervalBatch {
  std::uint64_t interval_index = 0;
  std::vector<FaceRecord> records;
};

struct StreamStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected_late = 0;
  std::uint64_t skipped_dim = 0;
};

// Assigns records to half-open intervals [i*T, (i+1)*T). Empty intervals are
// emitted so the timeline is deterministic. Records older than the current
// interval start minus `lateness` are rejected and counted.
std::vector<IntervalBatch> batch_by_interval(const std::vector<FaceRecord>& records,
                                             double interval_seconds,
                                             double lateness_seconds, StreamStats* stats);

struct ScoredRecord {
  std::string record_id;
  AgePrediction prediction;
};

// Stateless per-interval scoring; records with mismatched feature length are
// skipped and counted in `stats`.
std::vector<ScoredRecord> score_interval(const Vec& params, const ModelSpec& spec,
                                         const IntervalBatch& batch,
                                         const AgeClassSet& classes, StreamStats* stats);

struct AgeGroupHistogram {
  int group_width = 10;  // years
  int min_age = 1;
  std::map<int, std::uint64_t> counts;  // group index -> count
  std::uint64_t total = 0;

  int group_index(double age) const;
  bool operator==(const AgeGroupHistogram&) const = default;
};

void update_histogram(AgeGroupHistogram& hist, const std::vector<ScoredRecord>& scored);

// CSV `group_low,group_high,count` plus a total row; write-temp-rename.
void persist_histogram(const AgeGroupHistogram& hist, const std::filesystem::path& path);
AgeGroupHistogram load_histogram(const std::filesystem::path& path);

// Input rows: record_id,timestamp,f_0,...,f_{d-1}
std::vector<FaceRecord> read_face_records(const std::filesystem::path& path);

}  // namespace agedist
