#include "agedist/demographics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agedist {

std::vector<IntervalBatch> batch_by_interval(const std::vector<FaceRecord>& records,
                                             double interval_seconds,
                                             double lateness_seconds, StreamStats* stats) {
  if (!(interval_seconds > 0.0)) {
    throw std::invalid_argument("batch_by_interval: interval length must be > 0");
  }
  if (lateness_seconds < 0.0) {
    throw std::invalid_argument("batch_by_interval: lateness bound must be >= 0");
  }
  std::vector<IntervalBatch> batches;
  auto batch_for = [&](std::uint64_t index) -> IntervalBatch& {
    while (batches.size() <= index) {
      batches.push_back(IntervalBatch{batches.size(), {}});
    }
    return batches[index];
  };

  double watermark = 0.0;  // highest timestamp seen so far
  for (const FaceRecord& r : records) {
    if (r.timestamp < 0.0 || r.timestamp < watermark - lateness_seconds) {
      if (stats) ++stats->rejected_late;
      continue;
    }
    watermark = std::max(watermark, r.timestamp);
    const auto index = static_cast<std::uint64_t>(std::floor(r.timestamp / interval_seconds));
    batch_for(index).records.push_back(r);
    if (stats) ++stats->accepted;
  }
  // keep trailing empty intervals up to the watermark
  if (!records.empty()) {
    batch_for(static_cast<std::uint64_t>(std::floor(watermark / interval_seconds)));
  }
  return batches;
}

std::vector<ScoredRecord> score_interval(const Vec& params, const ModelSpec& spec,
                                         const IntervalBatch& batch,
                                         const AgeClassSet& classes, StreamStats* stats) {
  std::vector<ScoredRecord> out;
  out.reserve(batch.records.size());
  for (const FaceRecord& r : batch.records) {
    if (r.features.size() != static_cast<std::size_t>(spec.input_dim)) {
      if (stats) ++stats->skipped_dim;
      continue;
    }
    const Vec prob = softmax(forward(params, spec, r.features));
    out.push_back({r.record_id, predict_age(prob, classes)});
  }
  return out;
}

int AgeGroupHistogram::group_index(double age) const {
  return static_cast<int>(std::floor((age - static_cast<double>(min_age)) /
                                     static_cast<double>(group_width)));
}

void update_histogram(AgeGroupHistogram& hist, const std::vector<ScoredRecord>& scored) {
  for (const ScoredRecord& s : scored) {
    ++hist.counts[hist.group_index(s.prediction.expected_age)];
    ++hist.total;
  }
}

void persist_histogram(const AgeGroupHistogram& hist, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("persist_histogram: cannot open " + tmp.string());
    os << "# min_age = " << hist.min_age << "\n";
    os << "# group_width = " << hist.group_width << "\n";
    os << "group_low,group_high,count\n";
    for (const auto& [index, count] : hist.counts) {
      const int low = hist.min_age + index * hist.group_width;
      os << low << ',' << low + hist.group_width - 1 << ',' << count << "\n";
    }
    os << "total,," << hist.total << "\n";
    if (!os) throw std::runtime_error("persist_histogram: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

AgeGroupHistogram load_histogram(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_histogram: cannot open " + path.string());
  AgeGroupHistogram hist;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, eq;
      long long value = 0;
      if (ls >> key >> eq >> value) {
        if (key == "min_age") hist.min_age = static_cast<int>(value);
        if (key == "group_width") hist.group_width = static_cast<int>(value);
      }
      continue;
    }
    if (line.rfind("group_low,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string low_s, high_s, count_s;
    std::getline(ls, low_s, ',');
    std::getline(ls, high_s, ',');
    std::getline(ls, count_s);
    if (low_s == "total") {
      hist.total = std::stoull(count_s);
      continue;
    }
    const int low = std::stoi(low_s);
    hist.counts[(low - hist.min_age) / hist.group_width] = std::stoull(count_s);
  }
  return hist;
}

std::vector<FaceRecord> read_face_records(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_face_records: cannot open " + path.string());
  std::vector<FaceRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("record_id,", 0) == 0) continue;  // optional header
    std::istringstream ls(line);
    FaceRecord r;
    std::string field;
    if (!std::getline(ls, r.record_id, ',')) continue;
    if (!std::getline(ls, field, ',')) {
      throw std::runtime_error("read_face_records: missing timestamp at line " +
                               std::to_string(lineno));
    }
    r.timestamp = std::stod(field);
    while (std::getline(ls, field, ',')) r.features.push_back(std::stod(field));
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace agedist
