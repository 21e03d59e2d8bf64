#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agedist/filters.hpp"
#include "agedist/model.hpp"

namespace agedist {

struct TrainConfig {
  ModelSpec spec;
  int n_workers = 1;
  FilterKind filter = FilterKind::Raw;
  double delta = 0.0;
  double lr = 0.01;
  int batch_size = 8;
  int max_iterations = 1;
  int eval_every = 0;  // 0 disables test-loss evaluation
  std::uint64_t seed = 0;

  void validate() const;
};

struct Shard {
  int worker_id = 0;
  std::vector<Sample> samples;
};

// Deterministic shuffle by seed, then round-robin assignment.
std::vector<Shard> partition(const std::vector<Sample>& dataset, int n, std::uint64_t seed);

// Coordinates the server touched this iteration, with their new values.
struct PullResponse {
  std::uint64_t iteration = 0;
  std::vector<std::uint32_t> indices;
  Vec values;
};

// Aggregates exactly one push per worker (sorted by worker id), applies the
// averaged SGD step, and reports every touched coordinate.
PullResponse server_step(Vec& params, std::vector<SparseUpdate>& pushes, double lr,
                         int n_workers);

struct LogRow {
  std::uint64_t iteration = 0;
  int worker_id = 0;
  double train_loss = 0.0;
  double drop_frac = 0.0;
  std::uint64_t push_bytes = 0;
  std::uint64_t pull_bytes = 0;
  std::optional<double> test_loss;  // set on worker 0's row at eval iterations
};

struct TrainingLog {
  std::vector<LogRow> rows;
};

struct TrainResult {
  Vec params;
  TrainingLog log;
};

enum class ExecMode { Sequential, Threaded };

// Thrown when a loss goes non-finite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bulk-synchronous training loop: partition -> repeat {worker pushes ->
// barrier -> server aggregate -> pull}. Sequential and Threaded modes run
// the same arithmetic and produce identical results. When `trajectory` is
// given it receives a copy of the server parameters after every iteration.
TrainResult train(const TrainConfig& config, const std::vector<Sample>& dataset,
                  const std::vector<Sample>& test_set, ExecMode mode = ExecMode::Threaded,
                  std::vector<Vec>* trajectory = nullptr);

// CSV with "# key = value" header comments, then
// iteration,worker_id,train_loss,drop_fraction,push_bytes,pull_bytes,test_loss.
void write_training_log_csv(std::ostream& os, const TrainingLog& log,
                            const std::vector<std::pair<std::string, std::string>>& header);
TrainingLog read_training_log_csv(std::istream& is);

}  // namespace agedist
