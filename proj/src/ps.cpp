#include "agedist/ps.hpp"

#include <algorithm>
#include <array>
#include <barrier>
#include <cmath>
#include <mutex>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "agedist/netmodel.hpp"

namespace agedist {

void TrainConfig::validate() const {
  spec.validate();
  if (n_workers < 1) throw std::invalid_argument("TrainConfig: n_workers must be >= 1");
  if (max_iterations < 1) throw std::invalid_argument("TrainConfig: max_iterations must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (eval_every < 0) throw std::invalid_argument("TrainConfig: eval_every must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
  if (delta < 0.0) throw std::invalid_argument("TrainConfig: delta must be >= 0");
}

std::vector<Shard> partition(const std::vector<Sample>& dataset, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("partition: n must be >= 1");
  if (dataset.empty()) throw std::invalid_argument("partition: empty dataset");
  if (static_cast<std::size_t>(n) > dataset.size()) {
    throw std::invalid_argument("partition: more workers than samples would leave empty shards");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Shard> shards(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) shards[static_cast<std::size_t>(i)].worker_id = i;
  for (std::size_t k = 0; k < order.size(); ++k) {
    shards[k % static_cast<std::size_t>(n)].samples.push_back(dataset[order[k]]);
  }
  return shards;
}

PullResponse server_step(Vec& params, std::vector<SparseUpdate>& pushes, double lr,
                         int n_workers) {
  if (pushes.size() != static_cast<std::size_t>(n_workers)) {
    throw std::runtime_error("server_step: expected one push per worker, got " +
                             std::to_string(pushes.size()));
  }
  std::sort(pushes.begin(), pushes.end(),
            [](const SparseUpdate& a, const SparseUpdate& b) { return a.worker_id < b.worker_id; });
  const std::uint64_t iter = pushes.front().iteration;
  for (const SparseUpdate& p : pushes) {
    if (p.iteration != iter) {
      throw std::runtime_error("server_step: pushes from mixed iterations");
    }
    if (p.total_dims != params.size()) {
      throw std::runtime_error("server_step: push dimension mismatch");
    }
  }

  // Aggregation in worker-id order keeps the floating-point result
  // independent of arrival order.
  Vec aggregate(params.size(), 0.0);
  std::vector<bool> touched(params.size(), false);
  for (const SparseUpdate& p : pushes) {
    for (std::size_t k = 0; k < p.indices.size(); ++k) {
      aggregate[p.indices[k]] += p.values[k];
      touched[p.indices[k]] = true;
    }
  }
  apply_update(params, aggregate, lr, n_workers);

  PullResponse pull;
  pull.iteration = iter;
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (touched[j]) {
      pull.indices.push_back(static_cast<std::uint32_t>(j));
      pull.values.push_back(params[j]);
    }
  }
  return pull;
}

namespace {

struct WorkerState {
  Shard shard;
  std::size_t cursor = 0;
  FilterState filter;
  Vec snapshot;
};

std::span<const Sample> next_batch(WorkerState& w, int batch_size, std::vector<Sample>& scratch) {
  const std::size_t n = w.shard.samples.size();
  const std::size_t b = static_cast<std::size_t>(batch_size);
  if (w.cursor + b <= n) {
    std::span<const Sample> out(w.shard.samples.data() + w.cursor, b);
    w.cursor = (w.cursor + b) % n;
    return out;
  }
  // wrap-around: materialize the cyclic batch
  scratch.clear();
  for (std::size_t k = 0; k < b; ++k) {
    scratch.push_back(w.shard.samples[(w.cursor + k) % n]);
  }
  w.cursor = (w.cursor + b) % n;
  return scratch;
}

struct TrainRun {
  const TrainConfig& config;
  const std::vector<Sample>& test_set;
  Vec server_params;
  std::vector<WorkerState> workers;
  std::vector<SparseUpdate> pushes;
  std::vector<double> iter_train_loss;
  PullResponse pull;
  std::optional<double> iter_test_loss;
  TrainingLog log;
  std::uint64_t iteration = 0;

  explicit TrainRun(const TrainConfig& cfg, const std::vector<Sample>& dataset,
                    const std::vector<Sample>& test)
      : config(cfg), test_set(test) {
    cfg.validate();
    server_params = init_model(cfg.spec);
    const std::size_t p = server_params.size();
    auto shards = partition(dataset, cfg.n_workers, cfg.seed);
    workers.resize(static_cast<std::size_t>(cfg.n_workers));
    for (int i = 0; i < cfg.n_workers; ++i) {
      auto& w = workers[static_cast<std::size_t>(i)];
      w.shard = std::move(shards[static_cast<std::size_t>(i)]);
      w.filter = FilterState(cfg.filter, cfg.delta, p);
      w.snapshot = server_params;
    }
    pushes.resize(workers.size());
    iter_train_loss.resize(workers.size(), 0.0);
    log.rows.reserve(static_cast<std::size_t>(cfg.max_iterations) * workers.size());
  }

  void worker_compute(int i, std::vector<Sample>& scratch) {
    auto& w = workers[static_cast<std::size_t>(i)];
    const auto batch = next_batch(w, config.batch_size, scratch);
    BatchGradient bg = batch_gradient(w.snapshot, config.spec, batch);
    iter_train_loss[static_cast<std::size_t>(i)] = bg.mean_loss;
    pushes[static_cast<std::size_t>(i)] =
        filter_push(w.filter, bg.grad, static_cast<std::uint32_t>(i), iteration);
  }

  // Runs once per iteration after every worker has pushed.
  void server_aggregate() {
    pull = server_step(server_params, pushes, config.lr, config.n_workers);
    iter_test_loss.reset();
    if (config.eval_every > 0 && ((iteration + 1) % static_cast<std::uint64_t>(config.eval_every) == 0 ||
                                  iteration + 1 == static_cast<std::uint64_t>(config.max_iterations))) {
      iter_test_loss = mean_loss(server_params, config.spec, test_set);
      if (!std::isfinite(*iter_test_loss)) {
        throw DivergenceError("test loss diverged at iteration " + std::to_string(iteration));
      }
    }
  }

  void worker_apply(int i) {
    auto& w = workers[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < pull.indices.size(); ++k) {
      w.snapshot[pull.indices[k]] = pull.values[k];
    }
  }

  std::vector<Vec>* trajectory = nullptr;

  void record_rows() {
    if (trajectory) trajectory->push_back(server_params);
    const std::size_t p = server_params.size();
    const bool dense = config.filter == FilterKind::Raw;
    const std::uint64_t pull_cost =
        dense ? dense_bytes(p, 4) : sparse_bytes(pull.indices.size());
    for (std::size_t i = 0; i < workers.size(); ++i) {
      if (!std::isfinite(iter_train_loss[i])) {
        throw DivergenceError("train loss diverged at iteration " + std::to_string(iteration) +
                              " on worker " + std::to_string(i));
      }
      LogRow row;
      row.iteration = iteration;
      row.worker_id = static_cast<int>(i);
      row.train_loss = iter_train_loss[i];
      row.drop_frac = drop_fraction(pushes[i]);
      row.push_bytes = dense ? dense_bytes(p, 4) : sparse_bytes(pushes[i].indices.size());
      row.pull_bytes = pull_cost;
      if (i == 0) row.test_loss = iter_test_loss;
      log.rows.push_back(std::move(row));
    }
  }

  TrainResult run_sequential() {
    std::vector<Sample> scratch;
    for (iteration = 0; iteration < static_cast<std::uint64_t>(config.max_iterations); ++iteration) {
      for (int i = 0; i < config.n_workers; ++i) worker_compute(i, scratch);
      server_aggregate();
      for (int i = 0; i < config.n_workers; ++i) worker_apply(i);
      record_rows();
    }
    return {std::move(server_params), std::move(log)};
  }

  TrainResult run_threaded() {
    const int n = config.n_workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    bool stop = false;
    bool server_phase = true;  // barrier phases alternate: server step / advance

    auto fail = [&](std::exception_ptr e) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::move(e);
    };

    auto on_completion = [&]() noexcept {
      if (server_phase) {
        if (!failure) {
          try {
            server_aggregate();
            record_rows();
          } catch (...) {
            fail(std::current_exception());
          }
        }
        if (failure || iteration + 1 >= static_cast<std::uint64_t>(config.max_iterations)) {
          stop = true;
        }
      } else {
        ++iteration;
      }
      server_phase = !server_phase;
    };
    std::barrier barrier(n, on_completion);

    auto worker_loop = [&](int i) {
      std::vector<Sample> scratch;
      while (true) {
        try {
          worker_compute(i, scratch);
        } catch (...) {
          fail(std::current_exception());
        }
        barrier.arrive_and_wait();  // server phase
        if (stop) {
          if (!failure) worker_apply(i);
          break;
        }
        worker_apply(i);
        barrier.arrive_and_wait();  // advance phase
      }
    };

    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) threads.emplace_back(worker_loop, i);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    return {std::move(server_params), std::move(log)};
  }
};

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<Sample>& dataset,
                  const std::vector<Sample>& test_set, ExecMode mode,
                  std::vector<Vec>* trajectory) {
  if (config.eval_every > 0 && test_set.empty()) {
    throw std::invalid_argument("train: eval_every > 0 requires a non-empty test set");
  }
  TrainRun run(config, dataset, test_set);
  run.trajectory = trajectory;
  return mode == ExecMode::Sequential ? run.run_sequential() : run.run_threaded();
}

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_training_log_csv(std::ostream& os, const TrainingLog& log,
                            const std::vector<std::pair<std::string, std::string>>& header) {
  for (const auto& [k, v] : header) os << "# " << k << " = " << v << "\n";
  os << "iteration,worker_id,train_loss,drop_fraction,push_bytes,pull_bytes,test_loss\n";
  for (const LogRow& r : log.rows) {
    os << r.iteration << ',' << r.worker_id << ',' << fmt_double(r.train_loss) << ','
       << fmt_double(r.drop_frac) << ',' << r.push_bytes << ',' << r.pull_bytes << ',';
    if (r.test_loss) os << fmt_double(*r.test_loss);
    os << "\n";
  }
}

TrainingLog read_training_log_csv(std::istream& is) {
  TrainingLog log;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {  // column header
      header_seen = true;
      continue;
    }
    std::array<std::string, 7> fields;
    std::size_t field = 0, start = 0;
    for (std::size_t pos = 0; pos <= line.size() && field < 7; ++pos) {
      if (pos == line.size() || line[pos] == ',') {
        fields[field++] = line.substr(start, pos - start);
        start = pos + 1;
      }
    }
    if (field < 6) throw std::runtime_error("training log: malformed row: " + line);
    LogRow r;
    r.iteration = std::stoull(fields[0]);
    r.worker_id = std::stoi(fields[1]);
    r.train_loss = std::stod(fields[2]);
    r.drop_frac = std::stod(fields[3]);
    r.push_bytes = std::stoull(fields[4]);
    r.pull_bytes = std::stoull(fields[5]);
    if (!fields[6].empty()) r.test_loss = std::stod(fields[6]);
    log.rows.push_back(std::move(r));
  }
  return log;
}

}  // namespace agedist
