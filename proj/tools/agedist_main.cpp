#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agedist/config.hpp"
#include "agedist/demographics.hpp"
#include "agedist/metrics.hpp"
#include "agedist/netmodel.hpp"
#include "agedist/ps.hpp"
#include "agedist/synthetic.hpp"

namespace fs = std::filesystem;
using namespace agedist;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitIo = 3;

bool verbose() {
  const char* v = std::getenv("AGEDIST_VERBOSE");
  return v != nullptr && std::string(v) != "0" && std::string(v) != "";
}

void note(const std::string& msg) {
  if (verbose()) std::cerr << "[agedist] " << msg << "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct TrainOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string data_path;
  std::string test_path;
  std::string mode = "threaded";
  bool dry_run = false;
};

// Merged per-iteration comparison across filters: mean train loss and drop
// fraction over workers, test loss where evaluated.
void write_comparison_csv(const fs::path& path,
                          const std::vector<std::pair<std::string, TrainingLog>>& logs) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "iteration";
  for (const auto& [name, log] : logs) {
    os << ',' << name << "_train_loss," << name << "_drop_fraction," << name << "_test_loss";
  }
  os << "\n";
  std::uint64_t max_iter = 0;
  for (const auto& [name, log] : logs) {
    if (!log.rows.empty()) max_iter = std::max(max_iter, log.rows.back().iteration + 1);
  }
  for (std::uint64_t it = 0; it < max_iter; ++it) {
    os << it;
    for (const auto& [name, log] : logs) {
      double loss = 0.0, drop = 0.0;
      std::optional<double> test;
      int count = 0;
      for (const LogRow& r : log.rows) {
        if (r.iteration != it) continue;
        loss += r.train_loss;
        drop += r.drop_frac;
        if (r.test_loss) test = r.test_loss;
        ++count;
      }
      if (count > 0) {
        os << ',' << fmt(loss / count) << ',' << fmt(drop / count) << ',';
      } else {
        os << ",,,";
      }
      if (test) os << fmt(*test);
    }
    os << "\n";
  }
}

void write_timing_csv(const fs::path& path, const TrainingLog& log, const LinkModel& link,
                      double compute_seconds) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "iteration,compute_s,push_s,pull_s,total_s\n";
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> per_iter;  // max push/pull
  for (const LogRow& r : log.rows) {
    auto& [push, pull] = per_iter[r.iteration];
    push = std::max(push, r.push_bytes);
    pull = std::max(pull, r.pull_bytes);
  }
  for (const auto& [it, bytes] : per_iter) {
    const IterationTiming t = iteration_time(compute_seconds, bytes.first, bytes.second, link);
    os << it << ',' << fmt(t.compute_seconds) << ',' << fmt(t.push_seconds) << ','
       << fmt(t.pull_seconds) << ',' << fmt(t.total_seconds) << "\n";
  }
}

int run_train(const TrainOptions& opt) {
  const KeyValueFile kv = KeyValueFile::parse(opt.config_path);
  TrainConfig base = train_config_from(kv);
  const SyntheticConfig syn = synthetic_config_from(kv);
  if (syn.classes.num_classes() != base.spec.num_classes) {
    throw ConfigError("c (" + std::to_string(base.spec.num_classes) +
                      ") does not match age range [" + std::to_string(syn.classes.min_age) + ", " +
                      std::to_string(syn.classes.max_age) + "]");
  }
  std::vector<std::string> filters =
      kv.get_string_list("filters", {to_string(base.filter)});
  const ExecMode mode =
      opt.mode == "sequential" ? ExecMode::Sequential : ExecMode::Threaded;

  if (opt.dry_run) {
    for (const auto& [k, v] : config_header(base)) std::cout << k << " = " << v << "\n";
    std::cout << "filters = ";
    for (std::size_t i = 0; i < filters.size(); ++i) std::cout << (i ? "," : "") << filters[i];
    std::cout << "\n";
    return kExitOk;
  }

  std::vector<Sample> train_set, test_set;
  if (!opt.data_path.empty()) {
    train_set = read_samples_csv(opt.data_path, syn.classes, syn.theta);
    if (opt.test_path.empty()) throw ConfigError("--data requires --test");
    test_set = read_samples_csv(opt.test_path, syn.classes, syn.theta);
  } else {
    Dataset ds = generate_synthetic(syn);
    train_set = std::move(ds.train);
    test_set = std::move(ds.test);
  }
  note("dataset: " + std::to_string(train_set.size()) + " train / " +
       std::to_string(test_set.size()) + " test samples");

  fs::create_directories(opt.out_dir);
  std::vector<std::pair<std::string, TrainingLog>> logs;
  for (const std::string& filter_name : filters) {
    TrainConfig cfg = base;
    cfg.filter = filter_kind_from_string(filter_name);
    note("training with filter " + filter_name);
    TrainResult result = train(cfg, train_set, test_set, mode);
    const fs::path log_path = fs::path(opt.out_dir) / ("train_log_" + filter_name + ".csv");
    std::ofstream os(log_path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + log_path.string());
    write_training_log_csv(os, result.log, config_header(cfg));
    save_checkpoint(fs::path(opt.out_dir) / ("model_" + filter_name + ".ckpt"), cfg.spec,
                    result.params);
    logs.emplace_back(filter_name, std::move(result.log));
  }
  if (logs.size() > 1) {
    write_comparison_csv(fs::path(opt.out_dir) / "comparison.csv", logs);
  }

  const double compute_seconds = kv.get_double("compute_seconds", 0.0);
  std::size_t link_index = 0;
  for (const std::string& bw : kv.get_string_list("links", {})) {
    LinkModel link;
    link.bandwidth_bps = std::stod(bw);
    link.per_message_latency = kv.get_double("latency", 0.0);
    for (const auto& [name, log] : logs) {
      write_timing_csv(fs::path(opt.out_dir) /
                           ("timing_" + name + "_link" + std::to_string(link_index) + ".csv"),
                       log, link, compute_seconds);
    }
    ++link_index;
  }
  return kExitOk;
}

int run_eval(const std::string& checkpoint, const std::string& data_path, double theta,
             int min_age, const std::vector<double>& gaps, double bin_width,
             const std::string& out_path, bool use_argmax) {
  auto [spec, params] = load_checkpoint(checkpoint);
  const AgeClassSet classes{min_age, min_age + spec.num_classes - 1};
  const std::vector<Sample> data = read_samples_csv(data_path, classes, theta);
  if (data.empty()) throw std::runtime_error("eval: empty dataset " + data_path);

  std::vector<double> preds, truths;
  for (const Sample& s : data) {
    const AgePrediction p = predict_age(softmax(forward(params, spec, s.features)), classes);
    preds.push_back(use_argmax ? static_cast<double>(p.argmax_age) : p.expected_age);
    truths.push_back(static_cast<double>(s.true_age));
  }

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + out_path);
    os = &file;
  }
  *os << "metric,value\n";
  *os << "mae," << fmt(mae(preds, truths)) << "\n";
  *os << "\ngap,accuracy\n";
  for (double gap : gaps) {
    *os << gap << ',' << fmt(age_group_accuracy(preds, truths, gap)) << "\n";
  }
  *os << "\nbin_low,bin_high,count\n";
  const auto hist = error_histogram(preds, truths, bin_width);
  for (std::size_t b = 0; b < hist.size(); ++b) {
    *os << fmt(bin_width * b) << ',' << fmt(bin_width * (b + 1)) << ',' << hist[b] << "\n";
  }
  return kExitOk;
}

int run_simulate_comm(const std::string& log_path, double bandwidth, double latency,
                      double compute_seconds, const std::string& out_path) {
  std::ifstream is(log_path);
  if (!is) throw std::runtime_error("cannot open " + log_path);
  const TrainingLog log = read_training_log_csv(is);
  LinkModel link{bandwidth, latency};
  write_timing_csv(out_path, log, link, compute_seconds);
  return kExitOk;
}

int run_demographics(const std::string& model_path, const std::string& input_path,
                     double interval_seconds, int group_width, const std::string& out_dir,
                     int min_age, double lateness) {
  auto [spec, params] = load_checkpoint(model_path);
  const AgeClassSet classes{min_age, min_age + spec.num_classes - 1};
  const std::vector<FaceRecord> records = read_face_records(input_path);

  StreamStats stats;
  const auto batches = batch_by_interval(records, interval_seconds, lateness, &stats);
  fs::create_directories(out_dir);
  const fs::path scores_path = fs::path(out_dir) / "scores.csv";
  std::ofstream scores(scores_path, std::ios::trunc);
  if (!scores) throw std::runtime_error("cannot open " + scores_path.string());
  scores << "interval,record_id,expected_age\n";

  AgeGroupHistogram hist;
  hist.group_width = group_width;
  hist.min_age = min_age;
  for (const IntervalBatch& batch : batches) {
    const auto scored = score_interval(params, spec, batch, classes, &stats);
    for (const ScoredRecord& s : scored) {
      scores << batch.interval_index << ',' << s.record_id << ','
             << fmt(s.prediction.expected_age) << "\n";
    }
    update_histogram(hist, scored);
  }
  persist_histogram(hist, fs::path(out_dir) / "histogram.csv");
  note("accepted " + std::to_string(stats.accepted) + ", rejected " +
       std::to_string(stats.rejected_late) + " late, skipped " +
       std::to_string(stats.skipped_dim) + " malformed");
  return kExitOk;
}

int run_generate(const std::string& config_path, const std::string& out_train,
                 const std::string& out_test, const std::string& stream_out,
                 double stream_rate) {
  KeyValueFile kv = config_path.empty()
                        ? KeyValueFile::parse_string("", "<defaults>")
                        : KeyValueFile::parse(config_path);
  const SyntheticConfig syn = synthetic_config_from(kv);
  const Dataset ds = generate_synthetic(syn);
  write_samples_csv(out_train, ds.train);
  write_samples_csv(out_test, ds.test);
  if (!stream_out.empty()) {
    // face-record stream from the test split, `stream_rate` records per second
    std::ofstream os(stream_out, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + stream_out);
    os << "record_id,timestamp,features...\n";
    os.precision(17);
    for (std::size_t k = 0; k < ds.test.size(); ++k) {
      os << "rec" << k << ',' << static_cast<double>(k) / stream_rate;
      for (double f : ds.test[k].features) os << ',' << f;
      os << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication-efficient parameter-server trainer and demographics scorer"};
  app.require_subcommand(1);

  TrainOptions topt;
  auto* train_cmd = app.add_subcommand("train", "Run PS training for one or more filters");
  train_cmd->add_option("--config", topt.config_path, "key = value config file")->required();
  train_cmd->add_option("--out-dir", topt.out_dir, "output directory");
  train_cmd->add_option("--data", topt.data_path, "training sample CSV (default: synthetic)");
  train_cmd->add_option("--test", topt.test_path, "test sample CSV");
  train_cmd->add_option("--mode", topt.mode, "threaded|sequential")
      ->check(CLI::IsMember({"threaded", "sequential"}));
  train_cmd->add_flag("--dry-run", topt.dry_run, "echo resolved config and exit");

  std::string eval_ckpt, eval_data, eval_out;
  double eval_theta = 1.0, eval_bin_width = 5.0;
  int eval_min_age = 1;
  bool eval_argmax = false;
  std::vector<double> eval_gaps{5, 10, 15, 20};
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a sample CSV");
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--theta", eval_theta);
  eval_cmd->add_option("--min-age", eval_min_age);
  eval_cmd->add_option("--gaps", eval_gaps, "age-group gaps in years");
  eval_cmd->add_option("--bin-width", eval_bin_width);
  eval_cmd->add_option("--out", eval_out, "output CSV (default stdout)");
  eval_cmd->add_flag("--argmax", eval_argmax, "predict argmax age instead of expectation");

  std::string sim_log, sim_out;
  double sim_bw = 1e9, sim_latency = 0.0, sim_compute = 0.0;
  auto* sim_cmd = app.add_subcommand("simulate-comm", "Model per-iteration communication time");
  sim_cmd->add_option("--log", sim_log, "TrainingLog CSV")->required();
  sim_cmd->add_option("--bandwidth", sim_bw, "link bandwidth in bits/s");
  sim_cmd->add_option("--latency", sim_latency, "per-message latency in seconds");
  sim_cmd->add_option("--compute-seconds", sim_compute, "compute time per iteration");
  sim_cmd->add_option("--out", sim_out, "timing CSV path")->required();

  std::string demo_model, demo_input, demo_out = "demographics_out";
  double demo_interval = 1.0, demo_lateness = 0.0;
  int demo_group_width = 10, demo_min_age = 1;
  auto* demo_cmd = app.add_subcommand("demographics", "Interval-batched stream scoring");
  demo_cmd->add_option("--model", demo_model, "model checkpoint")->required();
  demo_cmd->add_option("--input", demo_input, "face record CSV")->required();
  demo_cmd->add_option("--interval-seconds", demo_interval);
  demo_cmd->add_option("--group-width", demo_group_width);
  demo_cmd->add_option("--min-age", demo_min_age);
  demo_cmd->add_option("--lateness", demo_lateness, "allowed out-of-order slack in seconds");
  demo_cmd->add_option("--out", demo_out, "output directory");

  std::string gen_config, gen_train = "train.csv", gen_test = "test.csv", gen_stream;
  double gen_stream_rate = 10.0;
  auto* gen_cmd = app.add_subcommand("generate-data", "Generate a synthetic age dataset");
  gen_cmd->add_option("--config", gen_config, "key = value config file");
  gen_cmd->add_option("--out-train", gen_train);
  gen_cmd->add_option("--out-test", gen_test);
  gen_cmd->add_option("--stream-out", gen_stream, "also emit a face-record stream CSV");
  gen_cmd->add_option("--stream-rate", gen_stream_rate, "stream records per second");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(topt);
    if (eval_cmd->parsed()) {
      return run_eval(eval_ckpt, eval_data, eval_theta, eval_min_age, eval_gaps, eval_bin_width,
                      eval_out, eval_argmax);
    }
    if (sim_cmd->parsed()) {
      return run_simulate_comm(sim_log, sim_bw, sim_latency, sim_compute, sim_out);
    }
    if (demo_cmd->parsed()) {
      return run_demographics(demo_model, demo_input, demo_interval, demo_group_width, demo_out,
                              demo_min_age, demo_lateness);
    }
    if (gen_cmd->parsed()) {
      return run_generate(gen_config, gen_train, gen_test, gen_stream, gen_stream_rate);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
