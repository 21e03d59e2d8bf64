#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "agedist/config.hpp"
#include "agedist/demographics.hpp"
#include "agedist/metrics.hpp"
#include "agedist/netmodel.hpp"
#include "agedist/ps.hpp"
#include "agedist/synthetic.hpp"

namespace py = pybind11;
using namespace agedist;

PYBIND11_MODULE(_agedist, m) {
  m.doc() = "Parameter-server training with sparse update filters and "
            "Gaussian label-distribution age estimation";

  py::class_<AgeClassSet>(m, "AgeClassSet")
      .def(py::init<int, int>(), py::arg("min_age") = 1, py::arg("max_age") = 101)
      .def_readwrite("min_age", &AgeClassSet::min_age)
      .def_readwrite("max_age", &AgeClassSet::max_age)
      .def("num_classes", &AgeClassSet::num_classes);

  m.def("gaussian_label_distribution", &gaussian_label_distribution, py::arg("age"),
        py::arg("theta"), py::arg("classes"));
  m.def("softmax", &softmax);
  m.def("kl_divergence", &kl_divergence);
  m.def("kl_loss", &kl_loss);
  m.def("kl_loss_gradient", &kl_loss_gradient);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init([](int input_dim, std::vector<int> hidden_dims, int num_classes,
                       std::uint64_t seed) {
             ModelSpec s{input_dim, std::move(hidden_dims), num_classes, seed};
             s.validate();
             return s;
           }),
           py::arg("input_dim"), py::arg("hidden_dims"), py::arg("num_classes"),
           py::arg("seed") = 0)
      .def_readwrite("input_dim", &ModelSpec::input_dim)
      .def_readwrite("hidden_dims", &ModelSpec::hidden_dims)
      .def_readwrite("num_classes", &ModelSpec::num_classes)
      .def_readwrite("seed", &ModelSpec::seed)
      .def("param_count", &ModelSpec::param_count);

  py::class_<Sample>(m, "Sample")
      .def(py::init<>())
      .def_readwrite("features", &Sample::features)
      .def_readwrite("label", &Sample::label)
      .def_readwrite("true_age", &Sample::true_age);

  m.def("init_model", &init_model);
  m.def("forward", &forward);
  m.def(
      "batch_gradient",
      [](const Vec& params, const ModelSpec& spec, const std::vector<Sample>& batch) {
        BatchGradient g = batch_gradient(params, spec, batch);
        return py::make_tuple(g.grad, g.mean_loss);
      },
      "Returns (mean_gradient, mean_loss)");
  m.def("apply_update", [](Vec params, const Vec& aggregate, double lr, int n_workers) {
    apply_update(params, aggregate, lr, n_workers);
    return params;
  });
  m.def("save_checkpoint", &save_checkpoint);
  m.def("load_checkpoint", &load_checkpoint);

  py::enum_<FilterKind>(m, "FilterKind")
      .value("RAW", FilterKind::Raw)
      .value("DSU", FilterKind::Dsu)
      .value("ASU", FilterKind::Asu);

  py::class_<SparseUpdate>(m, "SparseUpdate")
      .def_readonly("worker_id", &SparseUpdate::worker_id)
      .def_readonly("iteration", &SparseUpdate::iteration)
      .def_readonly("indices", &SparseUpdate::indices)
      .def_readonly("values", &SparseUpdate::values)
      .def_readonly("total_dims", &SparseUpdate::total_dims);

  py::class_<FilterState>(m, "FilterState")
      .def(py::init<FilterKind, double, std::size_t>(), py::arg("kind"), py::arg("delta"),
           py::arg("total_dims"))
      .def_readonly("kind", &FilterState::kind)
      .def_readonly("delta", &FilterState::delta)
      .def_readonly("residual", &FilterState::residual);

  m.def("filter_push", &filter_push, py::arg("state"), py::arg("update"),
        py::arg("worker_id") = 0, py::arg("iteration") = 0);
  m.def("drop_fraction", &drop_fraction);
  m.def("densify", &densify);
  m.def("encode_sparse_update", [](const SparseUpdate& s) {
    const auto bytes = encode_sparse_update(s);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });

  m.def("dense_bytes", &dense_bytes);
  m.def("sparse_bytes", &sparse_bytes);
  py::class_<LinkModel>(m, "LinkModel")
      .def(py::init<double, double>(), py::arg("bandwidth_bps") = 1e9,
           py::arg("per_message_latency") = 0.0)
      .def_readwrite("bandwidth_bps", &LinkModel::bandwidth_bps)
      .def_readwrite("per_message_latency", &LinkModel::per_message_latency);
  py::class_<IterationTiming>(m, "IterationTiming")
      .def_readonly("compute_seconds", &IterationTiming::compute_seconds)
      .def_readonly("push_seconds", &IterationTiming::push_seconds)
      .def_readonly("pull_seconds", &IterationTiming::pull_seconds)
      .def_readonly("total_seconds", &IterationTiming::total_seconds);
  m.def("iteration_time", &iteration_time);
  m.def("speedup_ratio", &speedup_ratio);

  py::class_<AgePrediction>(m, "AgePrediction")
      .def_readonly("expected_age", &AgePrediction::expected_age)
      .def_readonly("argmax_age", &AgePrediction::argmax_age)
      .def_readonly("prob", &AgePrediction::prob);
  m.def("predict_age", &predict_age);
  m.def("mae", &mae);
  py::enum_<GroupRule>(m, "GroupRule")
      .value("CENTERED_RANGE", GroupRule::CenteredRange)
      .value("FIXED_BINS", GroupRule::FixedBins);
  m.def("age_group_accuracy", &age_group_accuracy, py::arg("predictions"), py::arg("truths"),
        py::arg("gap"), py::arg("rule") = GroupRule::CenteredRange);
  m.def("error_histogram", &error_histogram);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("spec", &TrainConfig::spec)
      .def_readwrite("n_workers", &TrainConfig::n_workers)
      .def_readwrite("filter", &TrainConfig::filter)
      .def_readwrite("delta", &TrainConfig::delta)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("max_iterations", &TrainConfig::max_iterations)
      .def_readwrite("eval_every", &TrainConfig::eval_every)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<LogRow>(m, "LogRow")
      .def_readonly("iteration", &LogRow::iteration)
      .def_readonly("worker_id", &LogRow::worker_id)
      .def_readonly("train_loss", &LogRow::train_loss)
      .def_readonly("drop_fraction", &LogRow::drop_frac)
      .def_readonly("push_bytes", &LogRow::push_bytes)
      .def_readonly("pull_bytes", &LogRow::pull_bytes)
      .def_readonly("test_loss", &LogRow::test_loss);
  py::class_<TrainingLog>(m, "TrainingLog").def_readonly("rows", &TrainingLog::rows);

  py::enum_<ExecMode>(m, "ExecMode")
      .value("SEQUENTIAL", ExecMode::Sequential)
      .value("THREADED", ExecMode::Threaded);

  m.def(
      "train",
      [](const TrainConfig& cfg, const std::vector<Sample>& dataset,
         const std::vector<Sample>& test_set, ExecMode mode) {
        TrainResult r = [&] {
          // worker threads must not hold the interpreter lock
          py::gil_scoped_release release;
          return train(cfg, dataset, test_set, mode);
        }();
        return py::make_tuple(r.params, r.log);
      },
      py::arg("config"), py::arg("dataset"), py::arg("test_set"),
      py::arg("mode") = ExecMode::Threaded);

  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init<>())
      .def_readwrite("n_samples", &SyntheticConfig::n_samples)
      .def_readwrite("input_dim", &SyntheticConfig::input_dim)
      .def_readwrite("classes", &SyntheticConfig::classes)
      .def_readwrite("theta", &SyntheticConfig::theta)
      .def_readwrite("noise_stddev", &SyntheticConfig::noise_stddev)
      .def_readwrite("seed", &SyntheticConfig::seed);
  m.def("generate_synthetic", [](const SyntheticConfig& cfg) {
    Dataset d = generate_synthetic(cfg);
    return py::make_tuple(d.train, d.test);
  });
}
