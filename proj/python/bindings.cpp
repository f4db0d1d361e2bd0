#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "graphfed/approx.hpp"
#include "graphfed/datagen.hpp"
#include "graphfed/error.hpp"
#include "graphfed/experiment.hpp"
#include "graphfed/io.hpp"
#include "graphfed/model.hpp"
#include "graphfed/partition.hpp"

namespace py = pybind11;
using namespace graphfed;

namespace {

py::dict epoch_dict(const EpochReport& e) {
  py::dict d;
  d["epoch"] = e.epoch;
  d["train_loss"] = e.train_loss ? py::cast(*e.train_loss) : py::none();
  d["val_f1"] = e.val_f1;
  d["test_f1"] = e.test_f1;
  d["wall_time_s"] = e.wall_time_s;
  d["bytes_exchanged"] = e.bytes_exchanged;
  return d;
}

py::dict outcome_dict(const RunOutcome& o) {
  py::dict d;
  d["test_f1"] = o.train.test_f1;
  d["best_epoch"] = o.train.best_epoch;
  d["best_val_f1"] = o.train.best_val_f1;
  d["preprocessing_s"] = o.preprocessing_s;
  py::list epochs;
  for (const auto& e : o.train.epochs) epochs.append(epoch_dict(e));
  d["epochs"] = epochs;
  return d;
}

ExperimentConfig parse(const std::string& json) { return experiment_from_json(json); }

PartitionAssignment to_assignment(const std::vector<PartitionId>& a) {
  PartitionAssignment p;
  p.assignment = a;
  for (auto x : a) p.num_partitions = std::max(p.num_partitions, x + 1);
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed GCN training simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  py::class_<SbmConfig>(m, "SbmConfig")
      .def(py::init<>())
      .def_readwrite("n", &SbmConfig::n)
      .def_readwrite("k", &SbmConfig::k)
      .def_readwrite("p_in", &SbmConfig::p_in)
      .def_readwrite("p_out", &SbmConfig::p_out)
      .def_readwrite("feature_dim", &SbmConfig::feature_dim)
      .def_readwrite("noise_sigma", &SbmConfig::noise_sigma)
      .def_readwrite("train_fraction", &SbmConfig::train_fraction)
      .def_readwrite("val_fraction", &SbmConfig::val_fraction)
      .def_readwrite("test_fraction", &SbmConfig::test_fraction)
      .def_readwrite("seed", &SbmConfig::seed);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("num_vertices", &Dataset::num_vertices)
      .def_property_readonly("num_edges", [](const Dataset& d) { return d.graph.num_edges(); })
      .def_property_readonly("num_classes", [](const Dataset& d) { return d.labels.num_classes; })
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels.values; })
      .def_property_readonly("split",
                             [](const Dataset& d) {
                               std::vector<std::string> out;
                               for (Role r : d.split.roles) out.emplace_back(role_name(r));
                               return out;
                             })
      .def("edges", [](const Dataset& d) { return d.graph.edges(); })
      .def("features",
           [](const Dataset& d) {
             py::array_t<double> a({d.features.rows(), d.features.cols()});
             std::copy(d.features.data().begin(), d.features.data().end(), a.mutable_data());
             return a;
           })
      .def("save", [](const Dataset& d, const fs::path& dir) { io::save_dataset(dir, d); }, py::arg("dir"))
      .def_static("load", &io::load_dataset, py::arg("dir"));

  m.def("generate_sbm", &generate_sbm, py::arg("config"));
  m.def("delete_training_vertices", &delete_training_vertices, py::arg("dataset"), py::arg("fraction"),
        py::arg("seed"));

  m.def(
      "partition",
      [](const Dataset& d, std::size_t parts, std::uint64_t seed) {
        return partition_bfs_balanced(d.graph, parts, seed).assignment;
      },
      py::arg("dataset"), py::arg("m"), py::arg("seed") = 1);
  m.def(
      "cut_edges",
      [](const Dataset& d, const std::vector<PartitionId>& a) { return cut_stats(d.graph, to_assignment(a)).cut_edges; },
      py::arg("dataset"), py::arg("assignment"));

  m.def("nts", &nts, py::arg("overlap"), py::arg("partition_size"), py::arg("m"));
  m.def("overhead_of", &overhead_of, py::arg("overlap"), py::arg("m"));
  m.def(
      "sample_from_partition",
      [](std::size_t n, const std::vector<Edge>& edges, const std::vector<PartitionId>& a, PartitionId p,
         PartitionId op, std::size_t quota, std::uint64_t seed) {
        Rng rng = pair_rng(seed, p, op);
        return sample_from_partition(from_edge_list(edges, n), to_assignment(a), p, op, quota, rng);
      },
      py::arg("n"), py::arg("edges"), py::arg("assignment"), py::arg("p"), py::arg("op"), py::arg("quota"),
      py::arg("seed") = 1);
  m.def(
      "micro_f1",
      [](const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& truth) {
        std::vector<std::size_t> rows(pred.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        if (truth.size() != pred.size()) throw InputError("micro_f1: length mismatch");
        return micro_f1(pred, truth, rows);
      },
      py::arg("predictions"), py::arg("labels"));

  m.def("default_config", [] { return experiment_to_json(ExperimentConfig{}); });
  m.def(
      "merge_config", [](const std::string& json, const std::string& base) {
        return experiment_to_json(experiment_from_json(json, parse(base)));
      },
      py::arg("overrides"), py::arg("base"));
  m.def(
      "train",
      [](const std::string& config) {
        const ExperimentConfig cfg = parse(config);
        cfg.validate();
        RunOutcome o;
        {
          py::gil_scoped_release nogil;
          o = run_training(load_experiment_dataset(cfg), cfg);
        }
        return outcome_dict(o);
      },
      py::arg("config"));
  m.def(
      "run_experiment",
      [](const std::string& config, const fs::path& out_dir) {
        RunOutcome o;
        {
          py::gil_scoped_release nogil;
          o = run_experiment(parse(config), out_dir);
        }
        return outcome_dict(o);
      },
      py::arg("config"), py::arg("out_dir"));
  m.def(
      "run_sweep",
      [](const std::string& config, const fs::path& out_dir) {
        std::vector<SweepCell> cells;
        {
          py::gil_scoped_release nogil;
          cells = run_sweep(parse(config), out_dir);
        }
        py::list out;
        for (const auto& c : cells) {
          py::dict d;
          d["m"] = c.m;
          d["overlap"] = c.overlap;
          d["overhead"] = c.overhead;
          d["test_f1"] = c.test_f1;
          d["mean_test_f1"] = c.mean_test_f1;
          d["std_test_f1"] = c.std_test_f1;
          d["mean_epochs_to_converge"] = c.mean_epochs_to_converge;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("out_dir"));
  m.def(
      "run_resilience",
      [](const std::string& config, const fs::path& out_dir) {
        std::vector<ResiliencePoint> pts;
        {
          py::gil_scoped_release nogil;
          pts = run_resilience(parse(config), out_dir);
        }
        py::list out;
        for (const auto& p : pts) {
          py::dict d;
          d["fraction"] = p.fraction;
          d["test_f1"] = p.test_f1;
          d["remaining_train"] = p.remaining_train;
          d["mean_test_f1"] = p.mean_test_f1;
          d["std_test_f1"] = p.std_test_f1;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("out_dir"));
  m.def("write_report", &write_report, py::arg("dir"));
}
