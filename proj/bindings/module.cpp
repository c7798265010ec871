#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vhtwin/config.hpp"
#include "vhtwin/dataio.hpp"
#include "vhtwin/dcs.hpp"
#include "vhtwin/errors.hpp"
#include "vhtwin/experiment.hpp"
#include "vhtwin/forecast.hpp"
#include "vhtwin/metrics.hpp"
#include "vhtwin/topology.hpp"
#include "vhtwin/twinning.hpp"

namespace py = pybind11;
using namespace vhtwin;

namespace {

ExperimentConfig config_from_dict(const std::map<std::string, std::string>& overrides) {
  ExperimentConfig config;
  for (const auto& [key, value] : overrides) apply_override(config, key, value);
  config.validate();
  return config;
}

py::dict report_to_dict(const EvalReport& report) {
  py::dict d;
  d["phase"] = report.phase;
  d["seed"] = report.seed;
  d["num_clusters"] = report.num_clusters;
  d["mse"] = report.mse;
  d["mae"] = report.mae;
  d["nrmse"] = report.nrmse;
  if (report.initial_mapping_s.has_value()) d["initial_mapping_s"] = *report.initial_mapping_s;
  if (report.update_rounds.has_value()) d["update_rounds"] = *report.update_rounds;
  d["uploads"] = report.uploads;
  d["broadcasts"] = report.broadcasts;
  d["global_updates"] = report.global_updates;
  d["config"] = report.config_echo;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Clustered federated twinning simulator for wireless traffic forecasting";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<DivergenceError>(m, "DivergenceError");

  // --- topology -------------------------------------------------------------
  py::class_<BaseStation>(m, "BaseStation")
      .def(py::init<>())
      .def(py::init([](int id, double x, double y, double coverage, double backhaul) {
             BaseStation bs;
             bs.id = id;
             bs.x_m = x;
             bs.y_m = y;
             bs.coverage_m = coverage;
             bs.backhaul_mbps = backhaul;
             bs.series_ref = id;
             return bs;
           }),
           py::arg("id"), py::arg("x_m"), py::arg("y_m"), py::arg("coverage_m"),
           py::arg("backhaul_mbps"))
      .def_readwrite("id", &BaseStation::id)
      .def_readwrite("x_m", &BaseStation::x_m)
      .def_readwrite("y_m", &BaseStation::y_m)
      .def_readwrite("coverage_m", &BaseStation::coverage_m)
      .def_readwrite("backhaul_mbps", &BaseStation::backhaul_mbps)
      .def_readwrite("series_ref", &BaseStation::series_ref);

  py::class_<NetworkGraph>(m, "NetworkGraph")
      .def_readonly("n", &NetworkGraph::n)
      .def_readonly("edges", &NetworkGraph::edges)
      .def("degrees", &NetworkGraph::degrees)
      .def("connected", &NetworkGraph::connected);

  py::class_<RelationshipGraph>(m, "RelationshipGraph")
      .def_readonly("topology", &RelationshipGraph::topology)
      .def_readonly("phi", &RelationshipGraph::phi);

  m.def("generate_regular_topology", &generate_regular_topology, py::arg("n"),
        py::arg("degree"), py::arg("seed"));
  m.def("coverage_overlap", &coverage_overlap);
  m.def("traffic_similarity", &traffic_similarity, py::arg("s1"), py::arg("s2"),
        py::arg("bins") = 16);
  m.def("backhaul_similarity", &backhaul_similarity);
  m.def("generate_roster", &generate_roster, py::arg("n_bs"), py::arg("seed"));

  // --- segmentation ----------------------------------------------------------
  py::class_<ClusterAssignment>(m, "ClusterAssignment")
      .def_readonly("labels", &ClusterAssignment::labels)
      .def_readonly("num_clusters", &ClusterAssignment::num_clusters)
      .def("members", &ClusterAssignment::members);

  py::enum_<LengthMode>(m, "LengthMode")
      .value("inverse_phi", LengthMode::inverse_phi)
      .value("unit", LengthMode::unit);
  py::enum_<FixedStrategy>(m, "FixedStrategy")
      .value("min_weight", FixedStrategy::min_weight)
      .value("max_betweenness", FixedStrategy::max_betweenness);

  m.def(
      "make_relationship_graph",
      [](int n, const std::vector<std::pair<int, int>>& edges,
         const std::vector<double>& phi) {
        RelationshipGraph graph;
        graph.topology.n = n;
        graph.topology.edges = edges;
        if (phi.size() != graph.topology.edges.size()) {
          throw std::invalid_argument("phi must align with the edge list");
        }
        graph.phi = phi;
        return graph;
      },
      py::arg("n"), py::arg("edges"), py::arg("phi"),
      "Assembles a relationship graph from an edge list and weights");
  m.def("edge_betweenness", &edge_betweenness, py::arg("graph"),
        py::arg("mode") = LengthMode::inverse_phi);
  m.def("modularity", &modularity, py::arg("graph"), py::arg("assignment"),
        py::arg("weighted") = true);
  m.def("cluster_fixed", &cluster_fixed, py::arg("graph"), py::arg("target_clusters"),
        py::arg("strategy") = FixedStrategy::min_weight);
  m.def(
      "cluster_adaptive",
      [](const RelationshipGraph& graph, std::uint64_t seed) {
        return cluster_adaptive(graph, seed);
      },
      py::arg("graph"), py::arg("seed") = 0);

  // --- forecasting -----------------------------------------------------------
  py::enum_<Arch>(m, "Arch").value("linear", Arch::linear).value("mlp", Arch::mlp);

  py::class_<WindowSpec>(m, "WindowSpec")
      .def(py::init([](int immediate, int cyclic, int period) {
             return WindowSpec{immediate, cyclic, period};
           }),
           py::arg("immediate") = 6, py::arg("cyclic") = 2, py::arg("period") = 24)
      .def_readwrite("immediate", &WindowSpec::immediate)
      .def_readwrite("cyclic", &WindowSpec::cyclic)
      .def_readwrite("period", &WindowSpec::period)
      .def("input_dim", &WindowSpec::input_dim)
      .def("min_target", &WindowSpec::min_target);

  py::class_<TwinModel>(m, "TwinModel")
      .def_readonly("arch", &TwinModel::arch)
      .def_readonly("hidden", &TwinModel::hidden)
      .def_readonly("input_dim", &TwinModel::input_dim)
      .def_readwrite("params", &TwinModel::params);

  m.def(
      "build_windows",
      [](const std::vector<double>& series, const WindowSpec& spec) {
        const auto data = build_windows(series, spec);
        std::vector<std::pair<std::vector<double>, double>> out;
        out.reserve(data.samples.size());
        for (const auto& sample : data.samples) out.push_back({sample.features, sample.target});
        return out;
      },
      py::arg("series"), py::arg("spec"),
      "Returns (features, target) pairs for every valid window");
  m.def("init_model", &init_model, py::arg("arch"), py::arg("input_dim"), py::arg("seed"),
        py::arg("hidden") = 8);
  m.def("predict", &predict, py::arg("model"), py::arg("features"));
  m.def("quadratic_loss", &quadratic_loss);
  m.def(
      "local_train",
      [](const TwinModel& model, const std::vector<std::pair<std::vector<double>, double>>& data,
         double learning_rate, int batch_size, int epochs, std::uint64_t seed) {
        WindowedDataset dataset;
        dataset.input_dim = model.input_dim;
        for (const auto& [features, target] : data) dataset.samples.push_back({features, target});
        TrainConfig cfg;
        cfg.learning_rate = learning_rate;
        cfg.batch_size = batch_size;
        cfg.epochs = epochs;
        cfg.seed = seed;
        const auto result = local_train(model, dataset, cfg);
        return std::pair{result.model, result.epoch_loss};
      },
      py::arg("model"), py::arg("data"), py::arg("learning_rate") = 0.01,
      py::arg("batch_size") = 64, py::arg("epochs") = 1, py::arg("seed") = 0,
      "Runs mini-batch SGD; returns (model, per-epoch loss)");

  // --- twinning --------------------------------------------------------------
  m.def("fedavg", &fedavg);
  m.def("deviation", &deviation);
  m.def("select_participants", &select_participants, py::arg("bs_ids"), py::arg("fraction"),
        py::arg("round"), py::arg("seed"));

  // --- data ------------------------------------------------------------------
  py::class_<TrafficSeries>(m, "TrafficSeries")
      .def_readonly("bs_id", &TrafficSeries::bs_id)
      .def_readonly("interval_s", &TrafficSeries::interval_s)
      .def_readonly("values", &TrafficSeries::values);

  m.def("load_grid_csv", &load_grid_csv, py::arg("path"), py::arg("value_column") = "internet");
  m.def("generate_synthetic", &generate_synthetic, py::arg("n_bs"), py::arg("length"),
        py::arg("period"), py::arg("noise_std"), py::arg("hetero"), py::arg("seed"));

  // --- metrics ---------------------------------------------------------------
  m.def("mse", &mse);
  m.def("mae", &mae);
  m.def("nrmse", &nrmse);

  // --- experiments -----------------------------------------------------------
  m.def(
      "run_vtwin",
      [](const std::map<std::string, std::string>& overrides) {
        return report_to_dict(run_vtwin_experiment(config_from_dict(overrides)).report);
      },
      py::arg("config") = std::map<std::string, std::string>{},
      "Vertical twinning on the historical split; returns the report dict");
  m.def(
      "run_baseline",
      [](const std::map<std::string, std::string>& overrides) {
        const auto outcome = run_baseline_experiment(config_from_dict(overrides));
        py::dict d;
        d["v"] = report_to_dict(outcome.v_report);
        d["h"] = report_to_dict(outcome.h_report);
        return d;
      },
      py::arg("config") = std::map<std::string, std::string>{},
      "Single-level synchronous baseline; returns {v, h} report dicts");
  m.def(
      "run_e2e",
      [](const std::map<std::string, std::string>& overrides) {
        const auto outcome = run_e2e_experiment(config_from_dict(overrides));
        py::dict vh;
        vh["v"] = report_to_dict(outcome.vh_v);
        vh["h"] = report_to_dict(outcome.vh_h);
        py::dict baseline;
        baseline["v"] = report_to_dict(outcome.baseline_v);
        baseline["h"] = report_to_dict(outcome.baseline_h);
        py::dict d;
        d["vh"] = vh;
        d["baseline"] = baseline;
        d["h_message_reduction"] = outcome.h_message_reduction;
        return d;
      },
      py::arg("config") = std::map<std::string, std::string>{},
      "Full pipeline and baseline side by side; returns the combined dict");
  m.def(
      "run_cluster",
      [](const std::map<std::string, std::string>& overrides) {
        const auto outcome = run_cluster_experiment(config_from_dict(overrides));
        py::dict d;
        d["labels"] = outcome.assignment.labels;
        d["num_clusters"] = outcome.assignment.num_clusters;
        d["modularity"] = outcome.modularity_q;
        return d;
      },
      py::arg("config") = std::map<std::string, std::string>{},
      "Segmentation only; returns labels, cluster count and modularity");

  m.attr("__version__") = "1.0.0";
}
