#include "vhtwin/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vhtwin/errors.hpp"
#include "vhtwin/rng.hpp"

namespace vhtwin {

namespace {

constexpr std::uint64_t kRosterSalt = 0x726f7374ULL;
constexpr std::uint64_t kTopoSalt = 0x746f706fULL;
constexpr std::uint64_t kTrafficSalt = 0x74726166ULL;

}  // namespace

PreparedData prepare_data(const ExperimentConfig& config) {
  config.validate();

  std::map<int, TrafficSeries> raw;
  std::vector<BaseStation> stations;
  if (config.data_source == "csv") {
    raw = load_grid_csv(config.csv_path, config.value_column);
    if (!config.roster_path.empty()) {
      stations = load_roster_csv(config.roster_path);
    }
  } else {
    raw = generate_synthetic(config.n_bs, config.length, config.period, config.noise_std,
                             config.hetero, mix_seed(config.seed, kTrafficSalt));
    if (!config.roster_path.empty()) stations = load_roster_csv(config.roster_path);
  }

  // CSV cell ids can be arbitrary; stations are indexed by position in the
  // sorted cell order.
  std::vector<const TrafficSeries*> ordered;
  ordered.reserve(raw.size());
  for (const auto& [cell, series] : raw) ordered.push_back(&series);
  const int n = static_cast<int>(ordered.size());

  if (stations.empty()) {
    stations = generate_roster(n, mix_seed(config.seed, kRosterSalt));
  }
  if (static_cast<int>(stations.size()) != n) {
    throw DataError("roster size does not match the number of traffic series");
  }

  PreparedData prepared;
  prepared.data.stations = std::move(stations);
  prepared.data.topology =
      generate_regular_topology(n, config.degree, mix_seed(config.seed, kTopoSalt));
  prepared.data.series.resize(static_cast<std::size_t>(n));
  prepared.data.historical_len.resize(static_cast<std::size_t>(n));
  prepared.data.stream_end.resize(static_cast<std::size_t>(n));
  prepared.norm.resize(static_cast<std::size_t>(n));

  SplitSpec split_spec{config.split_fraction};
  for (int b = 0; b < n; ++b) {
    const TrafficSeries& series = *ordered[static_cast<std::size_t>(b)];
    auto [historical, stream] = split(series, split_spec);

    // Normalization parameters come from the historical split only and are
    // reused verbatim on the stream.
    auto [hist_norm, params] = normalize(historical);
    auto stream_norm = normalize(stream, params).first;

    std::vector<double> full = std::move(hist_norm.values);
    full.insert(full.end(), stream_norm.values.begin(), stream_norm.values.end());

    const int hist_len = historical.length();
    const int total = static_cast<int>(full.size());
    const int eval_len = static_cast<int>(
        std::floor(config.eval_fraction * static_cast<double>(stream.length())));

    prepared.data.series[static_cast<std::size_t>(b)] = std::move(full);
    prepared.data.historical_len[static_cast<std::size_t>(b)] = hist_len;
    prepared.data.stream_end[static_cast<std::size_t>(b)] = total - eval_len;
    prepared.norm[static_cast<std::size_t>(b)] = params;
  }
  return prepared;
}

Evaluation evaluate_on_holdout(const BsData& data, const WindowSpec& window,
                               const TwinModel& model) {
  Evaluation eval;
  for (std::size_t b = 0; b < data.series.size(); ++b) {
    const int begin = data.stream_end[b];
    const int end = static_cast<int>(data.series[b].size());
    for (int target = begin; target < end; ++target) {
      const auto sample = window_at(data.series[b], window, target);
      if (!sample.has_value()) continue;
      eval.predictions.push_back(predict(model, sample->features));
      eval.truth.push_back(sample->target);
    }
  }
  if (eval.predictions.empty()) {
    throw DataError("hold-out evaluation has no valid samples; increase data.eval_fraction");
  }
  return eval;
}

PhaseOutcome run_vtwin_experiment(const ExperimentConfig& config) {
  const PreparedData prepared = prepare_data(config);
  const RunConfig rc = config.run_config();

  VTwinResult run = run_v_twinning(prepared.data, rc);
  const Evaluation eval = evaluate_on_holdout(prepared.data, rc.window, run.global.model);

  PhaseOutcome outcome;
  outcome.report = build_report("vtwin", run.trace, eval.predictions, eval.truth,
                                config.echo(), config.seed);
  outcome.global = std::move(run.global);
  outcome.clusters = std::move(run.clusters);
  outcome.trace = std::move(run.trace);
  return outcome;
}

PhaseOutcome run_htwin_experiment(const ExperimentConfig& config, const GlobalTwin& start) {
  const PreparedData prepared = prepare_data(config);
  const RunConfig rc = config.run_config();
  if (start.model.input_dim != rc.window.input_dim()) {
    throw ConfigError("twin input dimension does not match window spec");
  }

  // Standalone horizontal runs segment on the historical split first, exactly
  // as the vertical phase would have left it.
  std::vector<std::vector<double>> hist(prepared.data.series.size());
  for (std::size_t b = 0; b < prepared.data.series.size(); ++b) {
    hist[b].assign(prepared.data.series[b].begin(),
                   prepared.data.series[b].begin() + prepared.data.historical_len[b]);
  }
  DcsOptions dcs_opts = rc.dcs_options;
  dcs_opts.seed = mix_seed(config.seed, 0x646373ULL, 0);
  const ClusterAssignment clusters =
      dcs(prepared.data.stations, hist, prepared.data.topology, rc.weights, dcs_opts);

  HTwinResult run = run_h_twinning(prepared.data, clusters, start, rc);
  const Evaluation eval = evaluate_on_holdout(prepared.data, rc.window, run.global.model);

  PhaseOutcome outcome;
  outcome.report = build_report("htwin", run.trace, eval.predictions, eval.truth,
                                config.echo(), config.seed);
  outcome.global = std::move(run.global);
  outcome.clusters = std::move(run.clusters);
  outcome.trace = std::move(run.trace);
  return outcome;
}

BaselineOutcome run_baseline_experiment(const ExperimentConfig& config) {
  const PreparedData prepared = prepare_data(config);
  const RunConfig rc = config.run_config();

  BaselineResult run = run_single_level(prepared.data, rc);
  const Evaluation v_eval = evaluate_on_holdout(prepared.data, rc.window, run.v_global.model);
  const Evaluation h_eval = evaluate_on_holdout(prepared.data, rc.window, run.h_global.model);

  BaselineOutcome outcome;
  outcome.v_report = build_report("baseline_v", run.v_trace, v_eval.predictions, v_eval.truth,
                                  config.echo(), config.seed);
  outcome.h_report = build_report("baseline_h", run.h_trace, h_eval.predictions, h_eval.truth,
                                  config.echo(), config.seed);
  outcome.v_global = std::move(run.v_global);
  outcome.h_global = std::move(run.h_global);
  return outcome;
}

E2eOutcome run_e2e_experiment(const ExperimentConfig& config) {
  const PreparedData prepared = prepare_data(config);
  const RunConfig rc = config.run_config();

  VTwinResult v_run = run_v_twinning(prepared.data, rc);
  const Evaluation v_eval = evaluate_on_holdout(prepared.data, rc.window, v_run.global.model);

  HTwinResult h_run = run_h_twinning(prepared.data, v_run.clusters, v_run.global, rc);
  const Evaluation h_eval = evaluate_on_holdout(prepared.data, rc.window, h_run.global.model);

  BaselineResult baseline = run_single_level(prepared.data, rc);
  const Evaluation bv_eval =
      evaluate_on_holdout(prepared.data, rc.window, baseline.v_global.model);
  const Evaluation bh_eval =
      evaluate_on_holdout(prepared.data, rc.window, baseline.h_global.model);

  E2eOutcome outcome;
  const auto echo = config.echo();
  outcome.vh_v = build_report("vtwin", v_run.trace, v_eval.predictions, v_eval.truth, echo,
                              config.seed);
  outcome.vh_h = build_report("htwin", h_run.trace, h_eval.predictions, h_eval.truth, echo,
                              config.seed);
  outcome.baseline_v = build_report("baseline_v", baseline.v_trace, bv_eval.predictions,
                                    bv_eval.truth, echo, config.seed);
  outcome.baseline_h = build_report("baseline_h", baseline.h_trace, bh_eval.predictions,
                                    bh_eval.truth, echo, config.seed);

  const auto vh_messages = static_cast<double>(h_run.trace.ledger.messages());
  const auto baseline_messages = static_cast<double>(baseline.h_trace.ledger.messages());
  outcome.h_message_reduction =
      baseline_messages > 0.0 ? 1.0 - vh_messages / baseline_messages : 0.0;
  return outcome;
}

ClusterOutcome run_cluster_experiment(const ExperimentConfig& config) {
  const PreparedData prepared = prepare_data(config);
  const RunConfig rc = config.run_config();

  std::vector<std::vector<double>> hist(prepared.data.series.size());
  for (std::size_t b = 0; b < prepared.data.series.size(); ++b) {
    hist[b].assign(prepared.data.series[b].begin(),
                   prepared.data.series[b].begin() + prepared.data.historical_len[b]);
  }

  const auto attrs = compute_attributes(prepared.data.stations, hist, rc.dcs_options.histogram_bins);
  const auto graph = build_relationship_graph(prepared.data.topology, attrs, rc.weights,
                                              rc.dcs_options.g_floor_m,
                                              rc.dcs_options.normalize_g_term);

  ClusterOutcome outcome;
  if (rc.dcs_options.adaptive) {
    outcome.assignment = cluster_adaptive(graph, mix_seed(config.seed, 0x646373ULL, 0));
  } else {
    outcome.assignment = cluster_fixed(graph, rc.dcs_options.fixed_count, rc.dcs_options.strategy);
  }
  outcome.modularity_q = modularity(graph, outcome.assignment, /*weighted=*/true);
  return outcome;
}

void save_twin(const std::string& path, const TwinModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write twin file: " + path);
  out << "vhtwin-twin 1\n";
  out << "arch " << (model.arch == Arch::mlp ? "mlp" : "linear") << "\n";
  out << "hidden " << model.hidden << "\n";
  out << "input_dim " << model.input_dim << "\n";
  out << "params " << model.params.size() << "\n";
  char buf[64];
  for (const double p : model.params) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", p);
    out << buf;
  }
}

TwinModel load_twin(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open twin file: " + path);

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "vhtwin-twin" || version != 1) {
    throw DataError("not a twin file: " + path);
  }

  TwinModel model;
  std::string key, arch_name;
  std::size_t count = 0;
  if (!(in >> key >> arch_name) || key != "arch" || (arch_name != "linear" && arch_name != "mlp")) {
    throw DataError("twin file has a bad arch line: " + path);
  }
  model.arch = arch_name == "mlp" ? Arch::mlp : Arch::linear;
  if (!(in >> key >> model.hidden) || key != "hidden") {
    throw DataError("twin file has a bad hidden line: " + path);
  }
  if (!(in >> key >> model.input_dim) || key != "input_dim") {
    throw DataError("twin file has a bad input_dim line: " + path);
  }
  if (!(in >> key >> count) || key != "params") {
    throw DataError("twin file has a bad params line: " + path);
  }
  if (model.input_dim < 1 || (model.arch == Arch::mlp && model.hidden < 1) ||
      (model.arch == Arch::linear && model.hidden != 0)) {
    throw DataError("twin file has inconsistent shape fields: " + path);
  }
  const int expected = TwinModel::param_count(model.arch, model.input_dim, model.hidden);
  if (static_cast<int>(count) != expected) {
    throw DataError("twin file parameter count does not match its shape: " + path);
  }
  model.params.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> model.params[i]) || !std::isfinite(model.params[i])) {
      throw DataError("twin file has a bad parameter at index " + std::to_string(i));
    }
  }
  return model;
}

}  // namespace vhtwin
