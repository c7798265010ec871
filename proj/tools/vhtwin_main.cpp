#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vhtwin/errors.hpp"
#include "vhtwin/experiment.hpp"
#include "vhtwin/rng.hpp"

namespace {

using vhtwin::ExperimentConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "json";
  std::vector<std::string> overrides;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Config file (key = value lines)");
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--format", args.format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", args.seed, "Seed override");
  cmd->add_option("--set", args.overrides, "Extra config overrides, key=value");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig config;
  if (!args.config_path.empty()) config = vhtwin::parse_config_file(args.config_path);
  for (const std::string& item : args.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw vhtwin::ConfigError("--set expects key=value, got '" + item + "'");
    }
    vhtwin::apply_override(config, item.substr(0, eq), item.substr(eq + 1));
  }
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  config.validate();
  return config;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vhtwin::DataError("cannot write output file: " + path);
  out << content;
}

std::string report_payload(const vhtwin::EvalReport& report, const std::string& format) {
  return vhtwin::emit_report(report, format == "csv" ? vhtwin::ReportFormat::csv
                                                     : vhtwin::ReportFormat::json);
}

void emit(const CommonArgs& args, const std::string& name, const std::string& payload) {
  std::filesystem::create_directories(args.out_dir);
  const std::string ext = args.format == "csv" ? ".csv" : ".json";
  write_file(args.out_dir + "/" + name + ext, payload);
  std::cout << payload;
}

nlohmann::ordered_json report_json(const vhtwin::EvalReport& report) {
  return nlohmann::ordered_json::parse(
      vhtwin::emit_report(report, vhtwin::ReportFormat::json));
}

int cmd_cluster(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto outcome = vhtwin::run_cluster_experiment(config);

  std::filesystem::create_directories(args.out_dir);
  std::string assignment_csv = "bs_id,cluster_id\n";
  for (std::size_t b = 0; b < outcome.assignment.labels.size(); ++b) {
    assignment_csv += std::to_string(b) + "," + std::to_string(outcome.assignment.labels[b]) + "\n";
  }
  write_file(args.out_dir + "/assignment.csv", assignment_csv);

  nlohmann::ordered_json j;
  j["phase"] = "cluster";
  j["seed"] = config.seed;
  j["num_clusters"] = outcome.assignment.num_clusters;
  j["modularity"] = outcome.modularity_q;
  nlohmann::ordered_json echo;
  for (const auto& [key, value] : config.echo()) echo[key] = value;
  j["config"] = std::move(echo);
  const std::string payload = j.dump(2) + "\n";
  write_file(args.out_dir + "/cluster_report.json", payload);
  std::cout << payload;
  return 0;
}

int cmd_vtwin(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto outcome = vhtwin::run_vtwin_experiment(config);
  std::filesystem::create_directories(args.out_dir);
  vhtwin::save_twin(args.out_dir + "/twin.txt", outcome.global.model);
  emit(args, "vtwin_report", report_payload(outcome.report, args.format));
  return 0;
}

int cmd_htwin(const CommonArgs& args, const std::string& twin_path) {
  const auto config = resolve_config(args);
  vhtwin::GlobalTwin start;
  start.model = vhtwin::load_twin(twin_path);
  const auto outcome = vhtwin::run_htwin_experiment(config, start);
  emit(args, "htwin_report", report_payload(outcome.report, args.format));
  return 0;
}

int cmd_baseline(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto outcome = vhtwin::run_baseline_experiment(config);

  if (args.format == "csv") {
    const std::string v_csv = report_payload(outcome.v_report, "csv");
    std::string h_csv = report_payload(outcome.h_report, "csv");
    h_csv.erase(0, h_csv.find('\n') + 1);  // drop the duplicated header
    emit(args, "baseline_report", v_csv + h_csv);
    return 0;
  }
  nlohmann::ordered_json j;
  j["phase"] = "baseline";
  j["v"] = report_json(outcome.v_report);
  j["h"] = report_json(outcome.h_report);
  emit(args, "baseline_report", j.dump(2) + "\n");
  return 0;
}

std::string e2e_csv(const vhtwin::E2eOutcome& outcome) {
  std::string csv;
  for (const auto* report :
       {&outcome.vh_v, &outcome.vh_h, &outcome.baseline_v, &outcome.baseline_h}) {
    std::string rows = vhtwin::emit_report(*report, vhtwin::ReportFormat::csv);
    if (!csv.empty()) rows.erase(0, rows.find('\n') + 1);  // keep one header
    csv += rows;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", outcome.h_message_reduction);
  csv += std::string("e2e,h_message_reduction,") + buf + "," + buf + "\n";
  return csv;
}

int cmd_e2e(const CommonArgs& args, const std::string& sweep) {
  auto run_one = [&args](const ExperimentConfig& config) {
    const auto outcome = vhtwin::run_e2e_experiment(config);
    nlohmann::ordered_json j;
    j["phase"] = "e2e";
    j["vh"] = {{"v", report_json(outcome.vh_v)}, {"h", report_json(outcome.vh_h)}};
    j["baseline"] = {{"v", report_json(outcome.baseline_v)},
                     {"h", report_json(outcome.baseline_h)}};
    j["h_message_reduction"] = outcome.h_message_reduction;
    return j;
  };

  const auto base = resolve_config(args);
  if (sweep.empty()) {
    if (args.format == "csv") {
      emit(args, "e2e_report", e2e_csv(vhtwin::run_e2e_experiment(base)));
    } else {
      emit(args, "e2e_report", run_one(base).dump(2) + "\n");
    }
    return 0;
  }

  // --sweep key=v1,v2,... runs the full comparison once per value.
  const auto eq = sweep.find('=');
  if (eq == std::string::npos) {
    throw vhtwin::ConfigError("--sweep expects key=v1,v2,..., got '" + sweep + "'");
  }
  const std::string key = sweep.substr(0, eq);
  std::vector<std::string> values;
  std::string rest = sweep.substr(eq + 1);
  std::size_t pos = 0;
  while (pos != std::string::npos) {
    const auto comma = rest.find(',', pos);
    values.push_back(rest.substr(pos, comma == std::string::npos ? comma : comma - pos));
    pos = comma == std::string::npos ? comma : comma + 1;
  }

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const std::string& value : values) {
    ExperimentConfig config = base;
    vhtwin::apply_override(config, key, value);
    config.validate();
    nlohmann::ordered_json row = run_one(config);
    row["sweep_key"] = key;
    row["sweep_value"] = value;
    rows.push_back(std::move(row));
  }
  nlohmann::ordered_json j;
  j["phase"] = "e2e_sweep";
  j["runs"] = std::move(rows);
  emit(args, "e2e_report", j.dump(2) + "\n");
  return 0;
}

int cmd_synth(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto series = vhtwin::generate_synthetic(
      config.n_bs, config.length, config.period, config.noise_std, config.hetero,
      vhtwin::mix_seed(config.seed, 0x74726166ULL));
  const auto roster = vhtwin::generate_roster(config.n_bs, vhtwin::mix_seed(config.seed, 0x726f7374ULL));

  std::filesystem::create_directories(args.out_dir);
  vhtwin::save_grid_csv(args.out_dir + "/traffic.csv", series, config.value_column);
  vhtwin::save_roster_csv(args.out_dir + "/stations.csv", roster);

  nlohmann::ordered_json j;
  j["phase"] = "synth";
  j["seed"] = config.seed;
  j["n_bs"] = config.n_bs;
  j["length"] = config.length;
  j["files"] = {"traffic.csv", "stations.csv"};
  const std::string payload = j.dump(2) + "\n";
  write_file(args.out_dir + "/synth_report.json", payload);
  std::cout << payload;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VH-Twin: clustered federated digital-twin simulator for wireless traffic"};
  app.require_subcommand(1);

  CommonArgs cluster_args, vtwin_args, htwin_args, baseline_args, e2e_args, synth_args;
  std::string twin_path;
  std::string sweep;

  auto* cluster = app.add_subcommand("cluster", "Run segmentation, emit bs_id,cluster_id CSV");
  add_common(cluster, cluster_args);
  auto* vtwin = app.add_subcommand("vtwin", "Vertical twinning on the historical split");
  add_common(vtwin, vtwin_args);
  auto* htwin = app.add_subcommand("htwin", "Horizontal twinning from a saved twin");
  add_common(htwin, htwin_args);
  htwin->add_option("--twin", twin_path, "Twin file from vtwin")->required();
  auto* baseline = app.add_subcommand("baseline", "Single-level synchronous baseline");
  add_common(baseline, baseline_args);
  auto* e2e = app.add_subcommand("e2e", "Full pipeline and baseline, side by side");
  add_common(e2e, e2e_args);
  e2e->add_option("--sweep", sweep, "Repeat per value: key=v1,v2,...");
  auto* synth = app.add_subcommand("synth", "Write synthetic traffic + roster CSVs");
  add_common(synth, synth_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cluster->parsed()) return cmd_cluster(cluster_args);
    if (vtwin->parsed()) return cmd_vtwin(vtwin_args);
    if (htwin->parsed()) return cmd_htwin(htwin_args, twin_path);
    if (baseline->parsed()) return cmd_baseline(baseline_args);
    if (e2e->parsed()) return cmd_e2e(e2e_args, sweep);
    if (synth->parsed()) return cmd_synth(synth_args);
  } catch (const vhtwin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const vhtwin::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const vhtwin::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
