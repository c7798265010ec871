#include "vhtwin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace vhtwin {

namespace {

void check_pair(const std::vector<double>& pred, const std::vector<double>& truth,
                const char* op) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument(std::string(op) + ": length mismatch");
  }
  if (pred.empty()) throw std::invalid_argument(std::string(op) + ": empty vectors");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += std::abs(pred[i] - truth[i]);
  }
  return sum / static_cast<double>(pred.size());
}

double nrmse(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, "nrmse");
  const double err = mse(pred, truth);
  const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
  const double range = *hi - *lo;
  if (range <= 0.0) {
    if (err == 0.0) return 0.0;
    throw std::invalid_argument("nrmse: constant truth with nonzero error");
  }
  return std::sqrt(err) / range;
}

EvalReport build_report(const std::string& phase, const TwinningTrace& trace,
                        const std::vector<double>& predictions,
                        const std::vector<double>& truth,
                        const std::map<std::string, std::string>& config_echo,
                        std::uint64_t seed) {
  EvalReport report;
  report.phase = phase;
  report.mse = mse(predictions, truth);
  report.mae = mae(predictions, truth);
  report.nrmse = nrmse(predictions, truth);
  report.uploads = trace.ledger.uploads;
  report.broadcasts = trace.ledger.broadcasts;
  report.global_updates = trace.ledger.global_updates;
  report.num_clusters = trace.num_clusters;
  report.seed = seed;
  report.config_echo = config_echo;

  // Tables report mapping time for the vertical phase and update rounds for
  // the horizontal phase; the other cell stays N/A. Synchronous phases are the
  // ones with round records.
  const bool horizontal = trace.rounds.empty();
  if (horizontal) {
    report.update_rounds = trace.ledger.messages();
  } else {
    report.initial_mapping_s = trace.wall_clock_s;
  }
  return report;
}

std::string emit_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["phase"] = report.phase;
    j["seed"] = report.seed;
    j["num_clusters"] = report.num_clusters;
    j["mse"] = report.mse;
    j["mae"] = report.mae;
    j["nrmse"] = report.nrmse;
    if (report.initial_mapping_s.has_value()) j["initial_mapping_s"] = *report.initial_mapping_s;
    if (report.update_rounds.has_value()) j["update_rounds"] = *report.update_rounds;
    j["uploads"] = report.uploads;
    j["broadcasts"] = report.broadcasts;
    j["global_updates"] = report.global_updates;
    nlohmann::ordered_json echo;
    for (const auto& [key, value] : report.config_echo) echo[key] = value;
    j["config"] = std::move(echo);
    return j.dump(2) + "\n";
  }

  // Plot-ready CSV; only mapping time and update rounds get the /10,000
  // normalization in the value_norm column.
  std::string out = "phase,metric,value,value_norm\n";
  auto row = [&out, &report](const std::string& metric, double value, bool norm_by_1e4) {
    out += report.phase + "," + metric + "," + format_double(value) + "," +
           format_double(norm_by_1e4 ? value / 10000.0 : value) + "\n";
  };
  row("mse", report.mse, false);
  row("mae", report.mae, false);
  row("nrmse", report.nrmse, false);
  if (report.initial_mapping_s.has_value()) row("mapping_time", *report.initial_mapping_s, true);
  if (report.update_rounds.has_value()) {
    row("update_rounds", static_cast<double>(*report.update_rounds), true);
  }
  row("uploads", static_cast<double>(report.uploads), false);
  row("broadcasts", static_cast<double>(report.broadcasts), false);
  row("global_updates", static_cast<double>(report.global_updates), false);
  return out;
}

EvalReport parse_report_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EvalReport report;
  report.phase = j.at("phase").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.num_clusters = j.at("num_clusters").get<int>();
  report.mse = j.at("mse").get<double>();
  report.mae = j.at("mae").get<double>();
  report.nrmse = j.at("nrmse").get<double>();
  if (j.contains("initial_mapping_s")) {
    report.initial_mapping_s = j.at("initial_mapping_s").get<double>();
  }
  if (j.contains("update_rounds")) {
    report.update_rounds = j.at("update_rounds").get<std::int64_t>();
  }
  report.uploads = j.at("uploads").get<std::int64_t>();
  report.broadcasts = j.at("broadcasts").get<std::int64_t>();
  report.global_updates = j.at("global_updates").get<std::int64_t>();
  for (const auto& [key, value] : j.at("config").items()) {
    report.config_echo.emplace(key, value.get<std::string>());
  }
  return report;
}

}  // namespace vhtwin
