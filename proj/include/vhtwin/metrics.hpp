#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vhtwin/twinning.hpp"

namespace vhtwin {

double mse(const std::vector<double>& pred, const std::vector<double>& truth);
double mae(const std::vector<double>& pred, const std::vector<double>& truth);

/// sqrt(mse) normalized by the truth range. A zero truth range yields 0 for a
/// perfect prediction and errors otherwise.
double nrmse(const std::vector<double>& pred, const std::vector<double>& truth);

/// Machine-readable outcome of one twinning phase. Mapping time is present for
/// vertical phases only and update rounds for horizontal phases only.
struct EvalReport {
  std::string phase;
  double mse = 0.0;
  double mae = 0.0;
  double nrmse = 0.0;
  std::optional<double> initial_mapping_s;
  std::optional<std::int64_t> update_rounds;
  std::int64_t uploads = 0;
  std::int64_t broadcasts = 0;
  std::int64_t global_updates = 0;
  int num_clusters = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config_echo;

  bool operator==(const EvalReport&) const = default;
};

enum class ReportFormat { json, csv };

/// Assembles the phase report from a trace and pooled predictions. Vertical
/// phases carry the mapping time; horizontal phases carry the update-round
/// count (uploads plus broadcasts at the global tier).
EvalReport build_report(const std::string& phase, const TwinningTrace& trace,
                        const std::vector<double>& predictions,
                        const std::vector<double>& truth,
                        const std::map<std::string, std::string>& config_echo,
                        std::uint64_t seed);

/// Serializes a report. JSON keeps full precision and a stable key order; the
/// CSV variant is plot-ready (`phase,metric,value,value_norm`) with mapping
/// time and update rounds additionally divided by 10,000 in the norm column.
std::string emit_report(const EvalReport& report, ReportFormat format);

EvalReport parse_report_json(const std::string& text);

}  // namespace vhtwin
