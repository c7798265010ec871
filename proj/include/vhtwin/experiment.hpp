#pragma once

#include <string>
#include <vector>

#include "vhtwin/config.hpp"
#include "vhtwin/dataio.hpp"
#include "vhtwin/metrics.hpp"
#include "vhtwin/twinning.hpp"

namespace vhtwin {

/// Config-resolved inputs ready for the twinning runners: roster, topology and
/// per-station normalized series with historical/stream/eval boundaries. The
/// normalization parameters are fitted on the historical split only.
struct PreparedData {
  BsData data;
  std::vector<NormParams> norm;
};

PreparedData prepare_data(const ExperimentConfig& config);

/// Pooled one-step-ahead evaluation of a model over every station's held-out
/// tail, in normalized units.
struct Evaluation {
  std::vector<double> predictions;
  std::vector<double> truth;
};

Evaluation evaluate_on_holdout(const BsData& data, const WindowSpec& window,
                               const TwinModel& model);

struct PhaseOutcome {
  EvalReport report;
  GlobalTwin global;
  ClusterAssignment clusters;
  TwinningTrace trace;
};

PhaseOutcome run_vtwin_experiment(const ExperimentConfig& config);
PhaseOutcome run_htwin_experiment(const ExperimentConfig& config, const GlobalTwin& start);

struct BaselineOutcome {
  EvalReport v_report;
  EvalReport h_report;
  GlobalTwin v_global;
  GlobalTwin h_global;
};

BaselineOutcome run_baseline_experiment(const ExperimentConfig& config);

/// Side-by-side run of the clustered pipeline and the single-level baseline on
/// identical data and seeds, plus the relative horizontal message reduction.
struct E2eOutcome {
  EvalReport vh_v;
  EvalReport vh_h;
  EvalReport baseline_v;
  EvalReport baseline_h;
  double h_message_reduction = 0.0;  // 1 - vh / baseline
};

E2eOutcome run_e2e_experiment(const ExperimentConfig& config);

/// Clustering outcome for the `cluster` subcommand: the assignment plus the
/// weighted modularity of the final partition.
struct ClusterOutcome {
  ClusterAssignment assignment;
  double modularity_q = 0.0;
};

ClusterOutcome run_cluster_experiment(const ExperimentConfig& config);

/// Twin persistence: line-oriented text, header with arch/dims, one parameter
/// per line at full precision.
void save_twin(const std::string& path, const TwinModel& model);
TwinModel load_twin(const std::string& path);

}  // namespace vhtwin
