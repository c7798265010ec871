#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "vhtwin/dcs.hpp"
#include "vhtwin/forecast.hpp"
#include "vhtwin/topology.hpp"

namespace vhtwin {

/// The global twin. The version counter moves exactly when the parameters
/// change.
struct GlobalTwin {
  TwinModel model;
  std::int64_t version = 0;

  /// Adopts the candidate parameters; returns whether they differed.
  bool adopt(const TwinModel& candidate) {
    if (candidate.params == model.params && candidate.same_shape(model)) return false;
    model = candidate;
    ++version;
    return true;
  }
};

/// A cluster twin and its membership.
struct ClusterTwin {
  int cluster_id = 0;
  TwinModel model;
  std::vector<int> member_ids;
};

/// Message and update accounting across a run. Counters only move forward.
struct CommLedger {
  std::int64_t uploads = 0;
  std::int64_t broadcasts = 0;
  std::int64_t global_updates = 0;
  double wall_clock_s = 0.0;

  std::int64_t messages() const { return uploads + broadcasts; }
};

/// One synchronous aggregation round in the trace.
struct RoundRecord {
  int round = 0;
  int participants = 0;
  int active_clusters = 0;
  double mean_train_loss = 0.0;
};

/// Outcome of one asynchronous cluster contribution.
struct UpdateEvent {
  std::int64_t tick = 0;
  int cluster_id = 0;
  double epsilon = 0.0;
  bool triggered = false;
  bool params_changed = false;
  int num_clusters = 0;   // C at the time of the step (drives broadcast count)
  int participants = 0;   // stations trained for this contribution
  std::int64_t version_after = 0;
};

/// Time-stamped record of a twinning run, consumed by the report emitter.
struct TwinningTrace {
  std::vector<RoundRecord> rounds;
  std::vector<UpdateEvent> events;
  CommLedger ledger;
  int num_clusters = 0;
  double wall_clock_s = 0.0;
};

enum class HUpdateMode { average, incremental };

/// Dimension-wise unweighted mean of parameter vectors. All models must share
/// one shape.
TwinModel fedavg(const std::vector<TwinModel>& models);

/// Mean over parameter dimensions of squared differences.
double deviation(const TwinModel& cluster, const TwinModel& global);

/// ceil(fraction * |bs_ids|) ids drawn without replacement, deterministic in
/// (seed, round).
std::vector<int> select_participants(const std::vector<int>& bs_ids, double fraction,
                                     int round, std::uint64_t seed);

struct VRoundResult {
  std::vector<TwinModel> cluster_models;  // by cluster id
  TwinModel global;
};

/// One synchronous hierarchical aggregation: cluster means, then the mean of
/// cluster means. Ledger: M+C uploads and C+M broadcasts (the fresh global is
/// returned to clusters and stations). A cluster without any model errors
/// unless skip_empty is set (participation filtering may empty one mid-run).
VRoundResult v_round(const std::map<int, TwinModel>& local_models,
                     const ClusterAssignment& clusters, CommLedger& ledger,
                     bool skip_empty = false);

/// One threshold-gated asynchronous step. Computes epsilon against the current
/// global; strictly above psi the global adopts either the mean of the latest
/// known cluster models (average mode) or the incremental blend
/// global + eta * (cluster - global). Ledger: one upload always; a trigger adds
/// one global update and C broadcasts. Below or at psi the global is returned
/// bit-identical.
UpdateEvent h_step(const ClusterTwin& cluster, GlobalTwin& global,
                   const std::vector<TwinModel>& all_cluster_models, double psi,
                   HUpdateMode mode, double eta, CommLedger& ledger);

/// Orchestration knobs shared by the runners. Defaults follow the reference
/// protocol: lr 0.01, batch 64, 100 V rounds with re-clustering every 10, 20 H
/// training epochs with re-clustering every 5.
struct RunConfig {
  WindowSpec window;
  Arch arch = Arch::linear;
  int hidden = 8;
  double learning_rate = 0.01;
  int batch_size = 64;

  int v_epochs = 100;
  int v_dcs_period = 10;

  int h_epochs = 20;
  int h_dcs_period = 5;
  int h_local_epochs = 1;
  int h_batch_threshold = 16;
  int h_period_min = 4;
  int h_period_max = 8;
  int h_offset_max = 4;
  double psi = 0.01;
  HUpdateMode h_update_mode = HUpdateMode::average;
  double eta = 0.0;  // incremental step size; 0 selects 1/C

  double participation = 1.0;
  AttributeWeights weights;
  DcsOptions dcs_options;
  std::uint64_t seed = 0;
};

/// Prepared per-station data for the runners. Series are normalized and laid
/// out as historical prefix + stream suffix; targets at stream_end and beyond
/// are held out for evaluation.
struct BsData {
  std::vector<BaseStation> stations;
  NetworkGraph topology;
  std::vector<std::vector<double>> series;  // indexed by station id
  std::vector<int> historical_len;
  std::vector<int> stream_end;
};

struct VTwinResult {
  GlobalTwin global;
  TwinningTrace trace;
  ClusterAssignment clusters;
  std::vector<TwinModel> locals;  // final per-station models
};

/// Synchronous V-twinning over the historical split: per round, broadcast,
/// one local epoch on every participant, hierarchical aggregation; the
/// segmentation is refreshed every v_dcs_period rounds. Wall clock is the
/// initial mapping time.
VTwinResult run_v_twinning(const BsData& data, const RunConfig& config);

struct HTwinResult {
  GlobalTwin global;
  TwinningTrace trace;
  ClusterAssignment clusters;
};

/// Asynchronous H-twinning over the stream split: a discrete-event loop in
/// which each cluster fires on its own seeded schedule once enough samples
/// are buffered, trains its members, aggregates, and runs the psi gate
/// against the global. Events at equal ticks process in cluster-id order.
HTwinResult run_h_twinning(const BsData& data, const ClusterAssignment& initial_clusters,
                           const GlobalTwin& initial_global, const RunConfig& config);

struct BaselineResult {
  GlobalTwin v_global;
  TwinningTrace v_trace;
  GlobalTwin h_global;
  TwinningTrace h_trace;
};

/// Single-level baseline: classical synchronous FedAvg across all stations,
/// no clustering, synchronous updating in both phases.
BaselineResult run_single_level(const BsData& data, const RunConfig& config);

}  // namespace vhtwin
