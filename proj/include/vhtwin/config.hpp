#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vhtwin/dcs.hpp"
#include "vhtwin/twinning.hpp"

namespace vhtwin {

/// Fully resolved experiment configuration. Defaults follow the reference
/// protocol: 50 stations on a 20-regular topology, lr 0.01, batch 64, 100
/// vertical rounds with re-clustering every 10, 20 horizontal training epochs
/// with re-clustering every 5, equal attribute weights.
struct ExperimentConfig {
  // data
  std::string data_source = "synthetic";  // synthetic | csv
  std::string csv_path;
  std::string roster_path;  // optional; synthetic roster when empty
  std::string value_column = "internet";
  int n_bs = 50;
  int length = 600;
  int period = 24;
  double noise_std = 0.05;
  double hetero = 0.5;
  double split_fraction = 0.8;
  double eval_fraction = 0.2;

  // topology
  int degree = 20;
  double g_floor_m = 1.0;
  bool normalize_terms = true;

  AttributeWeights weights;

  // clustering
  std::string cluster_mode = "fixed";  // fixed | adaptive
  int cluster_count = 5;
  std::string strategy = "min_weight";  // min_weight | max_betweenness
  int bins = 16;

  // window and model
  WindowSpec window{6, 2, 24};
  std::string arch = "linear";  // linear | mlp
  int hidden = 8;

  // training
  double learning_rate = 0.01;
  int batch_size = 64;

  // vertical phase
  int v_epochs = 100;
  int v_dcs_period = 10;

  // horizontal phase
  int h_epochs = 20;
  int h_dcs_period = 5;
  int h_local_epochs = 1;
  int h_batch_threshold = 16;
  int h_period_min = 4;
  int h_period_max = 8;
  int h_offset_max = 4;
  double psi = 0.01;
  std::string h_update_mode = "average";  // average | incremental
  double eta = 0.0;                       // 0 selects 1/C

  double participation = 1.0;
  std::uint64_t seed = 42;

  /// Throws ConfigError with a field path when any value is out of contract.
  void validate() const;

  /// Flat key=value view of every resolved field, in key order.
  std::map<std::string, std::string> echo() const;

  /// Translation to the twinning runner knobs.
  RunConfig run_config() const;
};

/// Parses `section.key = value` lines; '#' starts a comment. Unknown keys are
/// rejected. Later assignments override earlier ones.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Applies one `section.key=value` override in place.
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Rebuilds a config from an echo map (report round-trips).
ExperimentConfig config_from_echo(const std::map<std::string, std::string>& echo);

}  // namespace vhtwin
