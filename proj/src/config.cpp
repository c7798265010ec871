#include "vhtwin/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "vhtwin/errors.hpp"

namespace vhtwin {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

}  // namespace

void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "data.source") {
    if (value != "synthetic" && value != "csv") {
      throw ConfigError("data.source: must be synthetic or csv");
    }
    c.data_source = value;
  } else if (key == "data.csv_path") {
    c.csv_path = value;
  } else if (key == "data.roster_path") {
    c.roster_path = value;
  } else if (key == "data.value_column") {
    c.value_column = value;
  } else if (key == "data.n_bs") {
    c.n_bs = parse_int(key, value);
  } else if (key == "data.length") {
    c.length = parse_int(key, value);
  } else if (key == "data.period") {
    c.period = parse_int(key, value);
  } else if (key == "data.noise_std") {
    c.noise_std = parse_double(key, value);
  } else if (key == "data.hetero") {
    c.hetero = parse_double(key, value);
  } else if (key == "data.split_fraction") {
    c.split_fraction = parse_double(key, value);
  } else if (key == "data.eval_fraction") {
    c.eval_fraction = parse_double(key, value);
  } else if (key == "topology.degree") {
    c.degree = parse_int(key, value);
  } else if (key == "topology.g_floor_m") {
    c.g_floor_m = parse_double(key, value);
  } else if (key == "topology.normalize_terms") {
    c.normalize_terms = parse_bool(key, value);
  } else if (key == "weights.g") {
    c.weights.g = parse_double(key, value);
  } else if (key == "weights.k") {
    c.weights.k = parse_double(key, value);
  } else if (key == "weights.beta") {
    c.weights.beta = parse_double(key, value);
  } else if (key == "weights.tau") {
    c.weights.tau = parse_double(key, value);
  } else if (key == "cluster.mode") {
    if (value != "fixed" && value != "adaptive") {
      throw ConfigError("cluster.mode: must be fixed or adaptive");
    }
    c.cluster_mode = value;
  } else if (key == "cluster.count") {
    c.cluster_count = parse_int(key, value);
  } else if (key == "cluster.strategy") {
    if (value != "min_weight" && value != "max_betweenness") {
      throw ConfigError("cluster.strategy: must be min_weight or max_betweenness");
    }
    c.strategy = value;
  } else if (key == "cluster.bins") {
    c.bins = parse_int(key, value);
  } else if (key == "window.immediate") {
    c.window.immediate = parse_int(key, value);
  } else if (key == "window.cyclic") {
    c.window.cyclic = parse_int(key, value);
  } else if (key == "window.period") {
    c.window.period = parse_int(key, value);
  } else if (key == "model.arch") {
    if (value != "linear" && value != "mlp") throw ConfigError("model.arch: must be linear or mlp");
    c.arch = value;
  } else if (key == "model.hidden") {
    c.hidden = parse_int(key, value);
  } else if (key == "train.lr") {
    c.learning_rate = parse_double(key, value);
  } else if (key == "train.batch") {
    c.batch_size = parse_int(key, value);
  } else if (key == "vtwin.epochs") {
    c.v_epochs = parse_int(key, value);
  } else if (key == "vtwin.dcs_period") {
    c.v_dcs_period = parse_int(key, value);
  } else if (key == "htwin.epochs") {
    c.h_epochs = parse_int(key, value);
  } else if (key == "htwin.dcs_period") {
    c.h_dcs_period = parse_int(key, value);
  } else if (key == "htwin.local_epochs") {
    c.h_local_epochs = parse_int(key, value);
  } else if (key == "htwin.batch_threshold") {
    c.h_batch_threshold = parse_int(key, value);
  } else if (key == "htwin.period_min") {
    c.h_period_min = parse_int(key, value);
  } else if (key == "htwin.period_max") {
    c.h_period_max = parse_int(key, value);
  } else if (key == "htwin.offset_max") {
    c.h_offset_max = parse_int(key, value);
  } else if (key == "htwin.psi") {
    c.psi = parse_double(key, value);
  } else if (key == "htwin.update_mode") {
    if (value != "average" && value != "incremental") {
      throw ConfigError("htwin.update_mode: must be average or incremental");
    }
    c.h_update_mode = value;
  } else if (key == "htwin.eta") {
    c.eta = parse_double(key, value);
  } else if (key == "participation.fraction") {
    c.participation = parse_double(key, value);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    apply_override(config, key, value);
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& message) { throw ConfigError(message); };

  if (data_source != "synthetic" && data_source != "csv") fail("data.source: invalid value");
  if (data_source == "csv" && csv_path.empty()) fail("data.csv_path: required for csv source");
  if (value_column.empty()) fail("data.value_column: must not be empty");
  if (n_bs < 1) fail("data.n_bs: must be >= 1");
  if (data_source == "synthetic") {
    if (period < 1) fail("data.period: must be >= 1");
    if (length <= period) fail("data.length: must exceed data.period");
    if (noise_std < 0.0) fail("data.noise_std: must be >= 0");
    if (hetero < 0.0 || hetero > 1.0) fail("data.hetero: must lie in [0,1]");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    fail("data.split_fraction: must lie in (0,1)");
  }
  if (eval_fraction < 0.0 || eval_fraction > 0.9) fail("data.eval_fraction: must lie in [0,0.9]");

  if (degree < 1) fail("topology.degree: must be >= 1");
  if (n_bs <= degree) fail("topology.degree: must be below data.n_bs");
  if ((static_cast<long long>(n_bs) * degree) % 2 != 0) {
    fail("topology.degree: n_bs * degree must be even");
  }
  if (g_floor_m <= 0.0) fail("topology.g_floor_m: must be > 0");
  if (weights.g < 0 || weights.k < 0 || weights.beta < 0 || weights.tau < 0) {
    fail("weights: must be nonnegative");
  }
  if (weights.g + weights.k + weights.beta + weights.tau <= 0.0) {
    fail("weights: at least one must be positive");
  }

  if (cluster_mode != "fixed" && cluster_mode != "adaptive") fail("cluster.mode: invalid value");
  if (cluster_mode == "fixed" && (cluster_count < 1 || cluster_count > n_bs)) {
    fail("cluster.count: must lie in [1, n_bs]");
  }
  if (strategy != "min_weight" && strategy != "max_betweenness") {
    fail("cluster.strategy: invalid value");
  }
  if (bins < 2) fail("cluster.bins: must be >= 2");

  if (window.immediate < 0 || window.cyclic < 0 || window.immediate + window.cyclic < 1) {
    fail("window: requires immediate >= 0, cyclic >= 0 and immediate + cyclic >= 1");
  }
  if (window.period < 1) fail("window.period: must be >= 1");

  if (arch != "linear" && arch != "mlp") fail("model.arch: invalid value");
  if (arch == "mlp" && hidden < 1) fail("model.hidden: must be >= 1 for mlp");

  if (learning_rate <= 0.0) fail("train.lr: must be > 0");
  if (batch_size < 1) fail("train.batch: must be >= 1");

  if (v_epochs < 1) fail("vtwin.epochs: must be >= 1");
  if (v_dcs_period < 1) fail("vtwin.dcs_period: must be >= 1");
  if (h_epochs < 1) fail("htwin.epochs: must be >= 1");
  if (h_dcs_period < 1) fail("htwin.dcs_period: must be >= 1");
  if (h_local_epochs < 1) fail("htwin.local_epochs: must be >= 1");
  if (h_batch_threshold < 1) fail("htwin.batch_threshold: must be >= 1");
  if (h_period_min < 1) fail("htwin.period_min: must be >= 1");
  if (h_period_max < h_period_min) fail("htwin.period_max: must be >= htwin.period_min");
  if (h_offset_max < 0) fail("htwin.offset_max: must be >= 0");
  if (psi < 0.0) fail("htwin.psi: must be >= 0");
  if (h_update_mode != "average" && h_update_mode != "incremental") {
    fail("htwin.update_mode: invalid value");
  }
  if (eta < 0.0 || eta > 1.0) fail("htwin.eta: must lie in [0,1]");
  if (!(participation > 0.0 && participation <= 1.0)) {
    fail("participation.fraction: must lie in (0,1]");
  }
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::map<std::string, std::string> out;
  out["data.source"] = data_source;
  out["data.csv_path"] = csv_path;
  out["data.roster_path"] = roster_path;
  out["data.value_column"] = value_column;
  out["data.n_bs"] = std::to_string(n_bs);
  out["data.length"] = std::to_string(length);
  out["data.period"] = std::to_string(period);
  out["data.noise_std"] = format_double(noise_std);
  out["data.hetero"] = format_double(hetero);
  out["data.split_fraction"] = format_double(split_fraction);
  out["data.eval_fraction"] = format_double(eval_fraction);
  out["topology.degree"] = std::to_string(degree);
  out["topology.g_floor_m"] = format_double(g_floor_m);
  out["topology.normalize_terms"] = normalize_terms ? "true" : "false";
  out["weights.g"] = format_double(weights.g);
  out["weights.k"] = format_double(weights.k);
  out["weights.beta"] = format_double(weights.beta);
  out["weights.tau"] = format_double(weights.tau);
  out["cluster.mode"] = cluster_mode;
  out["cluster.count"] = std::to_string(cluster_count);
  out["cluster.strategy"] = strategy;
  out["cluster.bins"] = std::to_string(bins);
  out["window.immediate"] = std::to_string(window.immediate);
  out["window.cyclic"] = std::to_string(window.cyclic);
  out["window.period"] = std::to_string(window.period);
  out["model.arch"] = arch;
  out["model.hidden"] = std::to_string(hidden);
  out["train.lr"] = format_double(learning_rate);
  out["train.batch"] = std::to_string(batch_size);
  out["vtwin.epochs"] = std::to_string(v_epochs);
  out["vtwin.dcs_period"] = std::to_string(v_dcs_period);
  out["htwin.epochs"] = std::to_string(h_epochs);
  out["htwin.dcs_period"] = std::to_string(h_dcs_period);
  out["htwin.local_epochs"] = std::to_string(h_local_epochs);
  out["htwin.batch_threshold"] = std::to_string(h_batch_threshold);
  out["htwin.period_min"] = std::to_string(h_period_min);
  out["htwin.period_max"] = std::to_string(h_period_max);
  out["htwin.offset_max"] = std::to_string(h_offset_max);
  out["htwin.psi"] = format_double(psi);
  out["htwin.update_mode"] = h_update_mode;
  out["htwin.eta"] = format_double(eta);
  out["participation.fraction"] = format_double(participation);
  out["seed"] = std::to_string(seed);
  return out;
}

ExperimentConfig config_from_echo(const std::map<std::string, std::string>& echo) {
  ExperimentConfig config;
  for (const auto& [key, value] : echo) {
    if (value.empty() && (key == "data.csv_path" || key == "data.roster_path")) continue;
    apply_override(config, key, value);
  }
  return config;
}

RunConfig ExperimentConfig::run_config() const {
  RunConfig rc;
  rc.window = window;
  rc.arch = arch == "mlp" ? Arch::mlp : Arch::linear;
  rc.hidden = hidden;
  rc.learning_rate = learning_rate;
  rc.batch_size = batch_size;
  rc.v_epochs = v_epochs;
  rc.v_dcs_period = v_dcs_period;
  rc.h_epochs = h_epochs;
  rc.h_dcs_period = h_dcs_period;
  rc.h_local_epochs = h_local_epochs;
  rc.h_batch_threshold = h_batch_threshold;
  rc.h_period_min = h_period_min;
  rc.h_period_max = h_period_max;
  rc.h_offset_max = h_offset_max;
  rc.psi = psi;
  rc.h_update_mode = h_update_mode == "incremental" ? HUpdateMode::incremental
                                                    : HUpdateMode::average;
  rc.eta = eta;
  rc.participation = participation;
  rc.weights = weights;
  rc.dcs_options.adaptive = cluster_mode == "adaptive";
  rc.dcs_options.fixed_count = cluster_count;
  rc.dcs_options.strategy = strategy == "max_betweenness" ? FixedStrategy::max_betweenness
                                                          : FixedStrategy::min_weight;
  rc.dcs_options.histogram_bins = bins;
  rc.dcs_options.g_floor_m = g_floor_m;
  rc.dcs_options.normalize_g_term = normalize_terms;
  rc.seed = seed;
  return rc;
}

}  // namespace vhtwin
