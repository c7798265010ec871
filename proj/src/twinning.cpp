#include "vhtwin/twinning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "vhtwin/errors.hpp"
#include "vhtwin/parallel.hpp"
#include "vhtwin/rng.hpp"

namespace vhtwin {

namespace {

// Seed salts keep the independent random streams decorrelated.
constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
constexpr std::uint64_t kTrainSalt = 0x7674726eULL;
constexpr std::uint64_t kHTrainSalt = 0x6874726eULL;
constexpr std::uint64_t kDcsSalt = 0x646373ULL;
constexpr std::uint64_t kSchedSalt = 0x73636864ULL;
constexpr std::uint64_t kPartSalt = 0x70617274ULL;

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TwinModel fedavg(const std::vector<TwinModel>& models) {
  if (models.empty()) throw std::invalid_argument("fedavg: empty model list");
  const TwinModel& first = models.front();
  for (const TwinModel& m : models) {
    if (!m.same_shape(first)) throw std::invalid_argument("fedavg: mixed model shapes");
  }

  TwinModel mean = first;
  for (std::size_t i = 1; i < models.size(); ++i) {
    for (std::size_t p = 0; p < mean.params.size(); ++p) {
      mean.params[p] += models[i].params[p];
    }
  }
  const double inv = 1.0 / static_cast<double>(models.size());
  for (double& p : mean.params) p *= inv;
  return mean;
}

double deviation(const TwinModel& cluster, const TwinModel& global) {
  if (!cluster.same_shape(global)) throw std::invalid_argument("deviation: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < cluster.params.size(); ++i) {
    const double d = cluster.params[i] - global.params[i];
    sum += d * d;
  }
  return sum / static_cast<double>(cluster.params.size());
}

std::vector<int> select_participants(const std::vector<int>& bs_ids, double fraction,
                                     int round, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("select_participants: fraction must lie in (0,1]");
  }
  if (bs_ids.empty()) return {};
  const auto m = static_cast<double>(bs_ids.size());
  // Nudge below the product before ceil so 0.4 * 50 stays exactly 20.
  auto count = static_cast<std::size_t>(std::ceil(fraction * m - 1e-9));
  count = std::clamp<std::size_t>(count, 1, bs_ids.size());
  if (count == bs_ids.size()) return bs_ids;

  std::vector<int> pool = bs_ids;
  Rng rng(mix_seed(seed, kPartSalt, static_cast<std::uint64_t>(round)));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.bounded(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

VRoundResult v_round(const std::map<int, TwinModel>& local_models,
                     const ClusterAssignment& clusters, CommLedger& ledger, bool skip_empty) {
  if (local_models.empty()) throw std::invalid_argument("v_round: no local models");

  std::vector<std::vector<const TwinModel*>> by_cluster(
      static_cast<std::size_t>(clusters.num_clusters));
  for (const auto& [bs_id, model] : local_models) {
    if (bs_id < 0 || bs_id >= static_cast<int>(clusters.labels.size())) {
      throw std::invalid_argument("v_round: model for unassigned station " +
                                  std::to_string(bs_id));
    }
    by_cluster[static_cast<std::size_t>(clusters.labels[static_cast<std::size_t>(bs_id)])]
        .push_back(&model);
  }

  VRoundResult result;
  for (int c = 0; c < clusters.num_clusters; ++c) {
    const auto& bucket = by_cluster[static_cast<std::size_t>(c)];
    if (bucket.empty()) {
      if (skip_empty) continue;
      throw std::invalid_argument("v_round: cluster " + std::to_string(c) +
                                  " has no participating models");
    }
    std::vector<TwinModel> members;
    members.reserve(bucket.size());
    for (const TwinModel* m : bucket) members.push_back(*m);
    result.cluster_models.push_back(fedavg(members));
  }

  result.global = fedavg(result.cluster_models);
  const auto n_locals = static_cast<std::int64_t>(local_models.size());
  const auto n_clusters = static_cast<std::int64_t>(result.cluster_models.size());
  ledger.uploads += n_locals + n_clusters;
  ledger.broadcasts += n_clusters + n_locals;
  return result;
}

UpdateEvent h_step(const ClusterTwin& cluster, GlobalTwin& global,
                   const std::vector<TwinModel>& all_cluster_models, double psi,
                   HUpdateMode mode, double eta, CommLedger& ledger) {
  if (!cluster.model.same_shape(global.model)) {
    throw std::invalid_argument("h_step: cluster/global dimension mismatch");
  }
  if (psi < 0.0) throw std::invalid_argument("h_step: psi must be >= 0");

  UpdateEvent event;
  event.cluster_id = cluster.cluster_id;
  event.num_clusters = static_cast<int>(all_cluster_models.size());
  event.epsilon = deviation(cluster.model, global.model);
  ledger.uploads += 1;

  if (event.epsilon > psi) {
    event.triggered = true;
    TwinModel candidate;
    if (mode == HUpdateMode::average) {
      candidate = fedavg(all_cluster_models);
    } else {
      candidate = global.model;
      for (std::size_t i = 0; i < candidate.params.size(); ++i) {
        candidate.params[i] += eta * (cluster.model.params[i] - candidate.params[i]);
      }
    }
    event.params_changed = global.adopt(candidate);
    ledger.global_updates += 1;
    ledger.broadcasts += event.num_clusters;
  }
  event.version_after = global.version;
  return event;
}

namespace {

// Historical slice per station, used for training windows and segmentation.
std::vector<std::vector<double>> historical_prefixes(const BsData& data) {
  std::vector<std::vector<double>> out(data.series.size());
  for (std::size_t b = 0; b < data.series.size(); ++b) {
    out[b].assign(data.series[b].begin(),
                  data.series[b].begin() + data.historical_len[b]);
  }
  return out;
}

void validate_bs_data(const BsData& data) {
  const auto n = data.stations.size();
  if (n == 0) throw std::invalid_argument("twinning: no stations");
  if (data.series.size() != n || data.historical_len.size() != n ||
      data.stream_end.size() != n) {
    throw std::invalid_argument("twinning: per-station arrays must align with the roster");
  }
  if (data.topology.n != static_cast<int>(n)) {
    throw std::invalid_argument("twinning: topology size mismatch");
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (data.historical_len[b] < 1 || data.historical_len[b] > static_cast<int>(data.series[b].size()) ||
        data.stream_end[b] < data.historical_len[b] ||
        data.stream_end[b] > static_cast<int>(data.series[b].size())) {
      throw std::invalid_argument("twinning: invalid historical/stream boundaries");
    }
  }
}

struct TrainJob {
  int bs_id = 0;
  const TwinModel* start = nullptr;
  const WindowedDataset* dataset = nullptr;
};

// Trains all jobs (possibly in parallel) and merges results in job order.
std::vector<TrainResult> train_all(const std::vector<TrainJob>& jobs, double learning_rate,
                                   int batch_size, int epochs, std::uint64_t seed) {
  std::vector<TrainResult> results(jobs.size());
  std::vector<int> failed_epoch(jobs.size(), -1);
  parallel_for(static_cast<int>(jobs.size()), [&](int i) {
    const TrainJob& job = jobs[static_cast<std::size_t>(i)];
    TrainConfig cfg;
    cfg.learning_rate = learning_rate;
    cfg.batch_size = batch_size;
    cfg.epochs = epochs;
    cfg.seed = seed;
    try {
      results[static_cast<std::size_t>(i)] = local_train(*job.start, *job.dataset, cfg);
    } catch (const DivergenceError& e) {
      failed_epoch[static_cast<std::size_t>(i)] = e.epoch;
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (failed_epoch[i] >= 0) {
      throw DivergenceError("station " + std::to_string(jobs[i].bs_id) +
                                " diverged at epoch " + std::to_string(failed_epoch[i]),
                            failed_epoch[i]);
    }
  }
  return results;
}

}  // namespace

VTwinResult run_v_twinning(const BsData& data, const RunConfig& config) {
  validate_bs_data(data);
  const auto start_time = std::chrono::steady_clock::now();
  const int n = static_cast<int>(data.stations.size());

  std::vector<WindowedDataset> historical(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    historical[static_cast<std::size_t>(b)] = build_windows_range(
        data.series[static_cast<std::size_t>(b)], config.window, 0,
        data.historical_len[static_cast<std::size_t>(b)]);
  }
  const auto hist_series = historical_prefixes(data);

  DcsOptions dcs_opts = config.dcs_options;
  dcs_opts.seed = mix_seed(config.seed, kDcsSalt, 0);
  ClusterAssignment clusters =
      dcs(data.stations, hist_series, data.topology, config.weights, dcs_opts);

  GlobalTwin global;
  global.model = init_model(config.arch, config.window.input_dim(),
                            mix_seed(config.seed, kInitSalt), config.hidden);

  std::vector<int> all_ids(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) all_ids[static_cast<std::size_t>(b)] = b;
  std::vector<TwinModel> locals(static_cast<std::size_t>(n), global.model);

  TwinningTrace trace;
  for (int round = 0; round < config.v_epochs; ++round) {
    if (round > 0 && config.v_dcs_period > 0 && round % config.v_dcs_period == 0) {
      dcs_opts.seed = mix_seed(config.seed, kDcsSalt, static_cast<std::uint64_t>(round));
      clusters = dcs(data.stations, hist_series, data.topology, config.weights, dcs_opts);
    }

    const auto participants =
        select_participants(all_ids, config.participation, round, config.seed);

    // Broadcast: every participant restarts from the current global, then runs
    // one local epoch. The round seed is shared across stations so identical
    // data yields identical locals.
    std::vector<TrainJob> jobs;
    jobs.reserve(participants.size());
    for (const int b : participants) {
      jobs.push_back({b, &global.model, &historical[static_cast<std::size_t>(b)]});
    }
    const auto results = train_all(jobs, config.learning_rate, config.batch_size, 1,
                                   mix_seed(config.seed, kTrainSalt,
                                            static_cast<std::uint64_t>(round)));

    std::map<int, TwinModel> trained;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      trained.emplace(jobs[i].bs_id, results[i].model);
      locals[static_cast<std::size_t>(jobs[i].bs_id)] = results[i].model;
      loss_sum += results[i].epoch_loss.back();
    }

    const auto agg = v_round(trained, clusters, trace.ledger, /*skip_empty=*/true);
    global.adopt(agg.global);

    RoundRecord record;
    record.round = round;
    record.participants = static_cast<int>(participants.size());
    record.active_clusters = static_cast<int>(agg.cluster_models.size());
    record.mean_train_loss = loss_sum / static_cast<double>(participants.size());
    trace.rounds.push_back(record);
  }

  trace.num_clusters = clusters.num_clusters;
  trace.wall_clock_s = elapsed_s(start_time);
  trace.ledger.wall_clock_s = trace.wall_clock_s;

  VTwinResult result;
  result.global = std::move(global);
  result.trace = std::move(trace);
  result.clusters = std::move(clusters);
  result.locals = std::move(locals);
  return result;
}

HTwinResult run_h_twinning(const BsData& data, const ClusterAssignment& initial_clusters,
                           const GlobalTwin& initial_global, const RunConfig& config) {
  validate_bs_data(data);
  if (static_cast<int>(initial_clusters.labels.size()) != static_cast<int>(data.stations.size())) {
    throw std::invalid_argument("run_h_twinning: cluster assignment size mismatch");
  }
  if (config.h_period_min < 1 || config.h_period_max < config.h_period_min ||
      config.h_offset_max < 0 || config.h_batch_threshold < 1) {
    throw std::invalid_argument("run_h_twinning: invalid schedule parameters");
  }
  const auto start_time = std::chrono::steady_clock::now();
  const int n = static_cast<int>(data.stations.size());

  GlobalTwin global = initial_global;
  ClusterAssignment clusters = initial_clusters;

  // At handover every tier is synchronized to the global twin: stations and
  // clusters that have not fired yet contribute exactly this model.
  std::vector<TwinModel> locals(static_cast<std::size_t>(n), global.model);
  std::vector<TwinModel> cluster_models(static_cast<std::size_t>(clusters.num_clusters),
                                        global.model);

  // Per-cluster firing schedule, fixed by (seed, cluster id).
  auto schedule_of = [&config](int cluster_id) {
    Rng rng(mix_seed(config.seed, kSchedSalt, static_cast<std::uint64_t>(cluster_id)));
    const auto offset = static_cast<std::int64_t>(
        rng.bounded(static_cast<std::uint64_t>(config.h_offset_max) + 1));
    const auto period = static_cast<std::int64_t>(
        config.h_period_min +
        static_cast<int>(rng.bounded(
            static_cast<std::uint64_t>(config.h_period_max - config.h_period_min) + 1)));
    return std::pair<std::int64_t, std::int64_t>{offset, period};
  };

  std::vector<std::vector<Sample>> buffer(static_cast<std::size_t>(n));
  std::int64_t max_ticks = 0;
  for (int b = 0; b < n; ++b) {
    max_ticks = std::max<std::int64_t>(
        max_ticks, data.stream_end[static_cast<std::size_t>(b)] -
                       data.historical_len[static_cast<std::size_t>(b)]);
  }

  TwinningTrace trace;
  DcsOptions dcs_opts = config.dcs_options;
  int budget_used = 0;
  int refresh_mark = 0;

  for (std::int64_t tick = 0; tick < max_ticks && budget_used < config.h_epochs; ++tick) {
    // Stream arrivals: one interval per station per tick.
    for (int b = 0; b < n; ++b) {
      const int target = data.historical_len[static_cast<std::size_t>(b)] +
                         static_cast<int>(tick);
      if (target >= data.stream_end[static_cast<std::size_t>(b)]) continue;
      if (auto sample = window_at(data.series[static_cast<std::size_t>(b)], config.window,
                                  target)) {
        buffer[static_cast<std::size_t>(b)].push_back(std::move(*sample));
      }
    }

    // Phase one: every due cluster with full buffers trains its members and
    // refreshes its cluster model; all of this happens before any gate runs so
    // same-tick contributions see each other's latest models.
    const auto members = clusters.members();
    std::vector<int> fired;
    std::vector<std::vector<int>> fired_members;
    for (int c = 0; c < clusters.num_clusters && budget_used < config.h_epochs; ++c) {
      const auto [offset, period] = schedule_of(c);
      if (tick < offset || (tick - offset) % period != 0) continue;

      std::vector<int> part = members[static_cast<std::size_t>(c)];
      if (config.participation < 1.0) {
        part = select_participants(part, config.participation, static_cast<int>(tick),
                                   config.seed);
      }
      if (part.empty()) continue;
      bool ready = true;
      for (const int b : part) {
        if (static_cast<int>(buffer[static_cast<std::size_t>(b)].size()) <
            config.h_batch_threshold) {
          ready = false;
          break;
        }
      }
      if (!ready) continue;

      fired.push_back(c);
      fired_members.push_back(std::move(part));
      budget_used += config.h_local_epochs;
    }

    if (!fired.empty()) {
      std::vector<TrainJob> jobs;
      std::vector<WindowedDataset> datasets;
      // Reserve so dataset pointers stay stable while jobs accumulate.
      std::size_t total_jobs = 0;
      for (const auto& part : fired_members) total_jobs += part.size();
      jobs.reserve(total_jobs);
      datasets.reserve(total_jobs);

      for (std::size_t f = 0; f < fired.size(); ++f) {
        for (const int b : fired_members[f]) {
          WindowedDataset ds;
          ds.input_dim = config.window.input_dim();
          ds.samples = buffer[static_cast<std::size_t>(b)];
          datasets.push_back(std::move(ds));
          jobs.push_back({b, &cluster_models[static_cast<std::size_t>(fired[f])],
                          &datasets.back()});
        }
      }

      const auto results = train_all(jobs, config.learning_rate, config.batch_size,
                                     config.h_local_epochs,
                                     mix_seed(config.seed, kHTrainSalt,
                                              static_cast<std::uint64_t>(tick)));
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        locals[static_cast<std::size_t>(jobs[i].bs_id)] = results[i].model;
        buffer[static_cast<std::size_t>(jobs[i].bs_id)].clear();
      }
      for (std::size_t f = 0; f < fired.size(); ++f) {
        std::vector<TwinModel> trained;
        trained.reserve(fired_members[f].size());
        for (const int b : fired_members[f]) {
          trained.push_back(locals[static_cast<std::size_t>(b)]);
        }
        cluster_models[static_cast<std::size_t>(fired[f])] = fedavg(trained);
      }

      // Phase two: threshold gate, cluster-id order.
      for (std::size_t f = 0; f < fired.size(); ++f) {
        const int c = fired[f];
        ClusterTwin twin;
        twin.cluster_id = c;
        twin.model = cluster_models[static_cast<std::size_t>(c)];
        twin.member_ids = members[static_cast<std::size_t>(c)];
        const double eta =
            config.eta > 0.0 ? config.eta : 1.0 / static_cast<double>(clusters.num_clusters);
        UpdateEvent event = h_step(twin, global, cluster_models, config.psi,
                                   config.h_update_mode, eta, trace.ledger);
        event.tick = tick;
        event.participants = static_cast<int>(fired_members[f].size());
        trace.events.push_back(event);
      }
    }

    // Segmentation refresh every h_dcs_period consumed training epochs, fed
    // with the latest observed traffic.
    if (config.h_dcs_period > 0 && budget_used / config.h_dcs_period > refresh_mark &&
        budget_used < config.h_epochs && tick + 1 < max_ticks) {
      refresh_mark = budget_used / config.h_dcs_period;

      std::vector<std::vector<double>> recent(static_cast<std::size_t>(n));
      const int window_len = std::max(64, 4 * config.window.period);
      for (int b = 0; b < n; ++b) {
        const int arrived =
            std::min(data.stream_end[static_cast<std::size_t>(b)],
                     data.historical_len[static_cast<std::size_t>(b)] +
                         static_cast<int>(tick) + 1);
        const int from = std::max(0, arrived - window_len);
        recent[static_cast<std::size_t>(b)].assign(
            data.series[static_cast<std::size_t>(b)].begin() + from,
            data.series[static_cast<std::size_t>(b)].begin() + arrived);
      }
      dcs_opts.seed = mix_seed(config.seed, kDcsSalt, static_cast<std::uint64_t>(tick) + 1);
      clusters = dcs(data.stations, recent, data.topology, config.weights, dcs_opts);

      // Re-formed cluster twins average their members' latest local models;
      // nothing resets to random.
      cluster_models.assign(static_cast<std::size_t>(clusters.num_clusters), global.model);
      const auto new_members = clusters.members();
      for (int c = 0; c < clusters.num_clusters; ++c) {
        std::vector<TwinModel> group;
        group.reserve(new_members[static_cast<std::size_t>(c)].size());
        for (const int b : new_members[static_cast<std::size_t>(c)]) {
          group.push_back(locals[static_cast<std::size_t>(b)]);
        }
        cluster_models[static_cast<std::size_t>(c)] = fedavg(group);
      }
    }
  }

  trace.num_clusters = clusters.num_clusters;
  trace.wall_clock_s = elapsed_s(start_time);
  trace.ledger.wall_clock_s = trace.wall_clock_s;

  HTwinResult result;
  result.global = std::move(global);
  result.trace = std::move(trace);
  result.clusters = std::move(clusters);
  return result;
}

BaselineResult run_single_level(const BsData& data, const RunConfig& config) {
  validate_bs_data(data);
  const int n = static_cast<int>(data.stations.size());

  std::vector<WindowedDataset> historical(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    historical[static_cast<std::size_t>(b)] = build_windows_range(
        data.series[static_cast<std::size_t>(b)], config.window, 0,
        data.historical_len[static_cast<std::size_t>(b)]);
  }

  std::vector<int> all_ids(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) all_ids[static_cast<std::size_t>(b)] = b;

  BaselineResult result;

  // Vertical phase: classical synchronous FedAvg, no clustering.
  const auto v_start = std::chrono::steady_clock::now();
  GlobalTwin global;
  global.model = init_model(config.arch, config.window.input_dim(),
                            mix_seed(config.seed, kInitSalt), config.hidden);

  for (int round = 0; round < config.v_epochs; ++round) {
    const auto participants =
        select_participants(all_ids, config.participation, round, config.seed);
    std::vector<TrainJob> jobs;
    jobs.reserve(participants.size());
    for (const int b : participants) {
      jobs.push_back({b, &global.model, &historical[static_cast<std::size_t>(b)]});
    }
    const auto trained = train_all(jobs, config.learning_rate, config.batch_size, 1,
                                   mix_seed(config.seed, kTrainSalt,
                                            static_cast<std::uint64_t>(round)));

    std::vector<TwinModel> models;
    models.reserve(trained.size());
    double loss_sum = 0.0;
    for (const auto& r : trained) {
      models.push_back(r.model);
      loss_sum += r.epoch_loss.back();
    }
    global.adopt(fedavg(models));
    result.v_trace.ledger.uploads += static_cast<std::int64_t>(participants.size());
    result.v_trace.ledger.broadcasts += static_cast<std::int64_t>(participants.size());

    RoundRecord record;
    record.round = round;
    record.participants = static_cast<int>(participants.size());
    record.active_clusters = 0;
    record.mean_train_loss = loss_sum / static_cast<double>(participants.size());
    result.v_trace.rounds.push_back(record);
  }
  result.v_trace.num_clusters = 0;
  result.v_trace.wall_clock_s = elapsed_s(v_start);
  result.v_trace.ledger.wall_clock_s = result.v_trace.wall_clock_s;
  result.v_global = global;

  // Horizontal phase: same stream, lockstep rounds, no gate - every firing is
  // a full upload/broadcast exchange and a global update.
  const auto h_start = std::chrono::steady_clock::now();
  std::vector<std::vector<Sample>> buffer(static_cast<std::size_t>(n));
  std::int64_t max_ticks = 0;
  for (int b = 0; b < n; ++b) {
    max_ticks = std::max<std::int64_t>(
        max_ticks, data.stream_end[static_cast<std::size_t>(b)] -
                       data.historical_len[static_cast<std::size_t>(b)]);
  }

  int budget_used = 0;
  for (std::int64_t tick = 0; tick < max_ticks && budget_used < config.h_epochs; ++tick) {
    for (int b = 0; b < n; ++b) {
      const int target = data.historical_len[static_cast<std::size_t>(b)] +
                         static_cast<int>(tick);
      if (target >= data.stream_end[static_cast<std::size_t>(b)]) continue;
      if (auto sample = window_at(data.series[static_cast<std::size_t>(b)], config.window,
                                  target)) {
        buffer[static_cast<std::size_t>(b)].push_back(std::move(*sample));
      }
    }

    std::vector<int> part = all_ids;
    if (config.participation < 1.0) {
      part = select_participants(all_ids, config.participation, static_cast<int>(tick),
                                 config.seed);
    }
    bool ready = !part.empty();
    for (const int b : part) {
      if (static_cast<int>(buffer[static_cast<std::size_t>(b)].size()) <
          config.h_batch_threshold) {
        ready = false;
        break;
      }
    }
    if (!ready) continue;

    std::vector<TrainJob> jobs;
    std::vector<WindowedDataset> datasets;
    jobs.reserve(part.size());
    datasets.reserve(part.size());
    for (const int b : part) {
      WindowedDataset ds;
      ds.input_dim = config.window.input_dim();
      ds.samples = buffer[static_cast<std::size_t>(b)];
      datasets.push_back(std::move(ds));
      jobs.push_back({b, &global.model, &datasets.back()});
    }
    const auto trained = train_all(jobs, config.learning_rate, config.batch_size,
                                   config.h_local_epochs,
                                   mix_seed(config.seed, kHTrainSalt,
                                            static_cast<std::uint64_t>(tick)));
    budget_used += config.h_local_epochs;

    std::vector<TwinModel> models;
    models.reserve(trained.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      models.push_back(trained[i].model);
      buffer[static_cast<std::size_t>(jobs[i].bs_id)].clear();
    }
    const TwinModel candidate = fedavg(models);

    UpdateEvent event;
    event.tick = tick;
    event.cluster_id = 0;
    event.epsilon = deviation(candidate, global.model);
    event.triggered = true;
    event.params_changed = global.adopt(candidate);
    event.num_clusters = 0;
    event.participants = static_cast<int>(part.size());
    event.version_after = global.version;
    result.h_trace.events.push_back(event);

    result.h_trace.ledger.uploads += static_cast<std::int64_t>(part.size());
    result.h_trace.ledger.broadcasts += static_cast<std::int64_t>(part.size());
    result.h_trace.ledger.global_updates += 1;
  }

  result.h_trace.num_clusters = 0;
  result.h_trace.wall_clock_s = elapsed_s(h_start);
  result.h_trace.ledger.wall_clock_s = result.h_trace.wall_clock_s;
  result.h_global = global;
  return result;
}

}  // namespace vhtwin
