#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "vhtwin/errors.hpp"
#include "vhtwin/experiment.hpp"

using namespace vhtwin;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.n_bs = 10;
  config.degree = 4;
  config.length = 260;
  config.cluster_count = 3;
  config.v_epochs = 6;
  config.h_epochs = 8;
  config.seed = 5;
  return config;
}

}  // namespace

TEST_CASE("twin files round-trip and reject malformed input") {
  const auto model = init_model(Arch::mlp, 5, 77, 8);
  const auto path = (std::filesystem::temp_directory_path() / "vhtwin_twin_test.txt").string();
  save_twin(path, model);
  const auto loaded = load_twin(path);
  CHECK(loaded.arch == model.arch);
  CHECK(loaded.hidden == model.hidden);
  CHECK(loaded.input_dim == model.input_dim);
  CHECK(loaded.params == model.params);  // full-precision text survives exactly

  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("vhtwin-twin 1\narch linear\nhidden 0\ninput_dim 2\nparams 5\n1\n2\n3\n4\n5\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_twin(path), DataError);  // 5 params but linear dim 2 needs 3
  CHECK_THROWS_AS(load_twin("/nonexistent/twin.txt"), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("prepare_data lays out historical, stream and hold-out regions") {
  const auto config = tiny_config();
  const auto prepared = prepare_data(config);
  REQUIRE(prepared.data.series.size() == 10);
  CHECK(prepared.data.topology.n == 10);
  for (std::size_t b = 0; b < prepared.data.series.size(); ++b) {
    const int total = static_cast<int>(prepared.data.series[b].size());
    CHECK(total == 260);
    CHECK(prepared.data.historical_len[b] == 208);  // floor(0.8 * 260)
    CHECK(prepared.data.stream_end[b] == 260 - 10);  // eval tail: floor(0.2 * 52)
    for (int t = 0; t < prepared.data.historical_len[b]; ++t) {
      CHECK(prepared.data.series[b][static_cast<std::size_t>(t)] >= 0.0);
      CHECK(prepared.data.series[b][static_cast<std::size_t>(t)] <= 1.0);
    }
  }
}

TEST_CASE("vertical experiment on noiseless traffic reaches low hold-out error") {
  auto config = tiny_config();
  config.noise_std = 0.0;
  config.hetero = 0.3;
  config.length = 600;
  config.v_epochs = 60;
  const auto outcome = run_vtwin_experiment(config);
  CHECK(outcome.report.mse < 1e-2);
  CHECK(outcome.report.initial_mapping_s.has_value());
  CHECK(!outcome.report.update_rounds.has_value());
  CHECK(outcome.report.num_clusters == 3);
}

TEST_CASE("horizontal experiment rejects a twin with the wrong dimension") {
  const auto config = tiny_config();
  GlobalTwin start;
  start.model = init_model(Arch::linear, 3, 1);  // window wants 8 inputs
  CHECK_THROWS_AS(run_htwin_experiment(config, start), ConfigError);
}

TEST_CASE("e2e experiment reports a horizontal message reduction") {
  const auto outcome = run_e2e_experiment(tiny_config());
  CHECK(outcome.vh_h.update_rounds.has_value());
  CHECK(outcome.baseline_h.update_rounds.has_value());
  CHECK(*outcome.vh_h.update_rounds < *outcome.baseline_h.update_rounds);
  CHECK(outcome.h_message_reduction > 0.0);
  CHECK(outcome.h_message_reduction <= 1.0);
  CHECK(outcome.vh_v.phase == "vtwin");
  CHECK(outcome.baseline_h.phase == "baseline_h");
}

TEST_CASE("thread cap changes nothing but wall clock") {
  const auto config = tiny_config();

  const char* saved = std::getenv("VHTWIN_THREADS");
  setenv("VHTWIN_THREADS", "0", 1);
  const auto serial = run_e2e_experiment(config);
  setenv("VHTWIN_THREADS", "4", 1);
  const auto threaded = run_e2e_experiment(config);
  if (saved != nullptr) {
    setenv("VHTWIN_THREADS", saved, 1);
  } else {
    unsetenv("VHTWIN_THREADS");
  }

  CHECK(serial.vh_h.mse == threaded.vh_h.mse);
  CHECK(serial.vh_h.mae == threaded.vh_h.mae);
  CHECK(serial.baseline_h.mse == threaded.baseline_h.mse);
  CHECK(serial.vh_h.update_rounds == threaded.vh_h.update_rounds);
  CHECK(serial.vh_h.global_updates == threaded.vh_h.global_updates);
}

TEST_CASE("the mlp twin runs through the full pipeline") {
  auto config = tiny_config();
  config.arch = "mlp";
  config.hidden = 4;
  config.v_epochs = 4;
  const auto outcome = run_e2e_experiment(config);
  CHECK(std::isfinite(outcome.vh_h.mse));
  CHECK(std::isfinite(outcome.baseline_h.mse));
  CHECK(outcome.vh_v.mse >= 0.0);

  const auto again = run_e2e_experiment(config);
  CHECK(outcome.vh_h.mse == again.vh_h.mse);
}

TEST_CASE("cluster experiment matches the configured count and reports modularity") {
  const auto outcome = run_cluster_experiment(tiny_config());
  CHECK(outcome.assignment.num_clusters == 3);
  CHECK(outcome.assignment.labels.size() == 10);
  CHECK(outcome.modularity_q >= -0.5);
  CHECK(outcome.modularity_q <= 1.0);

  auto adaptive = tiny_config();
  adaptive.cluster_mode = "adaptive";
  const auto free_count = run_cluster_experiment(adaptive);
  CHECK(free_count.assignment.num_clusters >= 1);
}
