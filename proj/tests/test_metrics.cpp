#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "vhtwin/metrics.hpp"
#include "vhtwin/rng.hpp"

using namespace vhtwin;

namespace {

// Straight-from-definition oracles, one pass each.
double mse_oracle(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return s / static_cast<double>(p.size());
}

double mae_oracle(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - t[i]);
  return s / static_cast<double>(p.size());
}

double nrmse_oracle(const std::vector<double>& p, const std::vector<double>& t) {
  const double range = *std::max_element(t.begin(), t.end()) -
                       *std::min_element(t.begin(), t.end());
  return std::sqrt(mse_oracle(p, t)) / range;
}

EvalReport sample_report() {
  EvalReport r;
  r.phase = "htwin";
  r.mse = 0.125;
  r.mae = 0.25;
  r.nrmse = 0.09;
  r.update_rounds = 21690;
  r.uploads = 40;
  r.broadcasts = 21650;
  r.global_updates = 17;
  r.num_clusters = 5;
  r.seed = 42;
  r.config_echo = {{"seed", "42"}, {"train.lr", "0.01"}};
  return r;
}

}  // namespace

TEST_CASE("error metric basics") {
  CHECK(mse({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(mse({0, 0}, {1, 3}) == doctest::Approx(5.0));
  CHECK(mae({1, 2}, {1, 2}) == 0.0);
  CHECK(mae({0, 0}, {1, 3}) == doctest::Approx(2.0));
  CHECK(nrmse({0, 10}, {0, 10}) == 0.0);
  CHECK(nrmse({1, 9}, {0, 10}) == doctest::Approx(0.1));
  CHECK_THROWS_AS(mse({1}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(mae({}, {}), std::invalid_argument);
}

TEST_CASE("nrmse degenerate truth") {
  CHECK(nrmse({3, 3}, {3, 3}) == 0.0);  // zero range, zero error
  CHECK_THROWS_AS(nrmse({3, 4}, {3, 3}), std::invalid_argument);
}

TEST_CASE("metrics match definition oracles on random draws") {
  Rng rng(6021);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.bounded(40));
    std::vector<double> pred, truth;
    for (int i = 0; i < n; ++i) {
      pred.push_back(rng.uniform(-5, 5));
      truth.push_back(rng.uniform(-5, 5));
    }
    CHECK(mse(pred, truth) == doctest::Approx(mse_oracle(pred, truth)).epsilon(1e-12));
    CHECK(mae(pred, truth) == doctest::Approx(mae_oracle(pred, truth)).epsilon(1e-12));
    CHECK(nrmse(pred, truth) == doctest::Approx(nrmse_oracle(pred, truth)).epsilon(1e-12));
    CHECK(mae(pred, truth) <= std::sqrt(mse(pred, truth)) + 1e-12);  // Jensen
  }
}

TEST_CASE("metrics are invariant under joint permutation") {
  Rng rng(11);
  std::vector<double> pred, truth;
  for (int i = 0; i < 25; ++i) {
    pred.push_back(rng.uniform(0, 1));
    truth.push_back(rng.uniform(0, 1));
  }
  std::vector<std::size_t> order(25);
  for (std::size_t i = 0; i < 25; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<double> pred2(25), truth2(25);
  for (std::size_t i = 0; i < 25; ++i) {
    pred2[i] = pred[order[i]];
    truth2[i] = truth[order[i]];
  }
  CHECK(mse(pred, truth) == doctest::Approx(mse(pred2, truth2)).epsilon(1e-15));
  CHECK(mae(pred, truth) == doctest::Approx(mae(pred2, truth2)).epsilon(1e-15));
  CHECK(nrmse(pred, truth) == doctest::Approx(nrmse(pred2, truth2)).epsilon(1e-15));
}

TEST_CASE("mse equals mae squared when all errors share a magnitude") {
  const std::vector<double> truth{1, 2, 3, 4};
  const std::vector<double> pred{1.5, 1.5, 3.5, 3.5};
  CHECK(mse(pred, truth) == doctest::Approx(mae(pred, truth) * mae(pred, truth)));
}

TEST_CASE("json report round-trips to an equal struct") {
  const auto report = sample_report();
  const std::string text = emit_report(report, ReportFormat::json);
  const auto parsed = parse_report_json(text);
  CHECK(parsed == report);
  CHECK(emit_report(parsed, ReportFormat::json) == text);
}

TEST_CASE("json report is deterministic and orders keys stably") {
  const auto a = emit_report(sample_report(), ReportFormat::json);
  const auto b = emit_report(sample_report(), ReportFormat::json);
  CHECK(a == b);
  CHECK(a.find("\"phase\"") < a.find("\"seed\""));
  CHECK(a.find("\"seed\"") < a.find("\"mse\""));
}

TEST_CASE("csv report carries the ten-thousand normalization") {
  const std::string csv = emit_report(sample_report(), ReportFormat::csv);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "phase,metric,value,value_norm");
  bool found_rounds = false;
  bool found_mse = false;
  while (std::getline(lines, line)) {
    if (line.find("update_rounds") != std::string::npos) {
      CHECK(line == "htwin,update_rounds,21690,2.169");
      found_rounds = true;
    }
    if (line.rfind("htwin,mse", 0) == 0) {
      CHECK(line == "htwin,mse,0.125,0.125");  // errors are not normalized
      found_mse = true;
    }
  }
  CHECK(found_rounds);
  CHECK(found_mse);
}

TEST_CASE("phase-appropriate fields: vertical keeps time, horizontal keeps rounds") {
  TwinningTrace v_trace;
  v_trace.rounds.push_back({0, 4, 2, 0.1});
  v_trace.ledger.uploads = 6;
  v_trace.ledger.broadcasts = 6;
  v_trace.wall_clock_s = 1.25;
  v_trace.num_clusters = 2;

  const std::vector<double> pred{0.5, 0.6};
  const std::vector<double> truth{0.4, 0.7};
  const auto v_report = build_report("vtwin", v_trace, pred, truth, {}, 7);
  CHECK(v_report.initial_mapping_s.has_value());
  CHECK(!v_report.update_rounds.has_value());
  CHECK(*v_report.initial_mapping_s == doctest::Approx(1.25));

  TwinningTrace h_trace;
  h_trace.events.push_back({3, 0, 0.01, true, true, 2, 2, 1});
  h_trace.ledger.uploads = 5;
  h_trace.ledger.broadcasts = 4;
  h_trace.num_clusters = 2;
  const auto h_report = build_report("htwin", h_trace, pred, truth, {}, 7);
  CHECK(!h_report.initial_mapping_s.has_value());
  CHECK(h_report.update_rounds.has_value());
  CHECK(*h_report.update_rounds == 9);  // uploads + broadcasts

  const std::string v_json = emit_report(v_report, ReportFormat::json);
  CHECK(v_json.find("update_rounds") == std::string::npos);
  const std::string h_json = emit_report(h_report, ReportFormat::json);
  CHECK(h_json.find("initial_mapping_s") == std::string::npos);
}
