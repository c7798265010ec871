#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

namespace vhtwin {

/// Sliding-window layout: `immediate` consecutive lags plus `cyclic` lags at
/// multiples of `period`. Input dimension is immediate + cyclic.
struct WindowSpec {
  int immediate = 6;  // a
  int cyclic = 2;     // b
  int period = 24;    // rho, intervals per cycle

  int input_dim() const { return immediate + cyclic; }
  /// Smallest valid target index: every lag must exist.
  int min_target() const { return std::max(immediate, period * cyclic); }
};

struct Sample {
  std::vector<double> features;
  double target = 0.0;
};

struct WindowedDataset {
  std::vector<Sample> samples;
  int input_dim = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

enum class Arch { linear, mlp };

/// Flat-parameter regression twin. Linear: [w (D), bias]. Mlp: [W1 (H x D,
/// row-major), b1 (H), w2 (H), b2], tanh hidden layer.
struct TwinModel {
  Arch arch = Arch::linear;
  int hidden = 0;  // mlp only
  int input_dim = 0;
  std::vector<double> params;

  static int param_count(Arch arch, int input_dim, int hidden);
  bool same_shape(const TwinModel& other) const {
    return arch == other.arch && hidden == other.hidden && input_dim == other.input_dim &&
           params.size() == other.params.size();
  }
};

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 64;
  int epochs = 1;
  std::uint64_t seed = 0;
};

/// One sample per target index l in [max(a, rho*b), L): features are the
/// immediate lags newest-first then the cyclic lags, target is series[l].
/// Samples whose lag set or target touches a gap marker (NaN) are skipped.
WindowedDataset build_windows(const std::vector<double>& series, const WindowSpec& spec);

/// Same layout, targets restricted to [target_begin, target_end); lags may
/// reach earlier indices.
WindowedDataset build_windows_range(const std::vector<double>& series, const WindowSpec& spec,
                                    int target_begin, int target_end);

/// Single sample at one target index; empty when the index is out of range or
/// the lag set crosses a gap.
std::optional<Sample> window_at(const std::vector<double>& series, const WindowSpec& spec,
                                int target);

/// Weights uniform in [-0.1, 0.1], biases zero; deterministic per seed.
TwinModel init_model(Arch arch, int input_dim, std::uint64_t seed, int hidden = 8);

double predict(const TwinModel& model, const std::vector<double>& features);

inline double quadratic_loss(double prediction, double target) {
  const double d = prediction - target;
  return d * d;
}

/// Gradient of the mean quadratic loss over the batch w.r.t. params (closed
/// form for linear, backprop for mlp).
std::vector<double> loss_gradient(const TwinModel& model, const std::vector<Sample>& batch);

/// Mean quadratic loss of the model over a dataset.
double dataset_loss(const TwinModel& model, const WindowedDataset& data);

struct TrainResult {
  TwinModel model;
  std::vector<double> epoch_loss;  // full-dataset loss after each epoch
};

/// Mini-batch SGD with a seeded shuffle per epoch; the last partial batch is
/// kept. The input model is not mutated. Throws DivergenceError when a
/// non-finite loss appears.
TrainResult local_train(const TwinModel& model, const WindowedDataset& data,
                        const TrainConfig& cfg);

}  // namespace vhtwin
