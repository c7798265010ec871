#include "vhtwin/forecast.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vhtwin/errors.hpp"
#include "vhtwin/rng.hpp"

namespace vhtwin {

namespace {

void validate_spec(const WindowSpec& spec) {
  if (spec.immediate < 0 || spec.cyclic < 0 || spec.immediate + spec.cyclic < 1 ||
      spec.period < 1) {
    throw std::invalid_argument("window spec requires a >= 0, b >= 0, a+b >= 1, rho >= 1");
  }
}

bool lags_valid(const std::vector<double>& series, const WindowSpec& spec, int target) {
  if (std::isnan(series[static_cast<std::size_t>(target)])) return false;
  for (int i = 1; i <= spec.immediate; ++i) {
    if (std::isnan(series[static_cast<std::size_t>(target - i)])) return false;
  }
  for (int i = 1; i <= spec.cyclic; ++i) {
    if (std::isnan(series[static_cast<std::size_t>(target - spec.period * i)])) return false;
  }
  return true;
}

Sample make_sample(const std::vector<double>& series, const WindowSpec& spec, int target) {
  Sample sample;
  sample.features.reserve(static_cast<std::size_t>(spec.input_dim()));
  for (int i = 1; i <= spec.immediate; ++i) {
    sample.features.push_back(series[static_cast<std::size_t>(target - i)]);
  }
  for (int i = 1; i <= spec.cyclic; ++i) {
    sample.features.push_back(series[static_cast<std::size_t>(target - spec.period * i)]);
  }
  sample.target = series[static_cast<std::size_t>(target)];
  return sample;
}

}  // namespace

WindowedDataset build_windows(const std::vector<double>& series, const WindowSpec& spec) {
  return build_windows_range(series, spec, 0, static_cast<int>(series.size()));
}

std::optional<Sample> window_at(const std::vector<double>& series, const WindowSpec& spec,
                                int target) {
  validate_spec(spec);
  if (target < spec.min_target() || target >= static_cast<int>(series.size())) {
    return std::nullopt;
  }
  if (!lags_valid(series, spec, target)) return std::nullopt;
  return make_sample(series, spec, target);
}

WindowedDataset build_windows_range(const std::vector<double>& series, const WindowSpec& spec,
                                    int target_begin, int target_end) {
  validate_spec(spec);
  const int length = static_cast<int>(series.size());
  target_end = std::min(target_end, length);
  const int first = std::max(spec.min_target(), target_begin);

  WindowedDataset data;
  data.input_dim = spec.input_dim();
  for (int target = first; target < target_end; ++target) {
    if (!lags_valid(series, spec, target)) continue;
    data.samples.push_back(make_sample(series, spec, target));
  }
  if (data.samples.empty()) {
    throw std::invalid_argument("series too short: no valid window target");
  }
  return data;
}

int TwinModel::param_count(Arch arch, int input_dim, int hidden) {
  if (arch == Arch::linear) return input_dim + 1;
  return input_dim * hidden + hidden + hidden + 1;
}

TwinModel init_model(Arch arch, int input_dim, std::uint64_t seed, int hidden) {
  if (input_dim < 1) throw std::invalid_argument("init_model: input_dim must be >= 1");
  if (arch == Arch::mlp && hidden < 1) {
    throw std::invalid_argument("init_model: mlp needs hidden >= 1");
  }

  TwinModel model;
  model.arch = arch;
  model.hidden = arch == Arch::mlp ? hidden : 0;
  model.input_dim = input_dim;
  model.params.assign(static_cast<std::size_t>(TwinModel::param_count(arch, input_dim, hidden)),
                      0.0);

  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  if (arch == Arch::linear) {
    for (int i = 0; i < input_dim; ++i) {
      model.params[static_cast<std::size_t>(i)] = rng.uniform(-0.1, 0.1);
    }
    // bias stays zero
  } else {
    for (int i = 0; i < input_dim * hidden; ++i) {
      model.params[static_cast<std::size_t>(i)] = rng.uniform(-0.1, 0.1);
    }
    // b1 zero
    const int w2_offset = input_dim * hidden + hidden;
    for (int i = 0; i < hidden; ++i) {
      model.params[static_cast<std::size_t>(w2_offset + i)] = rng.uniform(-0.1, 0.1);
    }
    // b2 zero
  }
  return model;
}

double predict(const TwinModel& model, const std::vector<double>& features) {
  if (static_cast<int>(features.size()) != model.input_dim) {
    throw std::invalid_argument("predict: feature dimension mismatch");
  }
  const auto& p = model.params;
  if (model.arch == Arch::linear) {
    double out = p[static_cast<std::size_t>(model.input_dim)];
    for (int i = 0; i < model.input_dim; ++i) {
      out += p[static_cast<std::size_t>(i)] * features[static_cast<std::size_t>(i)];
    }
    return out;
  }

  const int d = model.input_dim;
  const int h = model.hidden;
  const int b1_offset = d * h;
  const int w2_offset = b1_offset + h;
  const int b2_offset = w2_offset + h;
  double out = p[static_cast<std::size_t>(b2_offset)];
  for (int unit = 0; unit < h; ++unit) {
    double z = p[static_cast<std::size_t>(b1_offset + unit)];
    for (int i = 0; i < d; ++i) {
      z += p[static_cast<std::size_t>(unit * d + i)] * features[static_cast<std::size_t>(i)];
    }
    out += p[static_cast<std::size_t>(w2_offset + unit)] * std::tanh(z);
  }
  return out;
}

std::vector<double> loss_gradient(const TwinModel& model, const std::vector<Sample>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_gradient: empty batch");

  std::vector<double> grad(model.params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const auto& p = model.params;

  if (model.arch == Arch::linear) {
    for (const Sample& sample : batch) {
      const double err = 2.0 * (predict(model, sample.features) - sample.target) * inv_n;
      for (int i = 0; i < model.input_dim; ++i) {
        grad[static_cast<std::size_t>(i)] += err * sample.features[static_cast<std::size_t>(i)];
      }
      grad[static_cast<std::size_t>(model.input_dim)] += err;
    }
    return grad;
  }

  const int d = model.input_dim;
  const int h = model.hidden;
  const int b1_offset = d * h;
  const int w2_offset = b1_offset + h;
  const int b2_offset = w2_offset + h;
  std::vector<double> hidden_out(static_cast<std::size_t>(h));

  for (const Sample& sample : batch) {
    double out = p[static_cast<std::size_t>(b2_offset)];
    for (int unit = 0; unit < h; ++unit) {
      double z = p[static_cast<std::size_t>(b1_offset + unit)];
      for (int i = 0; i < d; ++i) {
        z += p[static_cast<std::size_t>(unit * d + i)] *
             sample.features[static_cast<std::size_t>(i)];
      }
      hidden_out[static_cast<std::size_t>(unit)] = std::tanh(z);
      out += p[static_cast<std::size_t>(w2_offset + unit)] *
             hidden_out[static_cast<std::size_t>(unit)];
    }

    const double dout = 2.0 * (out - sample.target) * inv_n;
    grad[static_cast<std::size_t>(b2_offset)] += dout;
    for (int unit = 0; unit < h; ++unit) {
      const double hval = hidden_out[static_cast<std::size_t>(unit)];
      grad[static_cast<std::size_t>(w2_offset + unit)] += dout * hval;
      const double dz = dout * p[static_cast<std::size_t>(w2_offset + unit)] * (1.0 - hval * hval);
      grad[static_cast<std::size_t>(b1_offset + unit)] += dz;
      for (int i = 0; i < d; ++i) {
        grad[static_cast<std::size_t>(unit * d + i)] +=
            dz * sample.features[static_cast<std::size_t>(i)];
      }
    }
  }
  return grad;
}

double dataset_loss(const TwinModel& model, const WindowedDataset& data) {
  if (data.empty()) throw std::invalid_argument("dataset_loss: empty dataset");
  double sum = 0.0;
  for (const Sample& sample : data.samples) {
    sum += quadratic_loss(predict(model, sample.features), sample.target);
  }
  return sum / static_cast<double>(data.size());
}

TrainResult local_train(const TwinModel& model, const WindowedDataset& data,
                        const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("local_train: empty dataset");
  if (data.input_dim != model.input_dim) {
    throw std::invalid_argument("local_train: dataset/model dimension mismatch");
  }
  if (cfg.learning_rate < 0.0 || cfg.batch_size < 1 || cfg.epochs < 1) {
    throw std::invalid_argument("local_train: invalid train config");
  }

  TrainResult result;
  result.model = model;
  Rng rng(mix_seed(cfg.seed, 0x747261696eULL));

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Sample> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < stop; ++i) batch.push_back(data.samples[order[i]]);

      const auto grad = loss_gradient(result.model, batch);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        result.model.params[i] -= cfg.learning_rate * grad[i];
      }
    }

    const double epoch_loss = dataset_loss(result.model, data);
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch), epoch);
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  return result;
}

}  // namespace vhtwin
