#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vhtwin {

/// One station's traffic series at a fixed sampling interval. Missing
/// intervals are kept as NaN markers; downstream windowing skips them.
struct TrafficSeries {
  int bs_id = 0;
  double interval_s = 0.0;
  std::vector<double> values;

  int length() const { return static_cast<int>(values.size()); }
};

struct SplitSpec {
  double train_fraction = 0.8;  // in (0,1)
};

/// Min-max scaling parameters, fitted on historical data and reused on the
/// stream so no information leaks across the split.
struct NormParams {
  double min = 0.0;
  double max = 1.0;
};

/// Parses a Milan-grid-style export: header
/// `cell_id,timestamp_ms,sms_in,sms_out,call_in,call_out,internet`, rows
/// grouped by cell, sorted by timestamp, duplicate (cell, timestamp) rows
/// summed. The sampling interval is the modal timestamp gap; larger gaps
/// become NaN markers.
std::map<int, TrafficSeries> load_grid_csv(const std::string& path,
                                           const std::string& value_column);

/// Writes series back in the same schema; the value lands in value_column,
/// the remaining data columns are zero.
void save_grid_csv(const std::string& path, const std::map<int, TrafficSeries>& series,
                   const std::string& value_column);

/// Seeded sinusoidal traffic: per-BS base level, amplitude and phase whose
/// spread scales with hetero, plus Gaussian noise, clipped at zero. With
/// noise_std = 0 the series is exactly periodic.
std::map<int, TrafficSeries> generate_synthetic(int n_bs, int length, int period,
                                                double noise_std, double hetero,
                                                std::uint64_t seed);

/// Scales to [0,1] using the series extremes, or applies the supplied params
/// and clamps to [-0.5, 1.5] to tolerate drift. Errors on a constant series
/// when no params are supplied.
std::pair<TrafficSeries, NormParams> normalize(const TrafficSeries& series,
                                               std::optional<NormParams> params = std::nullopt);

TrafficSeries denormalize(const TrafficSeries& series, const NormParams& params);

/// Contiguous prefix/suffix split at floor(train_fraction * L).
std::pair<TrafficSeries, TrafficSeries> split(const TrafficSeries& series,
                                              const SplitSpec& spec);

}  // namespace vhtwin
