#include "vhtwin/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vhtwin/errors.hpp"
#include "vhtwin/rng.hpp"

namespace vhtwin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::map<int, TrafficSeries> load_grid_csv(const std::string& path,
                                           const std::string& value_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open traffic file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty traffic file: " + path);
  const auto header = split_fields(strip_cr(line));
  int value_index = -1;
  int cell_index = -1;
  int ts_index = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == value_column) value_index = static_cast<int>(i);
    if (header[i] == "cell_id") cell_index = static_cast<int>(i);
    if (header[i] == "timestamp_ms") ts_index = static_cast<int>(i);
  }
  if (cell_index < 0 || ts_index < 0) {
    throw DataError("traffic file missing cell_id/timestamp_ms columns: " + path);
  }
  if (value_index < 0) {
    throw DataError("traffic file missing column '" + value_column + "': " + path);
  }

  // (cell, timestamp) -> summed value; the raw export splits rows by country
  // code, so duplicates are legitimate and accumulate.
  std::map<int, std::map<std::int64_t, double>> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) <= std::max(value_index, std::max(cell_index, ts_index))) {
      throw DataError("unparsable row at line " + std::to_string(line_no) + " in " + path);
    }
    try {
      const int cell = std::stoi(fields[static_cast<std::size_t>(cell_index)]);
      const std::int64_t ts = std::stoll(fields[static_cast<std::size_t>(ts_index)]);
      const std::string& raw = fields[static_cast<std::size_t>(value_index)];
      const double value = raw.empty() ? 0.0 : std::stod(raw);
      if (!std::isfinite(value) || value < 0.0) {
        throw DataError("negative or non-finite value at line " + std::to_string(line_no) +
                        " in " + path);
      }
      cells[cell][ts] += value;
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError("unparsable row at line " + std::to_string(line_no) + " in " + path);
    }
  }
  if (cells.empty()) throw DataError("traffic file has no data rows: " + path);

  std::map<int, TrafficSeries> out;
  for (const auto& [cell, by_ts] : cells) {
    TrafficSeries series;
    series.bs_id = cell;

    // Modal timestamp gap defines the interval.
    std::int64_t interval_ms = 0;
    if (by_ts.size() > 1) {
      std::map<std::int64_t, int> gap_count;
      std::int64_t prev = by_ts.begin()->first;
      for (auto it = std::next(by_ts.begin()); it != by_ts.end(); ++it) {
        gap_count[it->first - prev] += 1;
        prev = it->first;
      }
      int best = 0;
      for (const auto& [gap, count] : gap_count) {
        if (count > best) {
          best = count;
          interval_ms = gap;
        }
      }
    }
    // Single-sample cells fall back to the 10-minute Milan grid interval.
    series.interval_s = interval_ms > 0 ? static_cast<double>(interval_ms) / 1000.0 : 600.0;

    if (interval_ms == 0) {
      for (const auto& [ts, value] : by_ts) series.values.push_back(value);
    } else {
      // Lay values on the regular grid; missing slots become NaN markers.
      const std::int64_t t0 = by_ts.begin()->first;
      for (const auto& [ts, value] : by_ts) {
        const std::int64_t offset = ts - t0;
        if (offset % interval_ms != 0) {
          throw DataError("cell " + std::to_string(cell) +
                          " timestamps not aligned to the modal interval in " + path);
        }
        const auto slot = static_cast<std::size_t>(offset / interval_ms);
        if (series.values.size() < slot) series.values.resize(slot, kNaN);
        series.values.push_back(value);
      }
    }
    out.emplace(cell, std::move(series));
  }
  return out;
}

void save_grid_csv(const std::string& path, const std::map<int, TrafficSeries>& series,
                   const std::string& value_column) {
  static const std::vector<std::string> kColumns = {"sms_in", "sms_out", "call_in",
                                                    "call_out", "internet"};
  if (std::find(kColumns.begin(), kColumns.end(), value_column) == kColumns.end()) {
    throw DataError("unknown traffic column: " + value_column);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write traffic file: " + path);

  out << "cell_id,timestamp_ms,sms_in,sms_out,call_in,call_out,internet\n";
  char buf[256];
  for (const auto& [cell, s] : series) {
    const auto interval_ms =
        static_cast<std::int64_t>(s.interval_s > 0 ? s.interval_s * 1000.0 : 600000.0);
    for (std::size_t t = 0; t < s.values.size(); ++t) {
      if (std::isnan(s.values[t])) continue;  // missing intervals stay missing
      std::string row;
      for (const auto& col : kColumns) {
        if (col == value_column) {
          std::snprintf(buf, sizeof(buf), ",%.17g", s.values[t]);
        } else {
          std::snprintf(buf, sizeof(buf), ",%d", 0);
        }
        row += buf;
      }
      out << cell << ',' << static_cast<std::int64_t>(t) * interval_ms << row << '\n';
    }
  }
}

std::map<int, TrafficSeries> generate_synthetic(int n_bs, int length, int period,
                                                double noise_std, double hetero,
                                                std::uint64_t seed) {
  if (n_bs < 1) throw std::invalid_argument("generate_synthetic: n_bs must be >= 1");
  if (period < 1 || length <= period) {
    throw std::invalid_argument("generate_synthetic: need length > period >= 1");
  }
  if (noise_std < 0.0 || hetero < 0.0 || hetero > 1.0) {
    throw std::invalid_argument("generate_synthetic: noise_std >= 0 and hetero in [0,1]");
  }

  std::map<int, TrafficSeries> out;
  for (int b = 0; b < n_bs; ++b) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(b)));
    const double base = 2.0 + hetero * 1.5 * rng.uniform(-1.0, 1.0);
    const double amplitude = 1.0 + hetero * 0.8 * rng.uniform(-1.0, 1.0);
    const double phase = hetero * 2.0 * std::numbers::pi * rng.uniform01();

    TrafficSeries series;
    series.bs_id = b;
    series.interval_s = 3600.0;
    series.values.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
      // Phase argument reduced by t % period so noiseless output is exactly
      // periodic, bit for bit.
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>(t % period) / period + phase;
      double v = base + amplitude * std::sin(angle);
      if (noise_std > 0.0) v += noise_std * rng.normal();
      series.values.push_back(std::max(0.0, v));
    }
    out.emplace(b, std::move(series));
  }
  return out;
}

std::pair<TrafficSeries, NormParams> normalize(const TrafficSeries& series,
                                               std::optional<NormParams> params) {
  NormParams p;
  if (params.has_value()) {
    p = *params;
    if (!(p.max > p.min)) throw std::invalid_argument("normalize: params require max > min");
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const double v : series.values) {
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
      throw std::invalid_argument("normalize: constant series needs explicit params");
    }
    p.min = lo;
    p.max = hi;
  }

  TrafficSeries scaled = series;
  const double range = p.max - p.min;
  for (double& v : scaled.values) {
    if (std::isnan(v)) continue;
    v = (v - p.min) / range;
    if (params.has_value()) v = std::clamp(v, -0.5, 1.5);  // stream drift tolerance
  }
  return {std::move(scaled), p};
}

TrafficSeries denormalize(const TrafficSeries& series, const NormParams& params) {
  TrafficSeries out = series;
  for (double& v : out.values) {
    if (std::isnan(v)) continue;
    v = v * (params.max - params.min) + params.min;
  }
  return out;
}

std::pair<TrafficSeries, TrafficSeries> split(const TrafficSeries& series,
                                              const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0,1)");
  }
  const int length = series.length();
  const int cut = static_cast<int>(std::floor(spec.train_fraction * length));
  if (cut < 1 || cut >= length) {
    throw std::invalid_argument("split: both partitions must be nonempty");
  }

  TrafficSeries historical;
  historical.bs_id = series.bs_id;
  historical.interval_s = series.interval_s;
  historical.values.assign(series.values.begin(), series.values.begin() + cut);

  TrafficSeries stream;
  stream.bs_id = series.bs_id;
  stream.interval_s = series.interval_s;
  stream.values.assign(series.values.begin() + cut, series.values.end());

  return {std::move(historical), std::move(stream)};
}

}  // namespace vhtwin
