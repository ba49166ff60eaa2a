#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "panolab/core/error.hpp"

namespace panolab {

struct PoseRecord {
  long frame = 0;
  double tx = 0.0;
  double ty = 0.0;
  double tz = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double roll_deg = 0.0;
};

struct PoseLog {
  std::vector<PoseRecord> records;
};

struct ParameterStatistic {
  std::string parameter;
  std::string symbol;
  std::string unit;
  double mean = 0.0;
  double std_dev = 0.0;  // sample estimator, N - 1 denominator
};

namespace detail {
// Summing in sorted order makes the result independent of record order.
inline std::pair<double, double> sorted_mean_std(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  if (v.front() == v.back()) return {v.front(), 0.0};
  auto kahan = [](const std::vector<double>& xs, auto f) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
      const double y = f(x) - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return sum;
  };
  const double n = static_cast<double>(v.size());
  const double mean = kahan(v, [](double x) { return x; }) / n;
  std::vector<double> dev(v.size());
  std::transform(v.begin(), v.end(), dev.begin(), [mean](double x) { return (x - mean) * (x - mean); });
  std::sort(dev.begin(), dev.end());
  const double var = kahan(dev, [](double x) { return x; }) / (n - 1.0);
  return {mean, std::sqrt(var)};
}
}  // namespace detail

/// Mean and sample standard deviation of each pose parameter, rows ordered
/// horizontal, forward and vertical shift, then pitch, yaw, roll.
inline std::array<ParameterStatistic, 6> pose_statistics(const PoseLog& log) {
  if (log.records.size() < 2) throw InvalidInput("pose statistics need at least two records");
  struct Column {
    const char* parameter;
    const char* symbol;
    const char* unit;
    double PoseRecord::*field;
  };
  static constexpr std::array<Column, 6> columns = {{
      {"Horizontal shift", "t_x", "m", &PoseRecord::tx},
      {"Forward shift", "t_y", "m", &PoseRecord::ty},
      {"Vertical shift", "t_z", "m", &PoseRecord::tz},
      {"Pitch", "theta_pitch", "deg", &PoseRecord::pitch_deg},
      {"Yaw", "theta_yaw", "deg", &PoseRecord::yaw_deg},
      {"Roll", "theta_roll", "deg", &PoseRecord::roll_deg},
  }};
  std::array<ParameterStatistic, 6> out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<double> values;
    values.reserve(log.records.size());
    for (const auto& r : log.records) values.push_back(r.*columns[c].field);
    const auto [mean, sd] = detail::sorted_mean_std(std::move(values));
    out[c] = {columns[c].parameter, columns[c].symbol, columns[c].unit, mean, sd};
  }
  return out;
}

}  // namespace panolab
