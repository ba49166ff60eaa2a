#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "panolab/core/error.hpp"
#include "panolab/io/atomic_write.hpp"
#include "panolab/metrics/pose_stats.hpp"

namespace panolab::io {

inline constexpr std::array<std::string_view, 7> kPoseColumns = {"frame",     "tx",      "ty",      "tz",
                                                                 "pitch_deg", "yaw_deg", "roll_deg"};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_field(std::string_view text, std::string_view column, std::size_t line) {
  text = trim(text);
  T v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw ParseError(line, "column " + std::string(column) + ": cannot parse '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ParseError(line, "column " + std::string(column) + ": value is not finite");
  }
  return v;
}

}  // namespace detail

/// Pose log with header frame,tx,ty,tz,pitch_deg,yaw_deg,roll_deg and
/// strictly increasing frame numbers.
inline PoseLog parse_pose_csv(std::string_view text) {
  PoseLog log;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (!header_seen) {
      for (std::size_t i = 0; i < kPoseColumns.size(); ++i) {
        if (i >= fields.size()) throw ParseError(line_no, "header is missing column " + std::string(kPoseColumns[i]));
        if (detail::trim(fields[i]) != kPoseColumns[i]) {
          throw ParseError(line_no, "header column " + std::to_string(i + 1) + " must be " +
                                        std::string(kPoseColumns[i]) + ", found '" +
                                        std::string(detail::trim(fields[i])) + "'");
        }
      }
      if (fields.size() > kPoseColumns.size()) throw ParseError(line_no, "header has extra columns");
      header_seen = true;
      continue;
    }
    if (fields.size() < kPoseColumns.size()) {
      throw ParseError(line_no, "missing column " + std::string(kPoseColumns[fields.size()]));
    }
    if (fields.size() > kPoseColumns.size()) throw ParseError(line_no, "too many columns");
    PoseRecord r;
    r.frame = detail::parse_field<long>(fields[0], kPoseColumns[0], line_no);
    double* slots[] = {&r.tx, &r.ty, &r.tz, &r.pitch_deg, &r.yaw_deg, &r.roll_deg};
    for (std::size_t i = 0; i < 6; ++i) *slots[i] = detail::parse_field<double>(fields[i + 1], kPoseColumns[i + 1], line_no);
    if (!log.records.empty() && r.frame <= log.records.back().frame) {
      throw ParseError(line_no, "frame " + std::to_string(r.frame) + " does not increase");
    }
    log.records.push_back(r);
  }
  if (!header_seen) throw ParseError(1, "empty pose log, expected header");
  return log;
}

inline PoseLog load_pose_csv(const fs::path& path) { return parse_pose_csv(read_text(path)); }

/// Shortest round-trip decimal for every value.
inline std::string format_pose_csv(const PoseLog& log) {
  std::string out = "frame,tx,ty,tz,pitch_deg,yaw_deg,roll_deg\n";
  char buf[64];
  auto put = [&](double v) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
  };
  for (const auto& r : log.records) {
    out += std::to_string(r.frame);
    for (double v : {r.tx, r.ty, r.tz, r.pitch_deg, r.yaw_deg, r.roll_deg}) {
      out += ',';
      put(v);
    }
    out += '\n';
  }
  return out;
}

inline void save_pose_csv(const PoseLog& log, const fs::path& path) { write_text_atomically(path, format_pose_csv(log)); }

}  // namespace panolab::io
