#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "panolab/core/error.hpp"

namespace panolab::io {

using Json = nlohmann::ordered_json;

/// How non-config floats are printed: fixed with 6 decimals for metric
/// reports, 6-digit scientific for spectra and residuals that span many
/// orders of magnitude.
enum class FloatStyle { fixed6, scientific6 };

namespace detail {

inline std::string format_float(double v, FloatStyle style) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, style == FloatStyle::fixed6 ? "%.6f" : "%.6e", v);
  std::string s = buf;
  // "-0.000000" and "-0.000000e+00" print as their positive form.
  if (s.front() == '-' && s.find_first_not_of("-0.e+", 0) == std::string::npos) s.erase(0, 1);
  return s;
}

inline void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

inline void dump(const Json& j, std::string& out, int depth, FloatStyle style, bool exact) {
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        indent(out, depth + 1);
        out += Json(it.key()).dump();
        out += ": ";
        dump(it.value(), out, depth + 1, style, exact || (depth == 0 && it.key() == "config"));
      }
      out += '\n';
      indent(out, depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        indent(out, depth + 1);
        dump(j[i], out, depth + 1, style, exact);
      }
      out += '\n';
      indent(out, depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      out += exact ? j.dump() : format_float(j.get<double>(), style);
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Canonical text: insertion-ordered keys, two-space indent, fixed float
/// formatting, trailing newline. The top-level "config" member keeps
/// shortest round-trip floats so it can be fed back as input.
inline std::string canonical_json(const Json& j, FloatStyle style = FloatStyle::fixed6) {
  std::string out;
  detail::dump(j, out, 0, style, false);
  out += '\n';
  return out;
}

inline Json parse_json(const std::string& text, const std::string& name) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("malformed JSON in " + name + ": " + e.what());
  }
}

}  // namespace panolab::io
