#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <utility>

namespace panolab {

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {
inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return handler;
}
}  // namespace detail

/// Replaces the process-wide warning sink and returns the previous one.
/// Passing an empty handler silences warnings.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  return std::exchange(detail::warning_handler(), std::move(handler));
}

inline void warn(const std::string& msg) {
  if (auto& handler = detail::warning_handler()) handler(msg);
}

/// Restores the previous handler on scope exit.
class ScopedWarningHandler {
 public:
  explicit ScopedWarningHandler(WarningHandler handler) : previous_(set_warning_handler(std::move(handler))) {}
  ~ScopedWarningHandler() { set_warning_handler(std::move(previous_)); }
  ScopedWarningHandler(const ScopedWarningHandler&) = delete;
  ScopedWarningHandler& operator=(const ScopedWarningHandler&) = delete;

 private:
  WarningHandler previous_;
};

}  // namespace panolab
