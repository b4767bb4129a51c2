#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dmuq {

/// Failure classes surfaced by the library. The CLI maps each one to a
/// distinct exit code and prints the category name on stderr.
enum class ErrorCategory {
  parameter,
  data,
  connectivity,
  numeric,
  model_quality,
  tuning,
  observable,
  input,
  degenerate_density,
  assimilation,
  integration,
  unstable_parameter,
  mode_truncation,
  importance_weight,
  parse,
  io,
};

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Non-fatal diagnostics ("clamped r_j", "C(dt) already negative", ...).
/// Defaults to stderr; tests swap in a capturing sink.
using WarningSink = std::function<void(std::string_view)>;

void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) fail(category, message);
}

}  // namespace dmuq
