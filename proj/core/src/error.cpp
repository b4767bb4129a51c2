#include "dmuq/error.hpp"

#include <iostream>
#include <mutex>

namespace dmuq {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::parameter: return "parameter";
    case ErrorCategory::data: return "data";
    case ErrorCategory::connectivity: return "connectivity";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::model_quality: return "model-quality";
    case ErrorCategory::tuning: return "tuning";
    case ErrorCategory::observable: return "observable";
    case ErrorCategory::input: return "input";
    case ErrorCategory::degenerate_density: return "degenerate-density";
    case ErrorCategory::assimilation: return "assimilation";
    case ErrorCategory::integration: return "integration";
    case ErrorCategory::unstable_parameter: return "unstable-parameter";
    case ErrorCategory::mode_truncation: return "mode-truncation";
    case ErrorCategory::importance_weight: return "importance-weight";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

void set_warning_sink(WarningSink new_sink) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(new_sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

}  // namespace dmuq
