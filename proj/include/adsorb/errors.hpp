#pragma once

#include <stdexcept>
#include <string>

namespace adsorb {

enum class ErrorKind {
  parse,
  lookup,
  unsupported_input,
  degenerate_geometry,
  no_surface,
  placement_failure,
  no_matching_site,
  missing_parameter,
  precondition,
  calculator,
  transport,
  timeout,
  auth,
  schema,
  planner_failure,
  agent_failure,
  all_filtered,
  derivation,
  config,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::unsupported_input: return "unsupported-input";
    case ErrorKind::degenerate_geometry: return "degenerate-geometry";
    case ErrorKind::no_surface: return "no-surface";
    case ErrorKind::placement_failure: return "placement-failure";
    case ErrorKind::no_matching_site: return "no-matching-site";
    case ErrorKind::missing_parameter: return "missing-parameter";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::calculator: return "calculator";
    case ErrorKind::transport: return "transport";
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::auth: return "auth";
    case ErrorKind::schema: return "schema";
    case ErrorKind::planner_failure: return "planner-failure";
    case ErrorKind::agent_failure: return "agent-failure";
    case ErrorKind::all_filtered: return "all-filtered";
    case ErrorKind::derivation: return "derivation";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace adsorb
