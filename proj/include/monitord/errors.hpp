#pragma once

#include <stdexcept>
#include <string>

namespace monitord {

enum class Errc {
  // hook registry
  duplicate_hook_id,
  malformed_schema,
  unknown_hook,
  category_mismatch,
  // module lifecycle
  unresolvable_entry_point,
  unknown_declared_hook,
  wrong_state,
  no_module_loaded,
  feature_disabled,
  // kernel layer
  unknown_pid,
  malformed_args,
  unknown_connection,
  unknown_object,
  privilege_denied,
  unknown_key,
  spawn_denied,
  // middleware services
  unknown_package,
  unknown_component,
  unknown_store,
  no_current_fix,
  not_running,
  // irm runtime
  unknown_method,
  unresolvable_target,
  stale_handle,
  argument_error,
  unknown_monitor,
  monitor_denied,
  // bench harness
  mode_changed_mid_run,
  scenario_mismatch,
  empty_stats,
  // configs and scenarios
  parse_error,
  config_error,
  unknown_predicate,
  malformed_rule,
  // bundle
  depth_exceeded,
  heterogeneous_list,
  type_mismatch,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::duplicate_hook_id: return "DuplicateHookId";
    case Errc::malformed_schema: return "MalformedSchema";
    case Errc::unknown_hook: return "UnknownHook";
    case Errc::category_mismatch: return "CategoryMismatch";
    case Errc::unresolvable_entry_point: return "UnresolvableEntryPoint";
    case Errc::unknown_declared_hook: return "UnknownDeclaredHook";
    case Errc::wrong_state: return "WrongState";
    case Errc::no_module_loaded: return "NoModuleLoaded";
    case Errc::feature_disabled: return "FeatureDisabled";
    case Errc::unknown_pid: return "UnknownPid";
    case Errc::malformed_args: return "MalformedArgs";
    case Errc::unknown_connection: return "UnknownConnection";
    case Errc::unknown_object: return "UnknownObject";
    case Errc::privilege_denied: return "PrivilegeDenied";
    case Errc::unknown_key: return "UnknownKey";
    case Errc::spawn_denied: return "SpawnDenied";
    case Errc::unknown_package: return "UnknownPackage";
    case Errc::unknown_component: return "UnknownComponent";
    case Errc::unknown_store: return "UnknownStore";
    case Errc::no_current_fix: return "NoCurrentFix";
    case Errc::not_running: return "NotRunning";
    case Errc::unknown_method: return "UnknownMethod";
    case Errc::unresolvable_target: return "UnresolvableTarget";
    case Errc::stale_handle: return "StaleHandle";
    case Errc::argument_error: return "ArgumentError";
    case Errc::unknown_monitor: return "UnknownMonitor";
    case Errc::monitor_denied: return "MonitorDenied";
    case Errc::mode_changed_mid_run: return "ModeChangedMidRun";
    case Errc::scenario_mismatch: return "ScenarioMismatch";
    case Errc::empty_stats: return "EmptyStats";
    case Errc::parse_error: return "ParseError";
    case Errc::config_error: return "ConfigError";
    case Errc::unknown_predicate: return "UnknownPredicate";
    case Errc::malformed_rule: return "MalformedRule";
    case Errc::depth_exceeded: return "DepthExceeded";
    case Errc::heterogeneous_list: return "HeterogeneousList";
    case Errc::type_mismatch: return "TypeMismatch";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code),
        detail_(detail) {}

  Errc code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace monitord
