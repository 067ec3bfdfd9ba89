#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/stack.hpp"

namespace monitord::scenario {

struct ScenarioEvent {
  std::string kind;
  nlohmann::ordered_json params;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<ScenarioEvent> events;
};

inline const std::vector<std::string>& scenario_event_kinds() {
  static const std::vector<std::string> kinds = {
      "install",      "uninstall",  "spawn",        "broadcast", "start_activity",
      "bind_service", "get_location", "report_location", "query_content",
      "get_device_id", "clip_get",  "clip_set",     "get_installed", "call_module",
      "expect"};
  return kinds;
}

// Hook each event kind is accounted against in benchmark sampling; empty for
// kinds that do not cross an enforcement hook.
inline std::string primary_hook_for_kind(const std::string& kind) {
  if (kind == "install") return "pms.scanPackage";
  if (kind == "spawn") return "generic.instrumentApp";
  if (kind == "broadcast") return "broadcast.deliverToRegisteredReceiver";
  if (kind == "start_activity") return "ams.startActivity";
  if (kind == "bind_service") return "ams.bindService";
  if (kind == "get_location") return "location.getLastLocation";
  if (kind == "report_location") return "location.reportLocation";
  if (kind == "query_content") return "cp.preQuery";
  if (kind == "get_device_id") return "phonesubinfo.getDeviceId";
  if (kind == "clip_get") return "clip.getPrimaryClip";
  if (kind == "clip_set") return "clip.setPrimaryClip";
  if (kind == "get_installed") return "pms.getInstalledPackages";
  return "";
}

inline Scenario parse_scenario_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw Error(Errc::parse_error, "scenario must be a json object");
  Scenario s;
  if (!j.contains("name") || !j["name"].is_string())
    throw Error(Errc::parse_error, "scenario needs a string name");
  s.name = j["name"].get<std::string>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (!j.contains("events") || !j["events"].is_array())
    throw Error(Errc::parse_error, "scenario needs an events array");
  const auto& kinds = scenario_event_kinds();
  int index = 0;
  for (const auto& e : j["events"]) {
    std::string at = "event " + std::to_string(index);
    if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string())
      throw Error(Errc::parse_error, at + ": missing kind");
    std::string kind = e["kind"].get<std::string>();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
      throw Error(Errc::parse_error, at + ": unknown kind " + kind);
    if (kind == "expect" && s.events.empty())
      throw Error(Errc::parse_error, at + ": expect without a preceding event");
    if (kind == "expect" && s.events.back().kind == "expect")
      throw Error(Errc::parse_error, at + ": expect may not follow an expect");
    if (kind == "install" && (!e.contains("package") || !e["package"].is_object()))
      throw Error(Errc::parse_error, at + ": install needs a package object");
    if (kind == "spawn" && !e.contains("package"))
      throw Error(Errc::parse_error, at + ": spawn needs a package name");
    for (const char* needs_app :
         {"broadcast", "start_activity", "bind_service", "get_location", "query_content",
          "get_device_id", "clip_get", "clip_set", "get_installed"}) {
      if (kind == needs_app && !e.contains("app"))
        throw Error(Errc::parse_error, at + ": " + kind + " needs an app");
    }
    s.events.push_back({kind, e});
    ++index;
  }
  return s;
}

// Parse errors carry the 1-based line for syntax problems and the event index
// for schema problems.
inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_error, "cannot open scenario: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw Error(Errc::parse_error, "line " + std::to_string(line) + ": " + e.what());
  }
  return parse_scenario_json(j);
}

struct RunRecord {
  int index = 0;
  std::string kind;
  std::string outcome;
  std::string reason;
  std::optional<Value> result;
  std::vector<std::string> decisions;  // hook dispatches consulted by this event
};

struct ExpectResult {
  int index = 0;        // index of the expect event
  int target_index = 0; // event it matched against
  bool pass = false;
  std::string detail;
};

struct RunReport {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::string module_name;  // empty when no module was loaded
  bool hooks_enabled = true;
  std::vector<RunRecord> records;
  std::vector<ExpectResult> expects;
  std::map<std::string, std::uint64_t> module_stats;
  std::vector<TraceEvent> trace;

  bool passed() const {
    for (const auto& e : expects)
      if (!e.pass) return false;
    return true;
  }

  nlohmann::ordered_json observable_fingerprint() const {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : trace) {
      if (!e.observable) continue;
      nlohmann::ordered_json item;
      item["kind"] = e.kind;
      item["fields"] = e.fields.to_plain_json();
      arr.push_back(item);
    }
    // Event outcomes are part of the caller-visible behavior.
    for (const auto& r : records) {
      nlohmann::ordered_json item;
      item["kind"] = "outcome";
      item["event"] = r.index;
      item["outcome"] = r.outcome;
      if (r.result) item["result"] = r.result->to_plain_json();
      arr.push_back(item);
    }
    return arr;
  }
};

struct RunOptions {
  bool disable_hooks = false;
  std::optional<std::uint64_t> seed_override;
  bool reload_enabled = false;
};

// Per-event timing callback used by the benchmark harness.
using TimingSink = std::function<void(const ScenarioEvent&, std::int64_t /*ns*/)>;

class ScenarioRunner {
 public:
  // Assembles a fresh stack (no state is shared between runs), loads the
  // module when given, executes the events and evaluates the expects.
  RunReport run(const Scenario& scenario, const sim::StackConfig& stack_config,
                const std::optional<ModuleManifest>& manifest,
                const std::optional<kmac::KernelPolicy>& kernel_policy, const RunOptions& options,
                const TimingSink& timing = {}) {
    sim::SimStack stack(stack_config, kernel_policy);
    stack.framework().set_reload_enabled(options.reload_enabled);
    ModuleHandle* handle = nullptr;
    if (manifest) {
      handle = &stack.load_module(*manifest);
      if (!stack.init_module(*handle))
        throw Error(Errc::config_error, "module init returned false: " + manifest->name);
    }
    stack.framework().set_hooks_enabled(!options.disable_hooks);

    RunReport report;
    report.scenario_name = scenario.name;
    report.seed = options.seed_override.value_or(scenario.seed);
    report.module_name = manifest ? manifest->name : "";
    report.hooks_enabled = !options.disable_hooks;

    run_events(stack, scenario, report, timing, true);

    if (handle && handle->state() == ModuleState::initialized) {
      report.module_stats = handle->stats();
      stack.framework().shutdown_module(*handle);
    }
    report.trace = stack.trace().snapshot();
    return report;
  }

  // Executes the scenario events on an existing stack; the benchmark harness
  // reuses one stack across iterations.
  void run_events(sim::SimStack& stack, const Scenario& scenario, RunReport& report,
                  const TimingSink& timing = {}, bool include_expects = true) {
    for (int i = 0; i < static_cast<int>(scenario.events.size()); ++i) {
      const ScenarioEvent& event = scenario.events[i];
      if (event.kind == "expect") {
        if (!include_expects) continue;
        ExpectResult er = evaluate_expect(event, i, report);
        RunRecord rec;
        rec.index = i;
        rec.kind = "expect";
        rec.outcome = er.pass ? "pass" : "fail";
        rec.reason = er.detail;
        report.records.push_back(rec);
        report.expects.push_back(er);
        continue;
      }
      std::size_t trace_before = stack.trace().size();
      auto begin = std::chrono::steady_clock::now();
      RunRecord rec = execute(stack, event, i);
      auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::steady_clock::now() - begin)
                    .count();
      if (timing) timing(event, ns);
      for (const auto& te : stack.trace().snapshot()) {
        if (te.seq < trace_before || te.kind != "hook_dispatch") continue;
        rec.decisions.push_back(te.fields.get_text("hook").value_or("") + "=" +
                                te.fields.get_text("decision").value_or(""));
      }
      report.records.push_back(std::move(rec));
    }
  }

 private:
  RunRecord execute(sim::SimStack& stack, const ScenarioEvent& event, int index) {
    RunRecord rec;
    rec.index = index;
    rec.kind = event.kind;
    try {
      dispatch_event(stack, event, rec);
    } catch (const Error& e) {
      if (e.code() == Errc::spawn_denied) {
        rec.outcome = "denied";
        rec.reason = e.what();
      } else {
        rec.outcome = "error";
        rec.reason = e.what();
      }
    } catch (const std::exception& e) {
      rec.outcome = "error";
      rec.reason = e.what();
    }
    return rec;
  }

  void dispatch_event(sim::SimStack& stack, const ScenarioEvent& event, RunRecord& rec) {
    const auto& p = event.params;
    if (event.kind == "install") {
      PackageInfo pkg = PackageInfo::from_json(p["package"]);
      sim::InstallResult r = stack.install_package(pkg, stack.system_credentials());
      rec.outcome = r.status == sim::InstallResult::Status::installed   ? "installed"
                    : r.status == sim::InstallResult::Status::replaced ? "replaced"
                                                                        : "rejected";
      rec.reason = r.reason;
      return;
    }
    if (event.kind == "uninstall") {
      stack.uninstall_package(p["package"].get<std::string>(), stack.system_credentials());
      rec.outcome = "removed";
      return;
    }
    if (event.kind == "spawn") {
      sim::SimApp app =
          stack.launch_app_process(p["package"].get<std::string>(), stack.system_credentials());
      rec.outcome = "started";
      Bundle b;
      b.put_text("package", app.package);
      b.put_int("pid", app.pid);
      b.put_int("uid", app.uid);
      rec.result = Value(std::move(b));
      return;
    }
    if (event.kind == "broadcast") {
      int pid = app_pid(stack, p);
      Intent intent;
      intent.action = p["action"].get<std::string>();
      if (p.contains("required_permission") && p["required_permission"].is_string())
        intent.required_permission = p["required_permission"].get<std::string>();
      if (p.contains("extras")) intent.extras = Bundle::from_plain_json(p["extras"]);
      sim::DeliveryReport r = stack.send_broadcast(pid, intent);
      rec.outcome = "sent";
      Bundle b;
      b.put_int("delivered", static_cast<std::int64_t>(r.delivered.size()));
      b.put_int("suppressed", static_cast<std::int64_t>(r.suppressed.size()));
      ValueList to;
      for (const auto& d : r.delivered) to.push_back(Value(d.package));
      b.put_list("to", std::move(to));
      rec.result = Value(std::move(b));
      return;
    }
    if (event.kind == "start_activity" || event.kind == "bind_service") {
      int pid = app_pid(stack, p);
      Intent intent;
      intent.action = p.value("action", "");
      intent.target_component = p["component"].get<std::string>();
      sim::ActionResult r = event.kind == "start_activity" ? stack.start_activity(pid, intent)
                                                           : stack.bind_service(pid, intent);
      rec.outcome = r.ok ? (event.kind == "start_activity" ? "started" : "bound") : "denied";
      rec.reason = r.reason;
      return;
    }
    if (event.kind == "get_location") {
      finish_edit(rec, stack.get_last_location(app_credentials(stack, p)));
      return;
    }
    if (event.kind == "report_location") {
      LocationFix fix;
      fix.latitude = p["lat"].get<double>();
      fix.longitude = p["lon"].get<double>();
      finish_edit(rec, stack.report_location(fix, stack.system_credentials()));
      return;
    }
    if (event.kind == "query_content") {
      Bundle selection;
      if (p.contains("selection")) selection = Bundle::from_plain_json(p["selection"]);
      finish_edit(rec,
                  stack.query_content(app_credentials(stack, p), p["store"].get<std::string>(),
                                      selection));
      return;
    }
    if (event.kind == "get_device_id") {
      finish_edit(rec, stack.get_device_id(app_credentials(stack, p)));
      return;
    }
    if (event.kind == "clip_get") {
      finish_edit(rec, stack.get_primary_clip(app_credentials(stack, p)));
      return;
    }
    if (event.kind == "clip_set") {
      sim::ActionResult r =
          stack.set_primary_clip(app_credentials(stack, p), p["text"].get<std::string>());
      rec.outcome = r.ok ? "ok" : "denied";
      rec.reason = r.reason;
      return;
    }
    if (event.kind == "get_installed") {
      finish_edit(rec, stack.get_installed_packages(app_credentials(stack, p)));
      return;
    }
    if (event.kind == "call_module") {
      Bundle request;
      if (p.contains("bundle")) request = Bundle::from_plain_json(p["bundle"]);
      Bundle response = stack.call_module(request);
      rec.outcome = "ok";
      rec.result = Value(std::move(response));
      return;
    }
    throw Error(Errc::parse_error, "unhandled event kind " + event.kind);
  }

  static void finish_edit(RunRecord& rec, const EditResult& r) {
    if (r.denied()) {
      rec.outcome = "denied";
      rec.reason = r.deny_reason;
    } else {
      rec.outcome = "ok";
      rec.result = r.value;
    }
  }

  static int app_pid(sim::SimStack& stack, const nlohmann::ordered_json& p) {
    std::string package = p["app"].get<std::string>();
    auto app = stack.running_app(package);
    if (!app) throw Error(Errc::not_running, package);
    return app->pid;
  }

  static Credentials app_credentials(sim::SimStack& stack, const nlohmann::ordered_json& p) {
    return stack.app_credentials(app_pid(stack, p));
  }

  ExpectResult evaluate_expect(const ScenarioEvent& event, int index, const RunReport& report) {
    ExpectResult er;
    er.index = index;
    er.target_index = static_cast<int>(report.records.size()) - 1;
    const RunRecord& target = report.records.back();
    const auto& p = event.params;
    auto fail = [&](const std::string& detail) {
      er.pass = false;
      er.detail = detail;
      return er;
    };
    if (p.contains("outcome") && p["outcome"].get<std::string>() != target.outcome)
      return fail("outcome " + target.outcome + " != " + p["outcome"].get<std::string>());
    if (p.contains("reason") && p["reason"].get<std::string>() != target.reason)
      return fail("reason '" + target.reason + "' != '" + p["reason"].get<std::string>() + "'");
    if (p.contains("reason_contains") &&
        target.reason.find(p["reason_contains"].get<std::string>()) == std::string::npos)
      return fail("reason '" + target.reason + "' lacks '" +
                  p["reason_contains"].get<std::string>() + "'");
    if (p.contains("delivered") || p.contains("suppressed")) {
      if (!target.result || !target.result->is_bundle()) return fail("no delivery report");
      const Bundle& b = target.result->as_bundle();
      if (p.contains("delivered") &&
          b.get_int("delivered").value_or(-1) != p["delivered"].get<std::int64_t>())
        return fail("delivered " + std::to_string(b.get_int("delivered").value_or(-1)));
      if (p.contains("suppressed") &&
          b.get_int("suppressed").value_or(-1) != p["suppressed"].get<std::int64_t>())
        return fail("suppressed " + std::to_string(b.get_int("suppressed").value_or(-1)));
    }
    if (p.contains("rows")) {
      if (!target.result || !target.result->is_bundle()) return fail("no result set");
      const ValueList* rows = target.result->as_bundle().get_list("rows");
      if (!rows || static_cast<std::int64_t>(rows->size()) != p["rows"].get<std::int64_t>())
        return fail("rows " + std::to_string(rows ? rows->size() : 0));
    }
    if (p.contains("count")) {
      if (!target.result || !target.result->is_list()) return fail("no list result");
      if (static_cast<std::int64_t>(target.result->as_list().size()) !=
          p["count"].get<std::int64_t>())
        return fail("count " + std::to_string(target.result->as_list().size()));
    }
    if (p.contains("text")) {
      if (!target.result || !target.result->is_text()) return fail("no text result");
      if (target.result->as_text() != p["text"].get<std::string>())
        return fail("text '" + target.result->as_text() + "'");
    }
    if (p.contains("lat") || p.contains("lon")) {
      if (!target.result || !target.result->is_bundle()) return fail("no location result");
      LocationFix fix = LocationFix::from_value(*target.result);
      if (p.contains("lat") && std::abs(fix.latitude - p["lat"].get<double>()) > 1e-9)
        return fail("lat " + std::to_string(fix.latitude));
      if (p.contains("lon") && std::abs(fix.longitude - p["lon"].get<double>()) > 1e-9)
        return fail("lon " + std::to_string(fix.longitude));
    }
    if (p.contains("status")) {
      if (!target.result || !target.result->is_bundle()) return fail("no response bundle");
      if (target.result->as_bundle().get_text("status").value_or("") !=
          p["status"].get<std::string>())
        return fail("status " +
                    target.result->as_bundle().get_text("status").value_or("<none>"));
    }
    if (p.contains("value")) {
      if (!target.result) return fail("no result value");
      if (target.result->to_plain_json() != p["value"]) return fail("value mismatch");
    }
    er.pass = true;
    return er;
  }
};

// ---- report emission ----

inline nlohmann::ordered_json report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = report.scenario_name;
  j["seed"] = report.seed;
  j["module"] = report.module_name;
  j["hooks_enabled"] = report.hooks_enabled;
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : report.records) {
    nlohmann::ordered_json rj;
    rj["index"] = r.index;
    rj["kind"] = r.kind;
    rj["outcome"] = r.outcome;
    if (!r.reason.empty()) rj["reason"] = r.reason;
    if (r.result) rj["result"] = r.result->to_plain_json();
    if (!r.decisions.empty()) rj["decisions"] = r.decisions;
    records.push_back(rj);
  }
  j["records"] = records;
  auto expects = nlohmann::ordered_json::array();
  for (const auto& e : report.expects) {
    nlohmann::ordered_json ej;
    ej["index"] = e.index;
    ej["target"] = e.target_index;
    ej["pass"] = e.pass;
    if (!e.detail.empty()) ej["detail"] = e.detail;
    expects.push_back(ej);
  }
  j["expects"] = expects;
  nlohmann::ordered_json stats = nlohmann::ordered_json::object();
  for (const auto& [hook, count] : report.module_stats) stats[hook] = count;
  j["module_stats"] = stats;
  auto trace = nlohmann::ordered_json::array();
  for (const auto& t : report.trace) {
    nlohmann::ordered_json tj;
    tj["seq"] = t.seq;
    tj["kind"] = t.kind;
    tj["observable"] = t.observable;
    tj["fields"] = t.fields.to_plain_json();
    trace.push_back(tj);
  }
  j["trace"] = trace;
  return j;
}

inline std::string report_text(const RunReport& report) {
  std::ostringstream os;
  os << "scenario " << report.scenario_name << " (seed " << report.seed << ", module "
     << (report.module_name.empty() ? "<none>" : report.module_name) << ", hooks "
     << (report.hooks_enabled ? "enabled" : "disabled") << ")\n";
  for (const auto& r : report.records) {
    if (r.kind == "expect") continue;
    os << "  [" << r.index << "] " << r.kind << " -> " << r.outcome;
    if (!r.reason.empty()) os << " (" << r.reason << ")";
    os << "\n";
  }
  for (const auto& e : report.expects) {
    os << (e.pass ? "PASS" : "FAIL") << " expect@" << e.index << " on event " << e.target_index;
    if (!e.detail.empty()) os << ": " << e.detail;
    os << "\n";
  }
  os << (report.passed() ? "RESULT pass" : "RESULT fail") << "\n";
  return os.str();
}

inline std::string emit_report(const RunReport& report, const std::string& format) {
  if (format == "json") return report_json(report).dump(2) + "\n";
  return report_text(report);
}

}  // namespace monitord::scenario
