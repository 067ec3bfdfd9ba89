#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "monitord/framework.hpp"
#include "monitord/hook_catalog.hpp"
#include "monitord/irm.hpp"
#include "monitord/kmac.hpp"
#include "monitord/module_api.hpp"
#include "monitord/sim_types.hpp"
#include "monitord/trace.hpp"

namespace monitord::sim {

// Boot-time state of the simulated device.
struct StackConfig {
  std::string device_id = "490154203237518";
  std::vector<LocationFix> location_seed;
  std::vector<std::string> providers = {"gps", "network"};
  std::vector<std::pair<std::string, ResultSet>> content_stores;
  std::vector<PackageInfo> preinstalled_packages;
  std::optional<nlohmann::ordered_json> kernel_policy;  // may also come from a separate file

  static StackConfig from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw Error(Errc::parse_error, "stack config must be a json object");
    StackConfig c;
    if (j.contains("device_id")) c.device_id = j["device_id"].get<std::string>();
    if (j.contains("location_seed")) {
      for (const auto& f : j["location_seed"]) {
        LocationFix fix;
        fix.latitude = f["lat"].get<double>();
        fix.longitude = f["lon"].get<double>();
        if (f.contains("ts")) fix.timestamp = f["ts"].get<std::int64_t>();
        c.location_seed.push_back(fix);
      }
    }
    if (j.contains("providers")) {
      c.providers.clear();
      for (const auto& p : j["providers"]) c.providers.push_back(p.get<std::string>());
    }
    if (j.contains("content_stores")) {
      for (const auto& s : j["content_stores"]) {
        ResultSet rs;
        for (const auto& col : s["columns"]) rs.columns.push_back(col.get<std::string>());
        if (s.contains("rows")) {
          for (const auto& row : s["rows"]) {
            std::vector<Value> r;
            for (const auto& cell : row) r.push_back(Value(cell.get<std::string>()));
            if (r.size() != rs.columns.size())
              throw Error(Errc::parse_error, "row arity mismatch in store " +
                                                 s["name"].get<std::string>());
            rs.rows.push_back(std::move(r));
          }
        }
        c.content_stores.emplace_back(s["name"].get<std::string>(), std::move(rs));
      }
    }
    if (j.contains("preinstalled_packages")) {
      for (const auto& p : j["preinstalled_packages"])
        c.preinstalled_packages.push_back(PackageInfo::from_json(p));
    }
    if (j.contains("kernel_policy")) c.kernel_policy = j["kernel_policy"];
    return c;
  }

  static StackConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config_error, "cannot open stack config: " + path);
    try {
      return from_json(nlohmann::ordered_json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse_error, std::string("stack config: ") + e.what());
    }
  }
};

struct SimApp {
  std::string package;
  int pid = -1;
  int uid = -1;
  std::set<std::string> registered_receivers;
};

struct InstallResult {
  enum class Status { installed, replaced, rejected };
  Status status;
  std::string reason;
  int uid = -1;

  bool ok() const { return status != Status::rejected; }
};

struct DeliveryReport {
  struct Receiver {
    std::string package;
    int pid;
    std::string reason;  // empty for delivered entries
  };
  std::vector<Receiver> delivered;
  std::vector<Receiver> suppressed;
};

struct ActionResult {
  bool ok = false;
  std::string reason;
};

struct PermissionResult {
  bool granted = false;
  std::string reason;
};

// Simulated middleware: package registry, broadcast bus, location, content
// stores, clipboard, device info and an activity-manager analogue, all
// mediated through the framework's hooks and the kernel object layer.
class SimStack : public FrameworkCallbacks {
 public:
  explicit SimStack(const StackConfig& config = {},
                    std::optional<kmac::KernelPolicy> kernel_policy = std::nullopt)
      : framework_(&trace_), irm_(&trace_) {
    if (kernel_policy) {
      kernel_.boot(*kernel_policy);
    } else if (config.kernel_policy) {
      kernel_.boot(kmac::KernelPolicy::from_json(*config.kernel_policy));
    }
    // The kernel adapter comes up before any middleware module can load.
    kernel_.kmac_init();
    zygote_pid_ = kernel_.create_initial_process("zygote", 0).pid;
    system_pid_ = kernel_.create_initial_process("android.system", 1000).pid;

    hooks::register_standard_hooks(framework_.hooks());
    framework_.set_callbacks(this);
    register_builtin_monitors();

    device_id_ = config.device_id;
    providers_ = config.providers;
    for (const auto& [name, rs] : config.content_stores) stores_[name] = rs;
    for (const auto& fix : config.location_seed) {
      LocationFix f = fix;
      if (f.timestamp == 0) f.timestamp = ++location_tick_;
      current_fix_ = f;
    }
    // Preinstalls run through the regular scan path; no module is initialized
    // yet, so scans allow and events are no-ops.
    for (const auto& pkg : config.preinstalled_packages) install_package(pkg, system_credentials());
  }

  Framework& framework() { return framework_; }
  kmac::Kernel& kernel() { return kernel_; }
  irm::IrmRuntime& irm() { return irm_; }
  TraceRecorder& trace() { return trace_; }

  Credentials system_credentials() const { return {1000, system_pid_, "android.system"}; }
  Credentials zygote_credentials() const { return {0, zygote_pid_, "zygote"}; }

  Credentials app_credentials(int pid) const {
    auto it = apps_.find(pid);
    if (it == apps_.end() || !kernel_.process_alive(pid))
      throw Error(Errc::not_running, "pid " + std::to_string(pid));
    return {it->second.uid, pid, it->second.package};
  }

  // ---- module lifecycle ----

  ModuleHandle& load_module(const ModuleManifest& manifest) {
    return framework_.load_module(manifest);
  }

  bool init_module(ModuleHandle& handle) { return framework_.init_module(handle, *this); }

  // ---- FrameworkCallbacks ----

  std::optional<std::string> package_for_pid(int pid) const override {
    if (!kernel_.process_alive(pid)) return std::nullopt;
    return kernel_.process(pid).package;
  }

  std::vector<std::string> installed_packages() const override { return install_order_; }

  std::optional<PackageInfo> package_info(const std::string& name) const override {
    auto it = installed_.find(name);
    if (it == installed_.end()) return std::nullopt;
    return it->second;
  }

  // ---- package manager ----

  InstallResult install_package(const PackageInfo& request, const Credentials& caller) {
    PackageInfo pkg = request;
    bool replacing = installed_.count(pkg.name) != 0;
    Bundle args;
    args.put_bundle("package", pkg.to_bundle());
    PolicyDecision d = framework_.dispatch_truncation("pms.scanPackage", caller, args);
    if (d.is_deny()) {
      Bundle f;
      f.put_text("package", pkg.name);
      f.put_text("reason", d.reason());
      trace_.record("install_rejected", true, std::move(f));
      return {InstallResult::Status::rejected, d.reason(), -1};
    }
    if (replacing) {
      pkg.uid = installed_[pkg.name].uid;  // uid survives replacement
    } else if (pkg.uid < 0) {
      pkg.uid = next_app_uid_++;
    }
    installed_[pkg.name] = pkg;
    if (!replacing) {
      install_order_.push_back(pkg.name);
      kernel_.create_file("/data/" + pkg.name);
    }
    framework_.notify_package_event(
        replacing ? PackageEventKind::replaced : PackageEventKind::installed, pkg);
    Bundle f;
    f.put_text("package", pkg.name);
    f.put_int("uid", pkg.uid);
    trace_.record(replacing ? "package_replaced" : "package_installed", true, std::move(f));
    return {replacing ? InstallResult::Status::replaced : InstallResult::Status::installed, "",
            pkg.uid};
  }

  void uninstall_package(const std::string& name, const Credentials& caller) {
    (void)caller;
    auto it = installed_.find(name);
    if (it == installed_.end()) throw Error(Errc::unknown_package, name);
    PackageInfo pkg = it->second;
    installed_.erase(it);
    for (auto oit = install_order_.begin(); oit != install_order_.end(); ++oit) {
      if (*oit == name) {
        install_order_.erase(oit);
        break;
      }
    }
    // Terminate the app's processes before announcing removal.
    std::vector<int> dead;
    for (const auto& [pid, app] : apps_)
      if (app.package == name) dead.push_back(pid);
    for (int pid : dead) {
      kernel_.kill_process(pid);
      irm_.drop_process(pid);
      apps_.erase(pid);
      Bundle kf;
      kf.put_int("pid", pid);
      trace_.record("process_killed", false, std::move(kf));
    }
    kernel_.remove_file("/data/" + name);
    framework_.notify_package_event(PackageEventKind::removed, pkg);
    Bundle f;
    f.put_text("package", name);
    trace_.record("package_removed", true, std::move(f));
  }

  const PackageInfo* installed(const std::string& name) const {
    auto it = installed_.find(name);
    return it == installed_.end() ? nullptr : &it->second;
  }

  // List-filter hook: a module may hide packages from the caller.
  EditResult get_installed_packages(const Credentials& caller) {
    ValueList list;
    for (const auto& name : install_order_) list.push_back(installed_.at(name).to_bundle());
    Bundle args;
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    EditResult r =
        framework_.dispatch_edit("pms.getInstalledPackages", caller, args, Value(std::move(list)));
    if (!r.denied()) {
      Bundle f;
      f.put_int("count", static_cast<std::int64_t>(r.value->as_list().size()));
      trace_.record("packages_listed", true, std::move(f));
    }
    return r;
  }

  // ---- process / app lifecycle ----

  // Spawns the app's process through the kernel spawn hooks; if the module's
  // instrumentApp answer names a monitor, its bootstrap runs inside the new
  // process before any app logic.
  SimApp launch_app_process(const std::string& name, const Credentials& caller) {
    const PackageInfo* pkg = installed(name);
    if (!pkg) throw Error(Errc::unknown_package, name);
    Bundle args;
    args.put_text("package", name);
    EditResult inst = framework_.dispatch_edit("generic.instrumentApp", caller, args, Value(""));
    if (inst.denied()) throw Error(Errc::spawn_denied, "instrumentApp: " + inst.deny_reason);
    std::string monitor = inst.value->as_text();

    kmac::ProcessRecord& proc =
        kernel_.spawn_process(zygote_credentials(), {pkg->uid, name, {}});
    register_app_methods(proc.pid);
    if (!monitor.empty()) {
      try {
        irm_.bootstrap_monitor(proc.pid, monitor);
      } catch (...) {
        // A partially instrumented app must not run.
        kernel_.kill_process(proc.pid);
        irm_.drop_process(proc.pid);
        throw;
      }
    }
    SimApp app;
    app.package = name;
    app.pid = proc.pid;
    app.uid = pkg->uid;
    for (const auto& action : pkg->receiver_actions()) app.registered_receivers.insert(action);
    apps_[proc.pid] = app;
    Bundle f;
    f.put_text("package", name);
    f.put_int("pid", proc.pid);
    trace_.record("app_started", true, std::move(f));
    irm_.invoke(proc.pid, "app.Main->entry()", {});
    return app;
  }

  const SimApp* app_by_pid(int pid) const {
    auto it = apps_.find(pid);
    return it == apps_.end() ? nullptr : &it->second;
  }

  std::optional<SimApp> running_app(const std::string& package) const {
    for (const auto& [pid, app] : apps_)
      if (app.package == package && kernel_.process_alive(pid)) return app;
    return std::nullopt;
  }

  // ---- broadcast bus ----

  DeliveryReport send_broadcast(int sender_pid, const Intent& intent) {
    Credentials caller = app_credentials(sender_pid);
    DeliveryReport report;
    for (const auto& [pid, app] : apps_) {
      if (!kernel_.process_alive(pid)) continue;
      if (app.registered_receivers.count(intent.action) == 0) continue;
      // Stock permission gate first: a sender-required permission must be
      // held by the receiver (or the uids must match).
      if (intent.required_permission) {
        PermissionResult pr = check_component_permission(
            *intent.required_permission, {app.uid, pid, app.package}, caller.uid, true);
        if (!pr.granted) {
          report.suppressed.push_back({app.package, pid, "permission:" + *intent.required_permission});
          continue;
        }
      }
      Bundle args;
      args.put_text("action", intent.action);
      args.put_text("target_component", intent.target_component.value_or(intent.action));
      args.put_text("required_permission", intent.required_permission.value_or(""));
      args.put_int("target_uid", app.uid);
      args.put_int("target_pid", pid);
      args.put_text("caller_package", caller.package.value_or(""));
      args.put_int("calling_uid", caller.uid);
      args.put_int("calling_pid", caller.pid);
      args.put_bundle("extras", intent.extras);
      PolicyDecision d =
          framework_.dispatch_truncation("broadcast.deliverToRegisteredReceiver", caller, args);
      if (d.is_allow()) {
        report.delivered.push_back({app.package, pid, ""});
        Bundle f;
        f.put_text("action", intent.action);
        f.put_text("from", caller.package.value_or(""));
        f.put_text("to", app.package);
        f.put_int("to_pid", pid);
        trace_.record("broadcast_delivered", true, std::move(f));
      } else {
        report.suppressed.push_back({app.package, pid, d.reason()});
      }
    }
    return report;
  }

  // ---- activity manager ----

  ActionResult start_activity(int caller_pid, const Intent& intent) {
    Credentials caller = app_credentials(caller_pid);
    const auto [owner, comp] = find_component(intent, ComponentKind::activity);
    Bundle args;
    args.put_text("action", intent.action);
    args.put_text("target_component", comp);
    args.put_text("target_package", owner->name);
    args.put_int("target_uid", owner->uid);
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    PolicyDecision d = framework_.dispatch_truncation("ams.startActivity", caller, args);
    if (d.is_deny()) return {false, d.reason()};
    Bundle f;
    f.put_text("component", comp);
    f.put_text("by", caller.package.value_or(""));
    trace_.record("activity_started", true, std::move(f));
    return {true, ""};
  }

  ActionResult bind_service(int caller_pid, const Intent& intent) {
    Credentials caller = app_credentials(caller_pid);
    const auto [owner, comp] = find_component(intent, ComponentKind::service);
    Bundle args;
    args.put_text("action", intent.action);
    args.put_text("target_component", comp);
    args.put_text("target_package", owner->name);
    args.put_int("target_uid", owner->uid);
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    PolicyDecision d = framework_.dispatch_truncation("ams.bindService", caller, args);
    if (d.is_deny()) return {false, d.reason()};
    Bundle f;
    f.put_text("component", comp);
    f.put_text("by", caller.package.value_or(""));
    f.put_text("owner", owner->name);
    trace_.record("service_bound", true, std::move(f));
    return {true, ""};
  }

  // Stock decision: granted iff the caller's uid holds the permission or owns
  // the component. The module's answer, when it edits, is authoritative.
  PermissionResult check_component_permission(const std::string& permission,
                                              const Credentials& caller, int owner_uid,
                                              bool exported) {
    bool stock = caller.uid == owner_uid || uid_holds_permission(caller.uid, permission);
    Bundle args;
    args.put_text("permission", permission);
    args.put_int("owner_uid", owner_uid);
    args.put_bool("exported", exported);
    args.put_bool("stock", stock);
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    EditResult r =
        framework_.dispatch_edit("ams.checkComponentPermission", caller, args, Value(stock));
    if (r.denied()) return {false, r.deny_reason};
    return {r.value->as_bool(), ""};
  }

  bool uid_holds_permission(int uid, const std::string& permission) const {
    for (const auto& [name, pkg] : installed_)
      if (pkg.uid == uid && pkg.requested_permissions.count(permission)) return true;
    return false;
  }

  // ---- location service ----

  EditResult get_last_location(const Credentials& caller) {
    if (!current_fix_) throw Error(Errc::no_current_fix, "no location fix reported yet");
    Bundle args;
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    EditResult r =
        framework_.dispatch_edit("location.getLastLocation", caller, args, current_fix_->to_value());
    if (!r.denied()) {
      LocationFix f = LocationFix::from_value(*r.value);
      Bundle tf;
      tf.put_real("lat", f.latitude);
      tf.put_real("lon", f.longitude);
      trace_.record("location_read", true, std::move(tf));
    }
    return r;
  }

  EditResult get_all_providers(const Credentials& caller) {
    ValueList list;
    for (const auto& p : providers_) list.push_back(Value(p));
    Bundle args;
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    EditResult r =
        framework_.dispatch_edit("location.getAllProviders", caller, args, Value(std::move(list)));
    if (!r.denied()) {
      Bundle f;
      f.put_int("count", static_cast<std::int64_t>(r.value->as_list().size()));
      trace_.record("providers_listed", true, std::move(f));
    }
    return r;
  }

  // Edit hook may adjust the fix before it becomes the service's current fix;
  // context modules treat this as their location-update feed.
  EditResult report_location(LocationFix fix, const Credentials& caller) {
    if (!fix.valid()) throw Error(Errc::malformed_args, "location fix out of range");
    if (fix.timestamp == 0) fix.timestamp = ++location_tick_;
    Bundle args;
    args.put_bool("passive", false);
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    EditResult r =
        framework_.dispatch_edit("location.reportLocation", caller, args, fix.to_value());
    if (!r.denied()) {
      current_fix_ = LocationFix::from_value(*r.value);
      Bundle f;
      f.put_real("lat", current_fix_->latitude);
      f.put_real("lon", current_fix_->longitude);
      trace_.record("location_reported", true, std::move(f));
    }
    return r;
  }

  // ---- content stores ----

  // Pre-hook gates the query, post-hook may filter or replace the result.
  EditResult query_content(const Credentials& caller, const std::string& store,
                           const Bundle& selection) {
    auto it = stores_.find(store);
    if (it == stores_.end()) throw Error(Errc::unknown_store, store);
    Bundle args;
    args.put_text("store", store);
    args.put_bundle("selection", selection);
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    PolicyDecision pre = framework_.dispatch_truncation("cp.preQuery", caller, args);
    if (pre.is_deny()) return EditResult::deny(pre.reason());
    ResultSet rs = apply_selection(it->second, selection);
    EditResult r = framework_.dispatch_edit("cp.postQuery", caller, args, rs.to_value());
    if (!r.denied()) {
      Bundle f;
      f.put_text("store", store);
      f.put_int("rows", static_cast<std::int64_t>(ResultSet::from_value(*r.value).rows.size()));
      trace_.record("content_query", true, std::move(f));
    }
    return r;
  }

  // ---- device info ----

  EditResult get_device_id(const Credentials& caller) {
    Bundle args;
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    EditResult r =
        framework_.dispatch_edit("phonesubinfo.getDeviceId", caller, args, Value(device_id_));
    if (!r.denied()) {
      Bundle f;
      f.put_text("id", r.value->as_text());
      trace_.record("device_id_read", true, std::move(f));
    }
    return r;
  }

  // ---- clipboard ----

  EditResult get_primary_clip(const Credentials& caller) {
    Bundle args;
    args.put_int("clip_uid", clip_uid_);
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    EditResult r = framework_.dispatch_edit("clip.getPrimaryClip", caller, args, Value(clip_text_));
    if (!r.denied()) {
      Bundle f;
      f.put_text("clip", r.value->as_text());
      trace_.record("clip_read", true, std::move(f));
    }
    return r;
  }

  ActionResult set_primary_clip(const Credentials& caller, const std::string& text) {
    Bundle args;
    args.put_text("clip", text);
    args.put_int("uid", caller.uid);
    args.put_int("pid", caller.pid);
    PolicyDecision d = framework_.dispatch_truncation("clip.setPrimaryClip", caller, args);
    if (d.is_deny()) return {false, d.reason()};
    clip_text_ = text;
    clip_uid_ = caller.uid;
    Bundle f;
    f.put_text("clip", text);
    trace_.record("clip_set", true, std::move(f));
    return {true, ""};
  }

  // ---- module channel ----

  Bundle call_module(const Bundle& request, const Credentials& caller = shell_credentials()) {
    return framework_.call_module(request, caller);
  }

 private:
  void register_app_methods(int pid) {
    std::string device_id = device_id_;
    irm_.register_method(pid, "app.Main->entry()", [](std::vector<Value>&) { return Value(0); });
    irm_.register_method(pid, "net.Url->open(t)", [](std::vector<Value>& args) {
      return Value("opened:" + args[0].as_text());
    });
    irm_.register_method(pid, "device.Api->getDeviceId()", [device_id](std::vector<Value>&) {
      return Value(device_id);
    });
  }

  void register_builtin_monitors() {
    irm::IrmRuntime* rt = &irm_;
    // Rewrites plain-http URLs before letting the original through.
    irm_.monitors().register_monitor("monitor.https_upgrade", [rt](irm::IrmRuntime& r, int pid) {
      auto handle = std::make_shared<irm::MethodHandle>();
      r.register_method(pid, "monitor.Https->open(t)", [rt, handle](std::vector<Value>& args) {
        std::string url = args[0].as_text();
        if (url.rfind("http://", 0) == 0) url = "https://" + url.substr(7);
        return rt->call_original(*handle, {Value(url)});
      });
      *handle = r.redirect_method(pid, "net.Url->open(t)", "monitor.Https->open(t)");
    });
    // Hard-deny policy: the hooked method raises instead of answering.
    irm_.monitors().register_monitor("monitor.deny_device_id", [](irm::IrmRuntime& r, int pid) {
      r.register_method(pid, "monitor.Deny->getDeviceId()", [](std::vector<Value>&) -> Value {
        throw Error(Errc::monitor_denied, "device id blocked in-process");
      });
      r.redirect_method(pid, "device.Api->getDeviceId()", "monitor.Deny->getDeviceId()");
    });
  }

  std::pair<const PackageInfo*, std::string> find_component(const Intent& intent,
                                                            ComponentKind kind) {
    if (!intent.target_component)
      throw Error(Errc::unknown_component, "intent has no target component");
    for (const auto& name : install_order_) {
      const PackageInfo& pkg = installed_.at(name);
      if (pkg.find_component(*intent.target_component, kind))
        return {&pkg, *intent.target_component};
    }
    throw Error(Errc::unknown_component, *intent.target_component);
  }

  static ResultSet apply_selection(const ResultSet& base, const Bundle& selection) {
    if (selection.empty()) return base;
    ResultSet out;
    out.columns = base.columns;
    for (const auto& row : base.rows) {
      bool match = true;
      for (const auto& [key, want] : selection.entries()) {
        bool found = false;
        for (std::size_t i = 0; i < base.columns.size(); ++i) {
          if (base.columns[i] == key) {
            found = row[i] == want;
            break;
          }
        }
        if (!found) {
          match = false;
          break;
        }
      }
      if (match) out.rows.push_back(row);
    }
    return out;
  }

  TraceRecorder trace_;
  kmac::Kernel kernel_;
  Framework framework_;
  irm::IrmRuntime irm_;

  int zygote_pid_ = -1;
  int system_pid_ = -1;

  std::string device_id_;
  std::vector<std::string> providers_;
  std::map<std::string, ResultSet> stores_;
  std::optional<LocationFix> current_fix_;
  std::int64_t location_tick_ = 0;
  std::string clip_text_;
  int clip_uid_ = -1;

  std::map<std::string, PackageInfo> installed_;
  std::vector<std::string> install_order_;
  int next_app_uid_ = 10000;  // monotonic; preserved across replacement
  std::map<int, SimApp> apps_;
};

}  // namespace monitord::sim
