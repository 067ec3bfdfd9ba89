#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>

#include "monitord/decision.hpp"
#include "monitord/errors.hpp"
#include "monitord/hooks.hpp"
#include "monitord/log.hpp"
#include "monitord/module_api.hpp"
#include "monitord/modules/catalog.hpp"
#include "monitord/trace.hpp"

namespace monitord {

enum class ModuleState { loaded, initialized, shut_down };

inline const char* module_state_name(ModuleState s) {
  switch (s) {
    case ModuleState::loaded: return "loaded";
    case ModuleState::initialized: return "initialized";
    case ModuleState::shut_down: return "shut_down";
  }
  return "?";
}

// A loaded security module plus its lifecycle state and per-declared-hook
// invocation counters.
class ModuleHandle {
 public:
  ModuleHandle(ModuleManifest manifest, std::unique_ptr<SecurityModule> impl)
      : manifest_(std::move(manifest)), impl_(std::move(impl)) {
    for (const auto& h : manifest_.declared_hooks) stats_.emplace(h, 0);
  }

  const ModuleManifest& manifest() const { return manifest_; }
  ModuleState state() const { return state_; }
  SecurityModule& impl() { return *impl_; }

  bool declares(const std::string& hook_id) const { return stats_.count(hook_id) != 0; }

  std::map<std::string, std::uint64_t> stats() const {
    std::lock_guard<std::mutex> lk(stats_mu_);
    return stats_;
  }

  std::uint64_t hook_count(const std::string& hook_id) const {
    std::lock_guard<std::mutex> lk(stats_mu_);
    auto it = stats_.find(hook_id);
    return it == stats_.end() ? 0 : it->second;
  }

 private:
  friend class Framework;

  void bump(const std::string& hook_id) {
    std::lock_guard<std::mutex> lk(stats_mu_);
    auto it = stats_.find(hook_id);
    if (it != stats_.end()) ++it->second;
  }

  ModuleManifest manifest_;
  std::unique_ptr<SecurityModule> impl_;
  ModuleState state_ = ModuleState::loaded;
  mutable std::mutex stats_mu_;
  std::map<std::string, std::uint64_t> stats_;
  std::mutex serial_mu_;  // held around every module entry when serialized
};

// Hook registry, module lifecycle, and decision dispatch. One module slot;
// stacking happens inside a composition module, and swapping modules after
// boot requires the reload feature flag.
class Framework {
 public:
  explicit Framework(TraceRecorder* trace = nullptr,
                     policy::ModuleCatalog* catalog = nullptr)
      : trace_(trace), catalog_(catalog ? catalog : &policy::catalog()) {}

  HookRegistry& hooks() { return registry_; }
  const HookRegistry& hooks() const { return registry_; }

  void set_callbacks(FrameworkCallbacks* callbacks) { callbacks_ = callbacks; }

  void set_hooks_enabled(bool flag) { hooks_enabled_ = flag; }
  bool hooks_enabled() const { return hooks_enabled_; }

  void set_reload_enabled(bool flag) { reload_enabled_ = flag; }

  ModuleHandle* module() {
    std::shared_lock lk(module_mu_);
    return module_.get();
  }

  // Resolves the manifest entry point against the catalog and validates the
  // declared hook set. The module starts in state `loaded`; enforcement
  // defaults to allow until init succeeds.
  ModuleHandle& load_module(const ModuleManifest& manifest) {
    std::unique_lock lk(module_mu_);
    if (module_ && module_->state() != ModuleState::shut_down)
      throw Error(Errc::wrong_state, "a module is already loaded; use reload");
    return load_locked(manifest);
  }

  bool init_module(ModuleHandle& handle, FrameworkCallbacks& callbacks) {
    if (handle.state_ != ModuleState::loaded)
      throw Error(Errc::wrong_state, std::string("init from state ") + module_state_name(handle.state_));
    bool ok = false;
    try {
      ok = handle.impl().init(callbacks);
    } catch (const std::exception& e) {
      log_info(std::string("module init fault: ") + e.what());
      ok = false;
    }
    if (ok) handle.state_ = ModuleState::initialized;
    return ok;
  }

  void shutdown_module(ModuleHandle& handle) {
    if (handle.state_ != ModuleState::initialized)
      throw Error(Errc::wrong_state,
                  std::string("shutdown from state ") + module_state_name(handle.state_));
    try {
      handle.impl().shutdown();
    } catch (const std::exception& e) {
      log_info(std::string("module shutdown fault: ") + e.what());
    }
    handle.state_ = ModuleState::shut_down;
  }

  // Development feature, off by default. The swap is atomic with respect to
  // dispatch: a dispatch sees either the old (shut down, hence bypassed) or
  // the fully loaded new module.
  ModuleHandle& reload_module(const ModuleManifest& manifest) {
    if (!reload_enabled_) throw Error(Errc::feature_disabled, "module reload is disabled");
    std::unique_lock lk(module_mu_);
    if (module_ && module_->state() != ModuleState::shut_down)
      throw Error(Errc::wrong_state, "previous module must be shut down before reload");
    return load_locked(manifest);
  }

  // Truncation dispatch: boolean-truncation and error-truncation hooks.
  PolicyDecision dispatch_truncation(const std::string& hook_id, const Credentials& caller,
                                     const Bundle& args) {
    const HookDescriptor& hook = registry_.require(hook_id);
    if (!is_truncation_category(hook.category))
      throw Error(Errc::category_mismatch, hook_id + " is " + category_name(hook.category));
    PolicyDecision d = evaluate(hook, caller, args, nullptr);
    if (d.is_edit()) d = PolicyDecision::deny("module-fault:edit-on-truncation");
    record_dispatch(hook_id, d.describe());
    return d;
  }

  // Edit dispatch: edit-return and list-filter hooks. Allow passes the
  // candidate through unchanged; Edit payloads are schema-validated before
  // release to the caller.
  EditResult dispatch_edit(const std::string& hook_id, const Credentials& caller,
                           const Bundle& args, const Value& candidate) {
    const HookDescriptor& hook = registry_.require(hook_id);
    if (!is_edit_category(hook.category))
      throw Error(Errc::category_mismatch, hook_id + " is " + category_name(hook.category));
    PolicyDecision d = evaluate(hook, caller, args, &candidate);
    EditResult result = EditResult::of(candidate);
    if (d.is_deny()) {
      result = EditResult::deny(d.reason());
    } else if (d.is_edit()) {
      if (!conforms(hook.return_type, d.replacement())) {
        result = EditResult::deny("module-fault:schema");
      } else {
        result = EditResult::of(d.replacement());
      }
    }
    record_dispatch(hook_id, result.denied() ? "deny(" + result.deny_reason + ")"
                                             : (d.is_edit() ? "edit" : "allow"));
    return result;
  }

  // Synchronous package-event delivery: the module's event function has
  // returned before this returns. Module faults are logged, never propagated.
  void notify_package_event(PackageEventKind kind, const PackageInfo& pkg) {
    std::shared_lock lk(module_mu_);
    ModuleHandle* m = module_.get();
    if (!m || m->state() != ModuleState::initialized) return;
    {
      auto serial = serialize_entry(*m);
      try {
        m->impl().on_package_event(kind, pkg);
      } catch (const std::exception& e) {
        log_info(std::string("module event fault: ") + e.what());
      }
    }
    const char* hook_id = kind == PackageEventKind::installed  ? "event.packageInstalled"
                          : kind == PackageEventKind::replaced ? "event.packageReplaced"
                                                               : "event.packageRemoved";
    m->bump(hook_id);
    if (trace_) {
      Bundle f;
      f.put_text("event", package_event_name(kind));
      f.put_text("package", pkg.name);
      trace_->record("module_event_delivered", false, std::move(f));
    }
  }

  // Bundle channel between front-ends and the module. The framework imposes
  // no schema; caller authorization is the module's own job.
  Bundle call_module(const Bundle& request, const Credentials& caller = shell_credentials()) {
    std::shared_lock lk(module_mu_);
    ModuleHandle* m = module_.get();
    if (!m || m->state() != ModuleState::initialized)
      throw Error(Errc::no_module_loaded, "call_module needs an initialized module");
    auto serial = serialize_entry(*m);
    return m->impl().call_module(request, caller);
  }

  std::string resolve_package_for_pid(int pid) const {
    if (callbacks_) {
      auto p = callbacks_->package_for_pid(pid);
      if (p) return *p;
    }
    throw Error(Errc::unknown_pid, std::to_string(pid));
  }

 private:
  ModuleHandle& load_locked(const ModuleManifest& manifest) {
    for (const auto& h : manifest.declared_hooks) {
      if (!registry_.has(h)) throw Error(Errc::unknown_declared_hook, h);
    }
    if (!catalog_->resolvable(manifest.entry_point))
      throw Error(Errc::unresolvable_entry_point, manifest.entry_point);
    auto impl = catalog_->instantiate(manifest.entry_point, manifest.config);
    module_ = std::make_unique<ModuleHandle>(manifest, std::move(impl));
    return *module_;
  }

  std::unique_lock<std::mutex> serialize_entry(ModuleHandle& m) {
    if (m.manifest().dispatch_mode == DispatchMode::serialized)
      return std::unique_lock<std::mutex>(m.serial_mu_);
    return {};
  }

  PolicyDecision evaluate(const HookDescriptor& hook, const Credentials& caller,
                          const Bundle& args, const Value* candidate) {
    if (!hooks_enabled_) return PolicyDecision::allow();
    std::shared_lock lk(module_mu_);
    ModuleHandle* m = module_.get();
    if (!m || m->state() != ModuleState::initialized) return PolicyDecision::allow();
    // Undeclared hooks route to the default-allow base without entering the
    // module; counters exist only for declared hooks.
    if (!m->declares(hook.id)) return PolicyDecision::allow();
    m->bump(hook.id);
    auto serial = serialize_entry(*m);
    try {
      return m->impl().enforce(HookContext{hook, caller, args, candidate});
    } catch (const std::exception& e) {
      // Fail closed: an enforcement fault never falls through to allow.
      return PolicyDecision::deny(std::string("module-fault:") + e.what());
    }
  }

  void record_dispatch(const std::string& hook_id, const std::string& decision) {
    log_trace("dispatch " + hook_id + " -> " + decision);
    if (!trace_) return;
    Bundle f;
    f.put_text("hook", hook_id);
    f.put_text("decision", decision);
    trace_->record("hook_dispatch", false, std::move(f));
  }

  HookRegistry registry_;
  TraceRecorder* trace_ = nullptr;
  policy::ModuleCatalog* catalog_ = nullptr;
  FrameworkCallbacks* callbacks_ = nullptr;
  std::atomic<bool> hooks_enabled_{true};
  bool reload_enabled_ = false;
  mutable std::shared_mutex module_mu_;
  std::unique_ptr<ModuleHandle> module_;
};

}  // namespace monitord
