#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "monitord/bundle.hpp"
#include "monitord/errors.hpp"
#include "monitord/trace.hpp"

namespace monitord::irm {

// Parsed "owner->name(argkinds)" descriptor. Kinds: i=integer, f=real,
// b=boolean, t=text, v=any.
struct MethodRef {
  std::string owner;
  std::string name;
  std::vector<char> arg_kinds;

  static MethodRef parse(const std::string& descriptor) {
    auto arrow = descriptor.find("->");
    auto open = descriptor.find('(', arrow == std::string::npos ? 0 : arrow);
    if (arrow == std::string::npos || open == std::string::npos || descriptor.back() != ')')
      throw Error(Errc::parse_error, "method descriptor must be owner->name(kinds): " + descriptor);
    MethodRef ref;
    ref.owner = descriptor.substr(0, arrow);
    ref.name = descriptor.substr(arrow + 2, open - arrow - 2);
    if (ref.owner.empty() || ref.name.empty())
      throw Error(Errc::parse_error, "owner and name must be non-empty: " + descriptor);
    std::string kinds = descriptor.substr(open + 1, descriptor.size() - open - 2);
    std::size_t pos = 0;
    while (pos < kinds.size()) {
      auto comma = kinds.find(',', pos);
      std::string k = kinds.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (k.size() != 1 || std::string("ifbtv").find(k[0]) == std::string::npos)
        throw Error(Errc::parse_error, "bad argument kind '" + k + "' in " + descriptor);
      ref.arg_kinds.push_back(k[0]);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return ref;
  }

  std::string canonical() const {
    std::string s = owner + "->" + name + "(";
    for (std::size_t i = 0; i < arg_kinds.size(); ++i) {
      if (i) s.push_back(',');
      s.push_back(arg_kinds[i]);
    }
    s.push_back(')');
    return s;
  }
};

using MethodFn = std::function<Value(std::vector<Value>&)>;

// Opaque token binding (process, redirected method, saved previous target).
// Valid only within its owning process's table.
struct MethodHandle {
  int pid = -1;
  int record_id = -1;
};

class IrmRuntime;

// Monitors are registered bootstrap routines; a middleware module names one
// via the instrumentApp hook and the runtime executes it inside the fresh
// process before any app logic runs.
class MonitorCatalog {
 public:
  using Bootstrap = std::function<void(IrmRuntime&, int pid)>;

  void register_monitor(const std::string& id, Bootstrap fn) { monitors_[id] = std::move(fn); }

  bool has(const std::string& id) const { return monitors_.count(id) != 0; }

  const Bootstrap& require(const std::string& id) const {
    auto it = monitors_.find(id);
    if (it == monitors_.end()) throw Error(Errc::unknown_monitor, id);
    return it->second;
  }

 private:
  std::map<std::string, Bootstrap> monitors_;
};

// Per-process dispatch tables through which simulated app code calls API
// functions. Redirections in one process never leak into another.
class IrmRuntime {
 public:
  explicit IrmRuntime(TraceRecorder* trace = nullptr) : trace_(trace) {}

  MonitorCatalog& monitors() { return monitors_; }

  void register_method(int pid, const std::string& descriptor, MethodFn fn) {
    MethodRef ref = MethodRef::parse(descriptor);
    std::lock_guard<std::mutex> lk(mu_);
    ProcessTable& table = tables_[pid];
    std::string key = ref.canonical();
    table.methods[key] = Entry{ref, std::move(fn)};
    record("irm_register", pid, key);
  }

  bool has_method(int pid, const std::string& descriptor) const {
    std::string key = MethodRef::parse(descriptor).canonical();
    std::lock_guard<std::mutex> lk(mu_);
    auto t = tables_.find(pid);
    return t != tables_.end() && t->second.methods.count(key) != 0;
  }

  // Divert `from` to `to`'s current target. The returned handle captures the
  // target `from` had just before this redirect, so chained redirects unwind
  // in LIFO order through call_original.
  MethodHandle redirect_method(int pid, const std::string& from_desc, const std::string& to_desc) {
    std::string from = MethodRef::parse(from_desc).canonical();
    std::string to = MethodRef::parse(to_desc).canonical();
    std::lock_guard<std::mutex> lk(mu_);
    ProcessTable& table = table_ref(pid, from);
    Entry& target = method_ref(table, from, Errc::unknown_method);
    auto to_it = table.methods.find(to);
    if (to_it == table.methods.end()) throw Error(Errc::unresolvable_target, to_desc);
    table.redirects.push_back(Redirect{next_record_++, from, target.fn, true});
    target.fn = to_it->second.fn;
    record("irm_redirect", pid, from + " => " + to);
    return MethodHandle{pid, table.redirects.back().id};
  }

  Value invoke(int pid, const std::string& descriptor, std::vector<Value> args) {
    std::string key = MethodRef::parse(descriptor).canonical();
    MethodFn fn;
    {
      std::lock_guard<std::mutex> lk(mu_);
      ProcessTable& table = table_ref(pid, key);
      Entry& entry = method_ref(table, key, Errc::unknown_method);
      check_args(entry.ref, args);
      fn = entry.fn;
      record("irm_invoke", pid, key);
    }
    return fn(args);
  }

  // Execute the target saved by the handle's own redirect, exactly as it
  // behaved before that redirect.
  Value call_original(const MethodHandle& handle, std::vector<Value> args) {
    MethodFn fn;
    {
      std::lock_guard<std::mutex> lk(mu_);
      Redirect& r = redirect_ref(handle);
      ProcessTable& table = tables_[handle.pid];
      Entry& entry = method_ref(table, r.from, Errc::unknown_method);
      check_args(entry.ref, args);
      fn = r.saved;
      record("irm_call_original", handle.pid, r.from);
    }
    return fn(args);
  }

  // Restore the table entry to the handle's saved target; the handle becomes
  // stale.
  void remove_redirect(const MethodHandle& handle) {
    std::lock_guard<std::mutex> lk(mu_);
    Redirect& r = redirect_ref(handle);
    ProcessTable& table = tables_[handle.pid];
    Entry& entry = method_ref(table, r.from, Errc::unknown_method);
    entry.fn = r.saved;
    r.valid = false;
    record("irm_remove", handle.pid, r.from);
  }

  // Runs the named monitor's setup inside the process. A bootstrap fault
  // propagates so the caller can abort the process start.
  void bootstrap_monitor(int pid, const std::string& monitor_id) {
    const MonitorCatalog::Bootstrap& fn = monitors_.require(monitor_id);
    record_unlocked("irm_bootstrap_begin", pid, monitor_id);
    fn(*this, pid);
    record_unlocked("irm_bootstrap_end", pid, monitor_id);
  }

  void drop_process(int pid) {
    std::lock_guard<std::mutex> lk(mu_);
    tables_.erase(pid);
  }

 private:
  struct Entry {
    MethodRef ref;
    MethodFn fn;
  };

  struct Redirect {
    int id;
    std::string from;
    MethodFn saved;
    bool valid;
  };

  struct ProcessTable {
    std::map<std::string, Entry> methods;
    std::vector<Redirect> redirects;
  };

  ProcessTable& table_ref(int pid, const std::string& key) {
    auto it = tables_.find(pid);
    if (it == tables_.end()) throw Error(Errc::unknown_method, key + " (no table for process)");
    return it->second;
  }

  static Entry& method_ref(ProcessTable& table, const std::string& key, Errc missing) {
    auto it = table.methods.find(key);
    if (it == table.methods.end()) throw Error(missing, key);
    return it->second;
  }

  Redirect& redirect_ref(const MethodHandle& handle) {
    auto t = tables_.find(handle.pid);
    if (t == tables_.end()) throw Error(Errc::stale_handle, "process table gone");
    for (auto& r : t->second.redirects) {
      if (r.id == handle.record_id) {
        if (!r.valid) throw Error(Errc::stale_handle, r.from);
        return r;
      }
    }
    throw Error(Errc::stale_handle, "unknown redirect record");
  }

  static void check_args(const MethodRef& ref, const std::vector<Value>& args) {
    if (args.size() != ref.arg_kinds.size())
      throw Error(Errc::argument_error,
                  ref.canonical() + " expects " + std::to_string(ref.arg_kinds.size()) + " args");
    for (std::size_t i = 0; i < args.size(); ++i) {
      bool ok = true;
      switch (ref.arg_kinds[i]) {
        case 'i': ok = args[i].is_int(); break;
        case 'f': ok = args[i].is_real() || args[i].is_int(); break;
        case 'b': ok = args[i].is_bool(); break;
        case 't': ok = args[i].is_text(); break;
        case 'v': ok = true; break;
      }
      if (!ok)
        throw Error(Errc::argument_error, ref.canonical() + " arg " + std::to_string(i) +
                                              " kind mismatch");
    }
  }

  void record(const std::string& kind, int pid, const std::string& what) {
    if (!trace_) return;
    Bundle f;
    f.put_int("pid", pid);
    f.put_text("method", what);
    trace_->record(kind, false, std::move(f));
  }

  void record_unlocked(const std::string& kind, int pid, const std::string& what) {
    record(kind, pid, what);
  }

  mutable std::mutex mu_;
  std::map<int, ProcessTable> tables_;
  int next_record_ = 1;
  TraceRecorder* trace_ = nullptr;
  MonitorCatalog monitors_;
};

}  // namespace monitord::irm
