#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/bundle.hpp"
#include "monitord/decision.hpp"
#include "monitord/errors.hpp"
#include "monitord/log.hpp"

namespace monitord::kmac {

// Structured kernel-level security context carried as a Bundle. The
// reference kernel module keys on the "te.type" attribute.
struct SecurityLabel {
  Bundle attrs;

  bool empty() const { return attrs.empty(); }

  std::string type() const { return attrs.get_text("te.type").value_or(""); }

  static SecurityLabel of_type(const std::string& te_type) {
    SecurityLabel l;
    l.attrs.put_text("te.type", te_type);
    return l;
  }

  friend bool operator==(const SecurityLabel& a, const SecurityLabel& b) {
    return a.attrs == b.attrs;
  }
  friend bool operator!=(const SecurityLabel& a, const SecurityLabel& b) { return !(a == b); }
};

enum class ObjectKind { file, connection, process };

inline const char* object_kind_name(ObjectKind k) {
  switch (k) {
    case ObjectKind::file: return "file";
    case ObjectKind::connection: return "connection";
    case ObjectKind::process: return "process";
  }
  return "?";
}

struct KernelObject {
  ObjectKind kind;
  std::string id;
  SecurityLabel label;
};

struct ProcessRecord {
  int pid = 0;
  int uid = 0;
  std::string package;
  SecurityLabel label;
  int parent_pid = 0;
  bool alive = true;
};

struct KernelRule {
  std::string subject;
  std::string object;
  std::string object_class;
  std::string op;

  friend auto operator<=>(const KernelRule&, const KernelRule&) = default;
};

class KernelRuleSet {
 public:
  void add(KernelRule r) { rules_.insert(std::move(r)); }

  bool allows(const std::string& subject, const std::string& object,
              const std::string& object_class, const std::string& op) const {
    return rules_.count({subject, object, object_class, op}) != 0;
  }

  std::size_t size() const { return rules_.size(); }

 private:
  std::set<KernelRule> rules_;
};

// Would-deny record emitted in permissive mode.
struct AuditRecord {
  std::string subject;
  std::string object;
  std::string object_class;
  std::string op;

  friend auto operator<=>(const AuditRecord&, const AuditRecord&) = default;
};

class AuditLog {
 public:
  void append(AuditRecord r) {
    std::lock_guard<std::mutex> lk(mu_);
    records_.push_back(std::move(r));
  }

  std::vector<AuditRecord> drain() {
    std::lock_guard<std::mutex> lk(mu_);
    std::vector<AuditRecord> out;
    out.swap(records_);
    return out;
  }

  std::vector<AuditRecord> snapshot() const {
    std::lock_guard<std::mutex> lk(mu_);
    return records_;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return records_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<AuditRecord> records_;
};

enum class SpawnHook { uid_policy, label_policy };

inline const char* spawn_hook_name(SpawnHook h) {
  return h == SpawnHook::uid_policy ? "applyUidSecurityPolicy" : "applySecurityLabelPolicy";
}

// Kernel sub-module SPI behind the generic adapter. Only the type-enforcement
// reference module is built; the interface keeps other kernel-level models
// pluggable.
class KernelModule {
 public:
  virtual ~KernelModule() = default;
  virtual bool init() = 0;
  virtual bool check_access(const SecurityLabel& subject, const SecurityLabel& object,
                            const std::string& object_class, const std::string& op) const = 0;
  virtual bool is_enforcing() const = 0;
  virtual void set_enforcing(bool flag) = 0;
  virtual bool spawn_allowed(SpawnHook hook, const Credentials& peer,
                             const SecurityLabel& peer_label) const = 0;
  virtual SecurityLabel label_for_process(int uid, const std::string& package,
                                          const SecurityLabel& hint) const = 0;
  virtual SecurityLabel label_for_file(const std::string& path) const = 0;
  virtual bool management_privileged(const SecurityLabel& subject) const = 0;
  virtual Bundle get_config(const Bundle& args) const = 0;
  virtual void set_config(const Bundle& conf) = 0;
};

// Boot-time kernel policy file: enforcing flag, allow rules, label rules.
// Label rules match on path prefix, package name or uid; "*" is a wildcard.
struct KernelPolicy {
  bool enforcing = true;
  std::vector<KernelRule> rules;

  struct LabelRule {
    std::optional<std::string> path;
    std::optional<std::string> package;
    std::optional<int> uid;
    SecurityLabel label;
  };
  std::vector<LabelRule> labels;

  static KernelPolicy from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw Error(Errc::parse_error, "kernel policy must be a json object");
    KernelPolicy p;
    if (j.contains("enforcing")) p.enforcing = j["enforcing"].get<bool>();
    if (j.contains("rules")) {
      for (const auto& r : j["rules"]) {
        p.rules.push_back({r["subject"].get<std::string>(), r["object"].get<std::string>(),
                           r["class"].get<std::string>(), r["op"].get<std::string>()});
      }
    }
    if (j.contains("labels")) {
      for (const auto& l : j["labels"]) {
        LabelRule rule;
        if (l.contains("path")) rule.path = l["path"].get<std::string>();
        if (l.contains("package")) rule.package = l["package"].get<std::string>();
        if (l.contains("uid")) rule.uid = l["uid"].get<int>();
        rule.label.attrs = Bundle::from_plain_json(l["label"]);
        p.labels.push_back(std::move(rule));
      }
    }
    return p;
  }

  static KernelPolicy load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config_error, "cannot open kernel policy: " + path);
    try {
      return from_json(nlohmann::ordered_json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse_error, std::string("kernel policy: ") + e.what());
    }
  }
};

// Type-enforcement reference kernel module: allow rules over (subject type,
// object type, object class, operation), default deny, management privilege
// expressed as a (t, t, "kmac", "admin") rule on the caller's own type.
class RuleKernelModule : public KernelModule {
 public:
  explicit RuleKernelModule(KernelPolicy policy) : policy_(std::move(policy)) {
    for (const auto& r : policy_.rules) rules_.add(r);
    enforcing_ = policy_.enforcing;
  }

  bool init() override { return true; }

  bool check_access(const SecurityLabel& subject, const SecurityLabel& object,
                    const std::string& object_class, const std::string& op) const override {
    return rules_.allows(subject.type(), object.type(), object_class, op);
  }

  bool is_enforcing() const override { return enforcing_; }
  void set_enforcing(bool flag) override { enforcing_ = flag; }

  bool spawn_allowed(SpawnHook hook, const Credentials& peer,
                     const SecurityLabel& peer_label) const override {
    (void)peer;
    const char* op = hook == SpawnHook::uid_policy ? "specifyids" : "specifyseinfo";
    return rules_.allows(peer_label.type(), peer_label.type(), "zygote", op);
  }

  SecurityLabel label_for_process(int uid, const std::string& package,
                                  const SecurityLabel& hint) const override {
    for (const auto& rule : policy_.labels) {
      if (rule.package && (*rule.package == package || *rule.package == "*"))
        return rule.label;
      if (rule.uid && *rule.uid == uid) return rule.label;
    }
    if (!hint.empty()) return hint;
    return SecurityLabel::of_type("app_t");
  }

  SecurityLabel label_for_file(const std::string& path) const override {
    const KernelPolicy::LabelRule* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& rule : policy_.labels) {
      if (!rule.path) continue;
      if (*rule.path == "*") {
        if (!best) best = &rule;
        continue;
      }
      if (path == *rule.path ||
          (path.size() > rule.path->size() && path.compare(0, rule.path->size(), *rule.path) == 0 &&
           path[rule.path->size()] == '/')) {
        if (rule.path->size() >= best_len) {
          best = &rule;
          best_len = rule.path->size();
        }
      }
    }
    if (best) return best->label;
    return SecurityLabel::of_type("file_t");
  }

  bool management_privileged(const SecurityLabel& subject) const override {
    return rules_.allows(subject.type(), subject.type(), "kmac", "admin");
  }

  Bundle get_config(const Bundle& args) const override {
    Bundle out;
    if (auto name = args.get_text("bool")) {
      auto it = booleans_.find(*name);
      if (it == booleans_.end()) throw Error(Errc::unknown_key, *name);
      out.put_bool("value", it->second);
      return out;
    }
    Bundle all;
    for (const auto& [k, v] : booleans_) all.put_bool(k, v);
    out.put_bundle("booleans", std::move(all));
    return out;
  }

  void set_config(const Bundle& conf) override {
    auto name = conf.get_text("bool");
    auto value = conf.get_bool("value");
    if (!name || !value) throw Error(Errc::malformed_args, "set_config expects {bool, value}");
    booleans_[*name] = *value;
  }

 private:
  KernelPolicy policy_;
  KernelRuleSet rules_;
  bool enforcing_ = true;
  std::map<std::string, bool> booleans_;
};

struct SpawnRequest {
  int uid = 0;
  std::string package;
  SecurityLabel label_hint;
};

// Simulated kernel object layer plus the generic adapter through which
// user-space talks to the kernel policy. With no kernel module installed the
// adapter runs in pass-through mode: init reports false, every check allows
// and labels are empty.
class Kernel {
 public:
  Kernel() = default;

  void install_module(std::unique_ptr<KernelModule> module) { module_ = std::move(module); }

  void boot(const KernelPolicy& policy) {
    install_module(std::make_unique<RuleKernelModule>(policy));
  }

  bool has_module() const { return module_ != nullptr; }

  AuditLog& audit() { return audit_; }

  // ---- adapter surface ----

  // Available before any middleware module loads; false means no kernel
  // module is installed and every kernel check passes through.
  bool kmac_init() {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    if (!module_) return false;
    if (!initialized_) initialized_ = module_->init();
    return initialized_;
  }

  // args carry the quadruple: subject, object (labels as bundles), class, op.
  bool kmac_check_access(const Bundle& args) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    const Bundle* subject = args.get_bundle("subject");
    const Bundle* object = args.get_bundle("object");
    auto object_class = args.get_text("class");
    auto op = args.get_text("op");
    if (!subject || !object || !object_class || !op)
      throw Error(Errc::malformed_args, "check_access needs subject, object, class, op");
    if (!module_) return true;
    return check_with_audit({*subject}, {*object}, *object_class, *op);
  }

  SecurityLabel kmac_get_peer_context(int connection_id) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    auto it = connections_.find(connection_id);
    if (it == connections_.end() || !it->second.open)
      throw Error(Errc::unknown_connection, std::to_string(connection_id));
    if (!module_) return {};
    return process_ref(it->second.initiator_pid).label;
  }

  SecurityLabel kmac_get_context(const std::string& path) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    return file_ref(path).label;
  }

  bool kmac_set_context(const std::string& path, const SecurityLabel& label, int caller_pid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    KernelObject& obj = file_ref(path);
    if (!module_) return false;
    require_privilege(caller_pid);
    obj.label = label;
    return true;
  }

  // Reset an object's label to the policy-declared default for its path.
  bool kmac_restore_context(const std::string& path, int caller_pid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    KernelObject& obj = file_ref(path);
    if (!module_) return false;
    require_privilege(caller_pid);
    obj.label = module_->label_for_file(path);
    return true;
  }

  bool kmac_set_enforcing(bool flag, int caller_pid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    if (!module_) return false;
    require_privilege(caller_pid);
    module_->set_enforcing(flag);
    return true;
  }

  bool kmac_is_enforcing() const {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    return module_ ? module_->is_enforcing() : false;
  }

  SecurityLabel kmac_get_process_context(int pid) const {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    const ProcessRecord& p = process_ref(pid);
    if (!module_) return {};
    return p.label;
  }

  Bundle kmac_get_config(const Bundle& args) const {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    if (!module_) return {};
    return module_->get_config(args);
  }

  bool kmac_set_config(const Bundle& conf, int caller_pid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    if (!module_) return false;
    require_privilege(caller_pid);
    module_->set_config(conf);
    return true;
  }

  bool relabel_process(int pid, const SecurityLabel& label, int caller_pid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    ProcessRecord& p = process_mut(pid);
    if (!module_) return false;
    require_privilege(caller_pid);
    p.label = label;
    return true;
  }

  // ---- object layer ----

  // Boot-time processes (init/spawner analogues) bypass the spawn hooks.
  ProcessRecord& create_initial_process(const std::string& package, int uid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    int pid = next_pid_++;
    SecurityLabel label;
    if (module_) label = module_->label_for_process(uid, package, {});
    processes_[pid] = ProcessRecord{pid, uid, package, label, 0, true};
    return processes_[pid];
  }

  // Spawn-policy hooks are consulted in order (uid policy, then label
  // policy); all must allow.
  ProcessRecord& spawn_process(const Credentials& requestor, const SpawnRequest& request) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    const ProcessRecord& peer = process_ref(requestor.pid);
    if (module_) {
      for (SpawnHook hook : {SpawnHook::uid_policy, SpawnHook::label_policy}) {
        bool allowed = module_->spawn_allowed(hook, requestor, peer.label);
        if (!allowed) {
          if (module_->is_enforcing()) throw Error(Errc::spawn_denied, spawn_hook_name(hook));
          audit_.append({peer.label.type(), peer.label.type(), "zygote",
                         hook == SpawnHook::uid_policy ? "specifyids" : "specifyseinfo"});
        }
      }
    }
    int pid = next_pid_++;
    SecurityLabel label;
    if (module_)
      label = module_->label_for_process(request.uid, request.package, request.label_hint);
    processes_[pid] = ProcessRecord{pid, request.uid, request.package, label, requestor.pid, true};
    return processes_[pid];
  }

  void kill_process(int pid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    ProcessRecord& p = process_mut(pid);
    p.alive = false;
    for (auto& [id, conn] : connections_) {
      if (conn.initiator_pid == pid || conn.acceptor_pid == pid) conn.open = false;
    }
  }

  const ProcessRecord& process(int pid) const {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    return process_ref(pid);
  }

  bool process_alive(int pid) const {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    auto it = processes_.find(pid);
    return it != processes_.end() && it->second.alive;
  }

  KernelObject& create_file(const std::string& path) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    if (path.empty() || path.front() != '/')
      throw Error(Errc::malformed_args, "file ids are absolute paths: " + path);
    SecurityLabel label;
    if (module_) label = module_->label_for_file(path);
    files_[path] = KernelObject{ObjectKind::file, path, label};
    return files_[path];
  }

  void remove_file(const std::string& path) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    files_.erase(path);
  }

  bool file_exists(const std::string& path) const {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    return files_.count(path) != 0;
  }

  int create_connection(int initiator_pid, int acceptor_pid) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    const ProcessRecord& initiator = process_ref(initiator_pid);
    process_ref(acceptor_pid);
    int id = next_connection_++;
    // Connections carry the label of the process that opened them.
    connections_[id] = Connection{id, initiator_pid, acceptor_pid, true, initiator.label};
    return id;
  }

  void close_connection(int id) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    auto it = connections_.find(id);
    if (it == connections_.end()) throw Error(Errc::unknown_connection, std::to_string(id));
    it->second.open = false;
  }

  // Kernel-level mediation is truncation-only: it never edits payloads.
  PolicyDecision kernel_mediate(int pid, const std::string& file_path, const std::string& op) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    const KernelObject& obj = file_ref(file_path);
    return mediate_locked(pid, obj.label, ObjectKind::file, op);
  }

  PolicyDecision kernel_mediate(int pid, ObjectKind kind, const std::string& object_id,
                                const std::string& op) {
    std::lock_guard<std::recursive_mutex> lk(mu_);
    switch (kind) {
      case ObjectKind::file:
        return mediate_locked(pid, file_ref(object_id).label, kind, op);
      case ObjectKind::connection: {
        auto it = connections_.find(std::stoi(object_id));
        if (it == connections_.end() || !it->second.open)
          throw Error(Errc::unknown_connection, object_id);
        return mediate_locked(pid, it->second.label, kind, op);
      }
      case ObjectKind::process:
        return mediate_locked(pid, process_ref(std::stoi(object_id)).label, kind, op);
    }
    throw Error(Errc::unknown_object, object_id);
  }

 private:
  struct Connection {
    int id;
    int initiator_pid;
    int acceptor_pid;
    bool open;
    SecurityLabel label;
  };

  PolicyDecision mediate_locked(int pid, const SecurityLabel& object_label, ObjectKind kind,
                                const std::string& op) {
    const ProcessRecord& proc = process_ref(pid);
    if (!module_) return PolicyDecision::allow();
    if (check_with_audit(proc.label, object_label, object_kind_name(kind), op))
      return PolicyDecision::allow();
    return PolicyDecision::deny("kernel:" + proc.label.type() + " -> " + object_label.type() + " " +
                                object_kind_name(kind) + ":" + op);
  }

  bool check_with_audit(const SecurityLabel& subject, const SecurityLabel& object,
                        const std::string& object_class, const std::string& op) {
    bool allowed = module_->check_access(subject, object, object_class, op);
    if (allowed) return true;
    if (!module_->is_enforcing()) {
      audit_.append({subject.type(), object.type(), object_class, op});
      return true;
    }
    return false;
  }

  void require_privilege(int caller_pid) const {
    const ProcessRecord& caller = process_ref(caller_pid);
    if (!module_->management_privileged(caller.label))
      throw Error(Errc::privilege_denied, caller.label.type());
  }

  const ProcessRecord& process_ref(int pid) const {
    auto it = processes_.find(pid);
    if (it == processes_.end() || !it->second.alive)
      throw Error(Errc::unknown_pid, std::to_string(pid));
    return it->second;
  }

  ProcessRecord& process_mut(int pid) {
    auto it = processes_.find(pid);
    if (it == processes_.end() || !it->second.alive)
      throw Error(Errc::unknown_pid, std::to_string(pid));
    return it->second;
  }

  KernelObject& file_ref(const std::string& path) {
    auto it = files_.find(path);
    if (it == files_.end()) throw Error(Errc::unknown_object, path);
    return it->second;
  }

  const KernelObject& file_ref(const std::string& path) const {
    auto it = files_.find(path);
    if (it == files_.end()) throw Error(Errc::unknown_object, path);
    return it->second;
  }

  mutable std::recursive_mutex mu_;
  std::unique_ptr<KernelModule> module_;
  bool initialized_ = false;
  AuditLog audit_;
  std::map<std::string, KernelObject> files_;
  std::map<int, Connection> connections_;
  std::map<int, ProcessRecord> processes_;
  int next_pid_ = 100;       // monotonic, never recycled within a run
  int next_connection_ = 1;
};

}  // namespace monitord::kmac
