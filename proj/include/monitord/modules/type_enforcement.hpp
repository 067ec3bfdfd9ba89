#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "monitord/kmac.hpp"
#include "monitord/module_api.hpp"

namespace monitord::policy {

inline constexpr const char* kMacDenyReason = "Denied by MAC policy";

// Middleware-side type-enforcement policy: allow rules over (subject type,
// object type, object class, operation), a uid -> subject type map, and
// per-package overrides for shared-uid sandboxes.
struct TePolicy {
  kmac::KernelRuleSet rules;
  std::map<int, std::string> uid_types;
  std::map<std::string, std::string> package_overrides;
};

// Subject type for a caller. A per-package override wins over the uid map,
// so packages sharing a uid can still carry distinct types.
inline std::string te_label_for_uid(const TePolicy& policy, int uid, const std::string& package) {
  auto ovr = policy.package_overrides.find(package);
  if (ovr != policy.package_overrides.end()) return ovr->second;
  auto it = policy.uid_types.find(uid);
  if (it == policy.uid_types.end())
    throw Error(Errc::unknown_key, "no subject type for uid " + std::to_string(uid));
  return it->second;
}

// Pure decision function. An unmapped uid fails closed.
inline PolicyDecision te_check(const TePolicy& policy, int subject_uid, const std::string& package,
                               const std::string& object_type, const std::string& object_class,
                               const std::string& operation) {
  std::string subject_type;
  try {
    subject_type = te_label_for_uid(policy, subject_uid, package);
  } catch (const Error&) {
    return PolicyDecision::deny(kMacDenyReason);
  }
  if (policy.rules.allows(subject_type, object_type, object_class, operation))
    return PolicyDecision::allow();
  return PolicyDecision::deny(kMacDenyReason);
}

inline PolicyDecision te_check(const TePolicy& policy, int subject_uid,
                               const std::string& object_type, const std::string& object_class,
                               const std::string& operation) {
  return te_check(policy, subject_uid, "", object_type, object_class, operation);
}

// Middleware type enforcement. Config maps hook ids to the (object type,
// object class, operation) triple each hook checks; denials surface as the
// fixed MAC denial text, or optionally as an empty list for list hooks.
class TypeEnforcementModule : public SecurityModule {
 public:
  explicit TypeEnforcementModule(const nlohmann::ordered_json& config) {
    if (!config.is_object()) throw Error(Errc::config_error, "type enforcement needs a config");
    if (config.contains("rules")) {
      for (const auto& r : config["rules"]) {
        policy_.rules.add({r["subject"].get<std::string>(), r["object"].get<std::string>(),
                           r["class"].get<std::string>(), r["op"].get<std::string>()});
      }
    }
    if (config.contains("uid_types")) {
      for (const auto& [uid, type] : config["uid_types"].items())
        policy_.uid_types[std::stoi(uid)] = type.get<std::string>();
    }
    if (config.contains("package_overrides")) {
      for (const auto& [pkg, type] : config["package_overrides"].items())
        policy_.package_overrides[pkg] = type.get<std::string>();
    }
    if (config.contains("checks")) {
      for (const auto& [hook, spec] : config["checks"].items()) {
        Check c;
        c.object_type = spec["object"].get<std::string>();
        c.object_class = spec["class"].get<std::string>();
        c.operation = spec["op"].get<std::string>();
        if (spec.contains("on_deny") && spec["on_deny"].get<std::string>() == "empty_list")
          c.empty_list_on_deny = true;
        checks_[hook] = std::move(c);
      }
    }
  }

  PolicyDecision enforce(const HookContext& ctx) override {
    auto it = checks_.find(ctx.hook.id);
    if (it == checks_.end()) return PolicyDecision::allow();
    const Check& check = it->second;
    PolicyDecision d = te_check(policy_, ctx.caller.uid, ctx.caller.package.value_or(""),
                                check.object_type, check.object_class, check.operation);
    if (d.is_deny() && check.empty_list_on_deny && ctx.candidate && ctx.candidate->is_list()) {
      // Less interruptive strategy: pretend the service has nothing to offer.
      return PolicyDecision::edit(Value(ValueList{}));
    }
    return d;
  }

  const TePolicy& policy() const { return policy_; }

 private:
  struct Check {
    std::string object_type;
    std::string object_class;
    std::string operation;
    bool empty_list_on_deny = false;
  };

  TePolicy policy_;
  std::map<std::string, Check> checks_;
};

}  // namespace monitord::policy
