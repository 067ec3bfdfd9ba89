#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "monitord/module_api.hpp"
#include "monitord/modules/ops_firewall.hpp"  // pattern_matches

namespace monitord::policy {

// Developer-shipped interaction rules, carried in a package's attached
// policies and enforced by the system on its behalf.
//
// Runtime rules protect the declaring package as callee: the caller must
// hold the listed permissions, match the package pattern and use a matching
// intent action. Install rules condition a new package's installation on
// the installed set.
struct DeveloperRule {
  enum class Kind { runtime, install };
  Kind kind = Kind::runtime;
  // runtime conditions
  std::set<std::string> require_caller_permissions;
  std::string caller_package = "*";
  std::string action = "*";
  // install conditions
  std::optional<std::string> forbid_installed_permission;
  std::optional<std::string> forbid_installed_package;
};

// Parses the "rules" list of an attached-policies bundle. Throws
// MalformedRule on anything that does not match the schema.
inline std::vector<DeveloperRule> parse_developer_rules(const Bundle& policies) {
  const ValueList* rules = policies.get_list("rules");
  if (!rules) throw Error(Errc::malformed_rule, "attached policies carry no rules list");
  std::vector<DeveloperRule> out;
  for (const auto& v : *rules) {
    if (!v.is_bundle()) throw Error(Errc::malformed_rule, "rule must be a bundle");
    const Bundle& rb = v.as_bundle();
    DeveloperRule rule;
    std::string kind = rb.get_text("kind").value_or("");
    if (kind == "runtime") {
      rule.kind = DeveloperRule::Kind::runtime;
      if (const ValueList* perms = rb.get_list("require_caller_permissions"))
        for (const auto& p : *perms) rule.require_caller_permissions.insert(p.as_text());
      rule.caller_package = rb.get_text("caller_package").value_or("*");
      rule.action = rb.get_text("action").value_or("*");
    } else if (kind == "install") {
      rule.kind = DeveloperRule::Kind::install;
      if (auto p = rb.get_text("forbid_installed_permission"))
        rule.forbid_installed_permission = *p;
      if (auto p = rb.get_text("forbid_installed_package")) rule.forbid_installed_package = *p;
      if (!rule.forbid_installed_permission && !rule.forbid_installed_package)
        throw Error(Errc::malformed_rule, "install rule needs a condition");
    } else {
      throw Error(Errc::malformed_rule, "rule kind must be runtime or install");
    }
    out.push_back(std::move(rule));
  }
  return out;
}

// Runtime check: deny iff any of the callee's runtime rules is violated by
// this caller/intent.
inline PolicyDecision developer_runtime_check(const std::vector<DeveloperRule>& callee_rules,
                                              const std::string& caller_package,
                                              const std::set<std::string>& caller_permissions,
                                              const std::string& action) {
  for (const auto& rule : callee_rules) {
    if (rule.kind != DeveloperRule::Kind::runtime) continue;
    if (!pattern_matches(rule.action, action)) continue;
    if (!pattern_matches(rule.caller_package, caller_package))
      return PolicyDecision::deny("developer-policy:caller " + caller_package);
    for (const auto& p : rule.require_caller_permissions) {
      if (caller_permissions.count(p) == 0)
        return PolicyDecision::deny("developer-policy:missing " + p);
    }
  }
  return PolicyDecision::allow();
}

class DeveloperPolicyModule : public SecurityModule {
 public:
  explicit DeveloperPolicyModule(const nlohmann::ordered_json&) {}

  bool init(FrameworkCallbacks& callbacks) override {
    callbacks_ = &callbacks;
    for (const auto& name : callbacks.installed_packages()) {
      auto info = callbacks.package_info(name);
      if (!info) continue;
      packages_[name] = *info;
      if (info->attached_policies) {
        try {
          rules_[name] = parse_developer_rules(*info->attached_policies);
        } catch (const Error&) {
          // Preinstalled package with a bad payload: ignore its rules rather
          // than refuse to boot.
        }
      }
    }
    return true;
  }

  PolicyDecision enforce(const HookContext& ctx) override {
    const std::string& hook = ctx.hook.id;
    if (hook == "pms.scanPackage") return check_install(ctx);
    if (hook == "ams.startActivity" || hook == "ams.bindService" ||
        hook == "broadcast.deliverToRegisteredReceiver") {
      std::string callee = ctx.args.get_text("target_package").value_or("");
      if (callee.empty()) {
        // Broadcast context names the receiver only by uid/pid; resolve it.
        int target_pid = static_cast<int>(ctx.args.get_int("target_pid").value_or(-1));
        if (callbacks_ && target_pid >= 0) {
          auto pkg = callbacks_->package_for_pid(target_pid);
          if (pkg) callee = *pkg;
        }
      }
      auto it = rules_.find(callee);
      if (it == rules_.end()) return PolicyDecision::allow();
      std::string caller_package = ctx.caller.package.value_or("");
      std::set<std::string> caller_perms;
      auto pit = packages_.find(caller_package);
      if (pit != packages_.end()) caller_perms = pit->second.requested_permissions;
      return developer_runtime_check(it->second, caller_package, caller_perms,
                                     ctx.args.get_text("action").value_or(""));
    }
    return PolicyDecision::allow();
  }

  void on_package_event(PackageEventKind kind, const PackageInfo& pkg) override {
    if (kind == PackageEventKind::removed) {
      packages_.erase(pkg.name);
      rules_.erase(pkg.name);
      return;
    }
    packages_[pkg.name] = pkg;
    rules_.erase(pkg.name);
    if (pkg.attached_policies) {
      // scanPackage already vetted the payload; a parse failure here would
      // mean the package changed under us, so fail closed by keeping no rules.
      try {
        rules_[pkg.name] = parse_developer_rules(*pkg.attached_policies);
      } catch (const Error&) {
      }
    }
  }

 private:
  PolicyDecision check_install(const HookContext& ctx) {
    const Bundle* pkg_bundle = ctx.args.get_bundle("package");
    if (!pkg_bundle) return PolicyDecision::deny("developer-policy:missing-package");
    PackageInfo pkg = PackageInfo::from_bundle(*pkg_bundle);
    if (!pkg.attached_policies) return PolicyDecision::allow();
    std::vector<DeveloperRule> rules;
    try {
      rules = parse_developer_rules(*pkg.attached_policies);
    } catch (const Error& e) {
      return PolicyDecision::deny(std::string("developer-policy:") + e.what());
    }
    for (const auto& rule : rules) {
      if (rule.kind != DeveloperRule::Kind::install) continue;
      for (const auto& [name, other] : packages_) {
        if (rule.forbid_installed_permission &&
            other.requested_permissions.count(*rule.forbid_installed_permission))
          return PolicyDecision::deny("developer-policy:conflicts-with " + name);
        if (rule.forbid_installed_package && pattern_matches(*rule.forbid_installed_package, name))
          return PolicyDecision::deny("developer-policy:conflicts-with " + name);
      }
    }
    return PolicyDecision::allow();
  }

  FrameworkCallbacks* callbacks_ = nullptr;
  std::map<std::string, PackageInfo> packages_;
  std::map<std::string, std::vector<DeveloperRule>> rules_;
};

}  // namespace monitord::policy
