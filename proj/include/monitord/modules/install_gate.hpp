#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/module_api.hpp"

namespace monitord::policy {

// Install-time policy rules: a rule matches when its permission subset is
// fully requested by the package and, if present, the package registers a
// receiver for the named action. First match denies.
struct InstallRuleSet {
  struct Rule {
    std::set<std::string> permissions;
    std::optional<std::string> receiver_action;
  };
  std::vector<Rule> rules;

  static InstallRuleSet from_json(const nlohmann::ordered_json& j) {
    InstallRuleSet rs;
    if (!j.is_object() || !j.contains("rules")) return rs;
    for (const auto& r : j["rules"]) {
      Rule rule;
      if (r.contains("permissions"))
        for (const auto& p : r["permissions"]) rule.permissions.insert(p.get<std::string>());
      if (r.contains("receiver_action"))
        rule.receiver_action = r["receiver_action"].get<std::string>();
      if (rule.permissions.empty() && !rule.receiver_action)
        throw Error(Errc::config_error, "install rule must name permissions or a receiver action");
      rs.rules.push_back(std::move(rule));
    }
    return rs;
  }
};

// Returns the index of the first matching (denying) rule, or nullopt.
inline std::optional<std::size_t> install_gate_check(const PackageInfo& pkg,
                                                     const InstallRuleSet& rules) {
  std::set<std::string> receiver_actions;
  for (const auto& a : pkg.receiver_actions()) receiver_actions.insert(a);
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    const auto& rule = rules.rules[i];
    bool perms_match = true;
    for (const auto& p : rule.permissions) {
      if (pkg.requested_permissions.count(p) == 0) {
        perms_match = false;
        break;
      }
    }
    if (!perms_match) continue;
    if (rule.receiver_action && receiver_actions.count(*rule.receiver_action) == 0) continue;
    return i;
  }
  return std::nullopt;
}

// Gates installation on requested permissions and registered receiver
// interfaces; a matching rule aborts the install.
class InstallGateModule : public SecurityModule {
 public:
  explicit InstallGateModule(const nlohmann::ordered_json& config)
      : rules_(InstallRuleSet::from_json(config)) {}

  PolicyDecision enforce(const HookContext& ctx) override {
    if (ctx.hook.id != "pms.scanPackage") return PolicyDecision::allow();
    const Bundle* pkg_bundle = ctx.args.get_bundle("package");
    if (!pkg_bundle) return PolicyDecision::deny("install-gate:missing-package");
    PackageInfo pkg = PackageInfo::from_bundle(*pkg_bundle);
    auto hit = install_gate_check(pkg, rules_);
    if (hit) return PolicyDecision::deny("install-gate:rule:" + std::to_string(*hit));
    return PolicyDecision::allow();
  }

  const InstallRuleSet& rules() const { return rules_; }

 private:
  InstallRuleSet rules_;
};

}  // namespace monitord::policy
