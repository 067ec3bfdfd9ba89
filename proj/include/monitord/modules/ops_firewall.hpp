#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/module_api.hpp"

namespace monitord::policy {

// Mapping from (uid, package) to the operations that pair may perform.
// Unlisted pairs keep the stock default-allow posture.
struct OpMap {
  std::map<std::pair<int, std::string>, std::set<std::string>> entries;

  static OpMap from_json(const nlohmann::ordered_json& j) {
    OpMap m;
    if (!j.is_array()) return m;
    for (const auto& e : j) {
      std::set<std::string> ops;
      for (const auto& op : e["ops"]) ops.insert(op.get<std::string>());
      m.entries[{e["uid"].get<int>(), e["package"].get<std::string>()}] = std::move(ops);
    }
    return m;
  }
};

inline PolicyDecision appops_check(const OpMap& opmap, int uid, const std::string& package,
                                   const std::string& operation) {
  auto it = opmap.entries.find({uid, package});
  if (it == opmap.entries.end()) return PolicyDecision::allow();
  if (it->second.count(operation)) return PolicyDecision::allow();
  return PolicyDecision::deny("appops:" + operation);
}

// Intent firewall rules: literal-or-"*" patterns over caller package, intent
// action and target component; any match denies.
struct FirewallRules {
  struct Rule {
    std::string caller;
    std::string action;
    std::string component;
  };
  std::vector<Rule> rules;

  static FirewallRules from_json(const nlohmann::ordered_json& j) {
    FirewallRules r;
    if (!j.is_array()) return r;
    for (const auto& e : j) {
      r.rules.push_back({e.value("caller", "*"), e.value("action", "*"),
                         e.value("component", "*")});
    }
    return r;
  }
};

inline bool pattern_matches(const std::string& pattern, const std::string& text) {
  return pattern == "*" || pattern == text;
}

inline PolicyDecision intent_firewall_check(const FirewallRules& rules,
                                            const std::string& caller_package,
                                            const std::string& action,
                                            const std::string& component) {
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    const auto& r = rules.rules[i];
    if (pattern_matches(r.caller, caller_package) && pattern_matches(r.action, action) &&
        pattern_matches(r.component, component))
      return PolicyDecision::deny("intent-firewall:rule:" + std::to_string(i));
  }
  return PolicyDecision::allow();
}

// Dynamic per-operation permissions plus an intent firewall in one module.
// Operation names follow the hook short names; the current op map is
// retrievable over the Bundle channel. Operation watching callbacks are not
// supported.
class OpsFirewallModule : public SecurityModule {
 public:
  explicit OpsFirewallModule(const nlohmann::ordered_json& config) {
    if (config.is_object()) {
      if (config.contains("opmap")) opmap_ = OpMap::from_json(config["opmap"]);
      if (config.contains("rules")) firewall_ = FirewallRules::from_json(config["rules"]);
    }
  }

  PolicyDecision enforce(const HookContext& ctx) override {
    const std::string& hook = ctx.hook.id;
    if (hook == "ams.startActivity" || hook == "ams.bindService" ||
        hook == "broadcast.deliverToRegisteredReceiver") {
      return intent_firewall_check(firewall_, ctx.caller.package.value_or(""),
                                   ctx.args.get_text("action").value_or(""),
                                   ctx.args.get_text("target_component").value_or(""));
    }
    auto op = operation_for_hook(hook);
    if (!op) return PolicyDecision::allow();
    return appops_check(opmap_, ctx.caller.uid, ctx.caller.package.value_or(""), *op);
  }

  Bundle call_module(const Bundle& request, const Credentials& caller) override {
    (void)caller;
    Bundle response;
    if (request.get_text("cmd").value_or("") == "getOpMap") {
      response.put_text("status", "ok");
      ValueList entries;
      for (const auto& [key, ops] : opmap_.entries) {
        Bundle e;
        e.put_int("uid", key.first);
        e.put_text("package", key.second);
        ValueList names;
        for (const auto& op : ops) names.push_back(Value(op));
        e.put_list("ops", std::move(names));
        entries.push_back(Value(std::move(e)));
      }
      response.put_list("entries", std::move(entries));
      return response;
    }
    response.put_text("status", "unsupported");
    return response;
  }

 private:
  static std::optional<std::string> operation_for_hook(const std::string& hook) {
    if (hook == "phonesubinfo.getDeviceId") return "getDeviceId";
    if (hook == "location.getLastLocation") return "getLastLocation";
    if (hook == "cp.preQuery") return "queryContent";
    if (hook == "clip.getPrimaryClip") return "getPrimaryClip";
    if (hook == "clip.setPrimaryClip") return "setPrimaryClip";
    return std::nullopt;
  }

  OpMap opmap_;
  FirewallRules firewall_;
};

}  // namespace monitord::policy
