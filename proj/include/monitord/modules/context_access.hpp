#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "monitord/module_api.hpp"
#include "monitord/sim_types.hpp"

namespace monitord::policy {

// Context-related access control: the active context is derived from the
// device location (circular regions, first declared region wins), and grants
// map (context, hook id or permission) to allow/deny.
struct ContextPolicy {
  struct Region {
    std::string name;
    double center_lat = 0.0;
    double center_lon = 0.0;
    double radius_m = 0.0;
  };

  std::vector<Region> regions;
  std::map<std::pair<std::string, std::string>, bool> grants;  // (context, key) -> allow

  static ContextPolicy from_json(const nlohmann::ordered_json& j) {
    ContextPolicy p;
    if (j.contains("regions")) {
      for (const auto& r : j["regions"]) {
        p.regions.push_back({r["name"].get<std::string>(), r["lat"].get<double>(),
                             r["lon"].get<double>(), r["radius_m"].get<double>()});
      }
    }
    if (j.contains("grants")) {
      for (const auto& g : j["grants"]) {
        bool allow = g["decision"].get<std::string>() == "allow";
        p.grants[{g["context"].get<std::string>(), g["key"].get<std::string>()}] = allow;
      }
    }
    return p;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    auto regions_json = nlohmann::ordered_json::array();
    for (const auto& r : regions) {
      nlohmann::ordered_json rj;
      rj["name"] = r.name;
      rj["lat"] = r.center_lat;
      rj["lon"] = r.center_lon;
      rj["radius_m"] = r.radius_m;
      regions_json.push_back(rj);
    }
    j["regions"] = regions_json;
    auto grants_json = nlohmann::ordered_json::array();
    for (const auto& [key, allow] : grants) {
      nlohmann::ordered_json gj;
      gj["context"] = key.first;
      gj["key"] = key.second;
      gj["decision"] = allow ? "allow" : "deny";
      grants_json.push_back(gj);
    }
    j["grants"] = grants_json;
    return j;
  }

  friend bool operator==(const ContextPolicy& a, const ContextPolicy& b) {
    if (a.grants != b.grants || a.regions.size() != b.regions.size()) return false;
    for (std::size_t i = 0; i < a.regions.size(); ++i) {
      const auto& x = a.regions[i];
      const auto& y = b.regions[i];
      if (x.name != y.name || x.center_lat != y.center_lat || x.center_lon != y.center_lon ||
          x.radius_m != y.radius_m)
        return false;
    }
    return true;
  }
};

// Great-circle distance on a sphere of radius 6 371 000 m.
inline double great_circle_distance_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusM = 6'371'000.0;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  double phi1 = lat1 * kDegToRad, phi2 = lat2 * kDegToRad;
  double dphi = (lat2 - lat1) * kDegToRad;
  double dlambda = (lon2 - lon1) * kDegToRad;
  double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
             std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

// Active context for a fix: the first declared region containing it, else
// "default".
inline std::string ctx_update(const ContextPolicy& policy, const LocationFix& fix) {
  for (const auto& r : policy.regions) {
    if (great_circle_distance_m(fix.latitude, fix.longitude, r.center_lat, r.center_lon) <=
        r.radius_m)
      return r.name;
  }
  return "default";
}

// Grant lookup: the active context first, then "default", then allow.
inline PolicyDecision ctx_check(const ContextPolicy& policy, const std::string& active_context,
                                const std::string& key) {
  auto it = policy.grants.find({active_context, key});
  if (it == policy.grants.end()) it = policy.grants.find({"default", key});
  if (it == policy.grants.end()) return PolicyDecision::allow();
  if (it->second) return PolicyDecision::allow();
  return PolicyDecision::deny("context:" + active_context + ":" + key);
}

// Context module: listens to location updates through the reportLocation
// hook, gates other hooks through ctx_check, accepts policy updates over the
// Bundle channel and persists its policy store on shutdown.
class ContextAccessModule : public SecurityModule {
 public:
  explicit ContextAccessModule(const nlohmann::ordered_json& config) {
    if (config.is_object()) {
      policy_ = ContextPolicy::from_json(config);
      if (config.contains("persist_path"))
        persist_path_ = config["persist_path"].get<std::string>();
    }
  }

  bool init(FrameworkCallbacks&) override {
    if (!persist_path_.empty() && std::filesystem::exists(persist_path_)) {
      std::ifstream in(persist_path_);
      try {
        policy_ = ContextPolicy::from_json(nlohmann::ordered_json::parse(in));
      } catch (const nlohmann::json::parse_error&) {
        return false;  // corrupted store: refuse to run with unknown policy
      }
    }
    return true;
  }

  void shutdown() override {
    if (persist_path_.empty()) return;
    std::ofstream out(persist_path_);
    out << policy_.to_json().dump(2) << "\n";
  }

  PolicyDecision enforce(const HookContext& ctx) override {
    if (ctx.hook.id == "location.reportLocation") {
      active_context_ = ctx_update(policy_, LocationFix::from_value(*ctx.candidate));
      return PolicyDecision::allow();
    }
    if (ctx.hook.id == "ams.checkComponentPermission") {
      // Context rules keyed on the permission name override the stock check.
      std::string permission = ctx.args.get_text("permission").value_or("");
      PolicyDecision d = ctx_check(policy_, active_context_, permission);
      if (d.is_deny()) return PolicyDecision::edit(Value(false));
      return PolicyDecision::allow();
    }
    return ctx_check(policy_, active_context_, ctx.hook.id);
  }

  Bundle call_module(const Bundle& request, const Credentials& caller) override {
    Bundle response;
    // Front-end channel: system uids and the shell may manage policies.
    if (caller.uid >= 10000) {
      response.put_text("status", "denied");
      return response;
    }
    std::string cmd = request.get_text("cmd").value_or("");
    if (cmd == "setPolicy") {
      const Value* rules = request.find("policy");
      if (!rules || !rules->is_bundle()) {
        response.put_text("status", "error");
        response.put_text("reason", "setPolicy needs a policy bundle");
        return response;
      }
      policy_ = ContextPolicy::from_json(rules->as_bundle().to_plain_json());
      response.put_text("status", "ok");
      return response;
    }
    if (cmd == "getContext") {
      response.put_text("status", "ok");
      response.put_text("context", active_context_);
      return response;
    }
    response.put_text("status", "unsupported");
    return response;
  }

  const std::string& active_context() const { return active_context_; }
  const ContextPolicy& policy() const { return policy_; }

 private:
  ContextPolicy policy_;
  std::string active_context_ = "default";
  std::string persist_path_;
};

}  // namespace monitord::policy
