#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/bundle.hpp"
#include "monitord/errors.hpp"

namespace monitord {

enum class ComponentKind { activity, receiver, service, provider };

inline const char* component_kind_name(ComponentKind k) {
  switch (k) {
    case ComponentKind::activity: return "activity";
    case ComponentKind::receiver: return "receiver";
    case ComponentKind::service: return "service";
    case ComponentKind::provider: return "provider";
  }
  return "?";
}

inline ComponentKind component_kind_from(const std::string& s) {
  if (s == "activity") return ComponentKind::activity;
  if (s == "receiver") return ComponentKind::receiver;
  if (s == "service") return ComponentKind::service;
  if (s == "provider") return ComponentKind::provider;
  throw Error(Errc::parse_error, "unknown component kind: " + s);
}

struct Component {
  ComponentKind kind;
  // For receivers the component name doubles as the broadcast action the
  // receiver subscribes to.
  std::string name;

  friend bool operator==(const Component& a, const Component& b) {
    return a.kind == b.kind && a.name == b.name;
  }
};

struct PackageInfo {
  std::string name;
  int uid = -1;  // -1: assigned by the registry at install
  std::string version = "1.0";
  std::set<std::string> requested_permissions;
  std::vector<Component> components;
  std::optional<Bundle> attached_policies;

  std::vector<std::string> receiver_actions() const {
    std::vector<std::string> out;
    for (const auto& c : components)
      if (c.kind == ComponentKind::receiver) out.push_back(c.name);
    return out;
  }

  const Component* find_component(const std::string& name, ComponentKind kind) const {
    for (const auto& c : components)
      if (c.name == name && c.kind == kind) return &c;
    return nullptr;
  }

  Bundle to_bundle() const {
    Bundle b;
    b.put_text("name", name);
    b.put_int("uid", uid);
    b.put_text("version", version);
    ValueList perms;
    for (const auto& p : requested_permissions) perms.push_back(Value(p));
    b.put_list("permissions", std::move(perms));
    ValueList comps;
    for (const auto& c : components) {
      Bundle cb;
      cb.put_text("kind", component_kind_name(c.kind));
      cb.put_text("name", c.name);
      comps.push_back(Value(std::move(cb)));
    }
    b.put_list("components", std::move(comps));
    if (attached_policies) b.put_bundle("policies", *attached_policies);
    return b;
  }

  static PackageInfo from_bundle(const Bundle& b) {
    PackageInfo p;
    p.name = b.get_text("name").value_or("");
    p.uid = static_cast<int>(b.get_int("uid").value_or(-1));
    p.version = b.get_text("version").value_or("1.0");
    if (const ValueList* perms = b.get_list("permissions"))
      for (const auto& v : *perms) p.requested_permissions.insert(v.as_text());
    if (const ValueList* comps = b.get_list("components"))
      for (const auto& v : *comps) {
        const Bundle& cb = v.as_bundle();
        p.components.push_back(
            {component_kind_from(cb.get_text("kind").value_or("")), cb.get_text("name").value_or("")});
      }
    if (const Bundle* pol = b.get_bundle("policies")) p.attached_policies = *pol;
    return p;
  }

  static PackageInfo from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw Error(Errc::parse_error, "package must be a json object");
    PackageInfo p;
    if (!j.contains("name") || !j["name"].is_string())
      throw Error(Errc::parse_error, "package needs a string name");
    p.name = j["name"].get<std::string>();
    if (j.contains("uid")) p.uid = j["uid"].get<int>();
    if (j.contains("version")) p.version = j["version"].get<std::string>();
    if (j.contains("permissions"))
      for (const auto& e : j["permissions"]) p.requested_permissions.insert(e.get<std::string>());
    if (j.contains("components"))
      for (const auto& e : j["components"])
        p.components.push_back(
            {component_kind_from(e["kind"].get<std::string>()), e["name"].get<std::string>()});
    if (j.contains("policies"))
      p.attached_policies = Bundle::from_plain_json(j["policies"]);
    return p;
  }

  friend bool operator==(const PackageInfo& a, const PackageInfo& b) {
    return a.name == b.name && a.uid == b.uid && a.version == b.version &&
           a.requested_permissions == b.requested_permissions && a.components == b.components &&
           a.attached_policies == b.attached_policies;
  }
};

struct Intent {
  std::string action;
  std::optional<std::string> target_component;
  Bundle extras;
  std::optional<std::string> required_permission;
};

struct LocationFix {
  double latitude = 0.0;
  double longitude = 0.0;
  std::int64_t timestamp = 0;  // monotonic tick, not wall time

  bool valid() const {
    return latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0;
  }

  Value to_value() const {
    Bundle b;
    b.put_real("lat", latitude);
    b.put_real("lon", longitude);
    b.put_int("ts", timestamp);
    return Value(std::move(b));
  }

  static LocationFix from_value(const Value& v) {
    const Bundle& b = v.as_bundle();
    LocationFix f;
    f.latitude = b.get_real("lat").value_or(0.0);
    f.longitude = b.get_real("lon").value_or(0.0);
    f.timestamp = b.get_int("ts").value_or(0);
    return f;
  }

  friend bool operator==(const LocationFix& a, const LocationFix& b) {
    return a.latitude == b.latitude && a.longitude == b.longitude && a.timestamp == b.timestamp;
  }
};

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  Value to_value() const {
    Bundle b;
    ValueList cols;
    for (const auto& c : columns) cols.push_back(Value(c));
    b.put_list("columns", std::move(cols));
    ValueList rws;
    for (const auto& r : rows) rws.push_back(Value(ValueList(r)));
    b.put_list("rows", std::move(rws));
    return Value(std::move(b));
  }

  static ResultSet from_value(const Value& v) {
    const Bundle& b = v.as_bundle();
    ResultSet rs;
    if (const ValueList* cols = b.get_list("columns"))
      for (const auto& c : *cols) rs.columns.push_back(c.as_text());
    if (const ValueList* rws = b.get_list("rows"))
      for (const auto& r : *rws) rs.rows.push_back(r.as_list());
    return rs;
  }

  friend bool operator==(const ResultSet& a, const ResultSet& b) {
    return a.columns == b.columns && a.rows == b.rows;
  }
};

}  // namespace monitord
