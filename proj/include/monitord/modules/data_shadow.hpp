#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/module_api.hpp"
#include "monitord/sim_types.hpp"

namespace monitord::policy {

inline constexpr const char* kFakeDeviceId = "000000000000000";

enum class ShadowKind { device_id, location, content_store };
enum class ShadowMode { pass, empty, fake, filtered };

inline ShadowKind shadow_kind_from(const std::string& s) {
  if (s == "device-id") return ShadowKind::device_id;
  if (s == "location") return ShadowKind::location;
  if (s == "content-store") return ShadowKind::content_store;
  throw Error(Errc::config_error, "unknown shadow data kind: " + s);
}

inline ShadowMode shadow_mode_from(const std::string& s) {
  if (s == "pass") return ShadowMode::pass;
  if (s == "empty") return ShadowMode::empty;
  if (s == "fake") return ShadowMode::fake;
  if (s == "filtered") return ShadowMode::filtered;
  throw Error(Errc::config_error, "unknown shadow mode: " + s);
}

// Row predicates available to filtered mode, by id. A predicate answers
// whether a row is kept.
using RowPredicate = std::function<bool(const std::vector<std::string>& columns,
                                        const std::vector<Value>& row)>;

inline const std::map<std::string, RowPredicate>& shadow_predicates() {
  static const std::map<std::string, RowPredicate> predicates = {
      {"drop-private-group",
       [](const std::vector<std::string>& columns, const std::vector<Value>& row) {
         for (std::size_t i = 0; i < columns.size(); ++i) {
           if (columns[i] == "group")
             return !(row[i].is_text() && row[i].as_text() == "private");
         }
         return true;
       }},
      {"nonempty-name",
       [](const std::vector<std::string>& columns, const std::vector<Value>& row) {
         for (std::size_t i = 0; i < columns.size(); ++i) {
           if (columns[i] == "name") return row[i].is_text() && !row[i].as_text().empty();
         }
         return true;
       }},
  };
  return predicates;
}

inline const RowPredicate& shadow_predicate(const std::string& id) {
  auto it = shadow_predicates().find(id);
  if (it == shadow_predicates().end()) throw Error(Errc::unknown_predicate, id);
  return it->second;
}

// Per (package, data kind) shadowing configuration; unlisted pairs pass.
struct ShadowConfig {
  struct Entry {
    ShadowMode mode = ShadowMode::pass;
    std::string predicate;  // filtered mode only
  };
  std::map<std::pair<std::string, std::string>, Entry> entries;  // (package, kind-name)

  static ShadowConfig from_json(const nlohmann::ordered_json& j) {
    ShadowConfig c;
    if (!j.is_object() || !j.contains("entries")) return c;
    for (const auto& e : j["entries"]) {
      std::string kind = e["kind"].get<std::string>();
      ShadowKind k = shadow_kind_from(kind);
      Entry entry;
      entry.mode = shadow_mode_from(e["mode"].get<std::string>());
      if (entry.mode == ShadowMode::filtered) {
        if (k != ShadowKind::content_store)
          throw Error(Errc::config_error, "filtered mode applies to content stores only");
        entry.predicate = e["predicate"].get<std::string>();
        shadow_predicate(entry.predicate);  // fail early on unknown ids
      }
      if (entry.mode == ShadowMode::fake && k == ShadowKind::content_store)
        throw Error(Errc::config_error, "content stores support pass, empty or filtered");
      c.entries[{e["package"].get<std::string>(), kind}] = std::move(entry);
    }
    return c;
  }

  const Entry* lookup(const std::string& package, ShadowKind kind) const {
    const char* name = kind == ShadowKind::device_id  ? "device-id"
                       : kind == ShadowKind::location ? "location"
                                                      : "content-store";
    auto it = entries.find({package, name});
    return it == entries.end() ? nullptr : &it->second;
  }
};

// Core transform: pass -> Allow, empty/fake -> Edit with the kind's empty or
// configured fake value, filtered -> Edit keeping rows the predicate accepts.
inline PolicyDecision shadow_transform(const ShadowConfig& config, const std::string& package,
                                       ShadowKind kind, const Value& candidate) {
  const ShadowConfig::Entry* entry = config.lookup(package, kind);
  if (!entry || entry->mode == ShadowMode::pass) return PolicyDecision::allow();
  switch (kind) {
    case ShadowKind::device_id: {
      if (entry->mode == ShadowMode::empty) return PolicyDecision::edit(Value(""));
      return PolicyDecision::edit(Value(kFakeDeviceId));
    }
    case ShadowKind::location: {
      LocationFix fix = LocationFix::from_value(candidate);
      fix.latitude = 0.0;
      fix.longitude = 0.0;
      return PolicyDecision::edit(fix.to_value());
    }
    case ShadowKind::content_store: {
      ResultSet rs = ResultSet::from_value(candidate);
      ResultSet out;
      out.columns = rs.columns;  // schema preserved in every mode
      if (entry->mode == ShadowMode::filtered) {
        const RowPredicate& keep = shadow_predicate(entry->predicate);
        for (const auto& row : rs.rows)
          if (keep(out.columns, row)) out.rows.push_back(row);
      }
      return PolicyDecision::edit(out.to_value());
    }
  }
  return PolicyDecision::allow();
}

// Data shadowing: callers configured for it receive empty, fake or filtered
// data instead of the real device id, location or store contents.
class DataShadowModule : public SecurityModule {
 public:
  explicit DataShadowModule(const nlohmann::ordered_json& config)
      : config_(ShadowConfig::from_json(config)) {}

  PolicyDecision enforce(const HookContext& ctx) override {
    if (!ctx.candidate) return PolicyDecision::allow();
    std::string package = ctx.caller.package.value_or("");
    if (ctx.hook.id == "phonesubinfo.getDeviceId")
      return shadow_transform(config_, package, ShadowKind::device_id, *ctx.candidate);
    if (ctx.hook.id == "location.getLastLocation")
      return shadow_transform(config_, package, ShadowKind::location, *ctx.candidate);
    if (ctx.hook.id == "cp.postQuery")
      return shadow_transform(config_, package, ShadowKind::content_store, *ctx.candidate);
    return PolicyDecision::allow();
  }

  const ShadowConfig& config() const { return config_; }

 private:
  ShadowConfig config_;
};

}  // namespace monitord::policy
