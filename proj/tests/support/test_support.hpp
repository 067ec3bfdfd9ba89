#pragma once

#include <random>
#include <string>
#include <vector>

#include "monitord/monitord.hpp"

namespace monitord::test {

// ---- scripted module behaviors, selected by config ----
//
//   {"behavior": "fault"}           enforce throws
//   {"behavior": "deny"}            enforce denies with reason "scripted"
//   {"behavior": "edit_int"}        enforce edits to integer 7
//   {"behavior": "edit_text"}       enforce edits to "scripted-edit"
//   {"behavior": "init_false"}      init reports failure
//   {"behavior": "event_fault"}     event handler throws
//   default                         allow everything
class ScriptedModule : public SecurityModule {
 public:
  explicit ScriptedModule(const nlohmann::ordered_json& config) {
    if (config.is_object() && config.contains("behavior"))
      behavior_ = config["behavior"].get<std::string>();
  }

  bool init(FrameworkCallbacks&) override { return behavior_ != "init_false"; }

  PolicyDecision enforce(const HookContext&) override {
    if (behavior_ == "fault") throw std::runtime_error("scripted fault");
    if (behavior_ == "deny") return PolicyDecision::deny("scripted");
    if (behavior_ == "edit_int") return PolicyDecision::edit(Value(7));
    if (behavior_ == "edit_text") return PolicyDecision::edit(Value("scripted-edit"));
    return PolicyDecision::allow();
  }

  void on_package_event(PackageEventKind, const PackageInfo&) override {
    if (behavior_ == "event_fault") throw std::runtime_error("scripted event fault");
  }

 private:
  std::string behavior_;
};

// Observation log shared by every RecorderModule instance in a binary.
struct RecorderLog {
  struct HookSeen {
    std::string hook;
    Credentials caller;
  };
  std::vector<std::pair<std::string, std::string>> events;  // (event kind, package)
  std::vector<HookSeen> hooks;

  static RecorderLog& instance() {
    static RecorderLog log;
    return log;
  }

  static void reset() {
    instance().events.clear();
    instance().hooks.clear();
  }
};

// Allows everything but writes down what it saw.
class RecorderModule : public SecurityModule {
 public:
  explicit RecorderModule(const nlohmann::ordered_json&) {}

  PolicyDecision enforce(const HookContext& ctx) override {
    RecorderLog::instance().hooks.push_back({ctx.hook.id, ctx.caller});
    return PolicyDecision::allow();
  }

  void on_package_event(PackageEventKind kind, const PackageInfo& pkg) override {
    RecorderLog::instance().events.emplace_back(package_event_name(kind), pkg.name);
  }
};

inline void register_test_modules() {
  static bool done = [] {
    policy::catalog().register_factory("test.scripted", [](const nlohmann::ordered_json& cfg) {
      return std::make_unique<ScriptedModule>(cfg);
    });
    policy::catalog().register_factory("test.recorder", [](const nlohmann::ordered_json& cfg) {
      return std::make_unique<RecorderModule>(cfg);
    });
    return true;
  }();
  (void)done;
}

inline ModuleManifest make_manifest(const std::string& entry_point,
                                    std::vector<std::string> hooks,
                                    nlohmann::ordered_json config = nullptr) {
  ModuleManifest m;
  m.name = entry_point;
  m.author = "tests";
  m.version = "1";
  m.entry_point = entry_point;
  m.declared_hooks = std::move(hooks);
  m.config = std::move(config);
  return m;
}

inline ModuleManifest default_allow_manifest() {
  return make_manifest("builtin.default_allow", hooks::behavioral_ids());
}

inline PackageInfo make_package(const std::string& name,
                                std::vector<std::string> permissions = {},
                                std::vector<Component> components = {}) {
  PackageInfo p;
  p.name = name;
  for (auto& perm : permissions) p.requested_permissions.insert(std::move(perm));
  p.components = std::move(components);
  return p;
}

// Kernel policy used across kernel-layer tests: a zygote that may specify
// uids and labels, a privileged system domain and one app file rule.
inline kmac::KernelPolicy te_kernel_policy() {
  kmac::KernelPolicy p;
  p.enforcing = true;
  p.rules = {
      {"zygote_t", "zygote_t", "zygote", "specifyids"},
      {"zygote_t", "zygote_t", "zygote", "specifyseinfo"},
      {"system_t", "system_t", "kmac", "admin"},
      {"app_t", "app_data_t", "file", "open"},
      {"app_t", "app_data_t", "file", "read"},
      {"app_t", "app_data_t", "file", "write"},
  };
  kmac::KernelPolicy::LabelRule zygote;
  zygote.package = "zygote";
  zygote.label = kmac::SecurityLabel::of_type("zygote_t");
  kmac::KernelPolicy::LabelRule system;
  system.package = "android.system";
  system.label = kmac::SecurityLabel::of_type("system_t");
  kmac::KernelPolicy::LabelRule data;
  data.path = "/data";
  data.label = kmac::SecurityLabel::of_type("app_data_t");
  p.labels = {zygote, system, data};
  return p;
}

inline sim::StackConfig default_stack_config() {
  sim::StackConfig c;
  c.device_id = "490154203237518";
  c.location_seed = {{52.1, 13.4, 0}};
  ResultSet contacts;
  contacts.columns = {"name", "phone", "group"};
  contacts.rows = {
      {Value("alice"), Value("030-1"), Value("work")},
      {Value("bob"), Value("030-2"), Value("private")},
      {Value("carol"), Value("030-3"), Value("work")},
  };
  c.content_stores.emplace_back("contacts", std::move(contacts));
  return c;
}

// ---- random bundle generation over the value grammar ----

inline Value random_value(std::mt19937_64& rng, int depth_budget);

inline Bundle random_bundle(std::mt19937_64& rng, int depth_budget) {
  Bundle b;
  std::uniform_int_distribution<int> entries(0, 4);
  int n = entries(rng);
  for (int i = 0; i < n; ++i)
    b.put("k" + std::to_string(i), random_value(rng, depth_budget - 1));
  return b;
}

inline Value random_value(std::mt19937_64& rng, int depth_budget) {
  std::uniform_int_distribution<int> pick(0, depth_budget > 1 ? 6 : 4);
  switch (pick(rng)) {
    case 0: return Value(static_cast<std::int64_t>(rng() % 1000) - 500);
    case 1: return Value(static_cast<double>(rng() % 10000) / 16.0);
    case 2: return Value(rng() % 2 == 0);
    case 3: return Value("s" + std::to_string(rng() % 100));
    case 4: {
      Bytes raw;
      for (std::size_t i = 0; i < rng() % 8; ++i) raw.push_back(static_cast<std::uint8_t>(rng()));
      return Value(std::move(raw));
    }
    case 5: return Value(random_bundle(rng, depth_budget));
    default: {
      ValueList list;
      std::size_t n = rng() % 4;
      if (n > 0) {
        // Homogeneous: generate one element and clone-mutate its kind.
        Value first = random_value(rng, depth_budget - 1);
        list.push_back(first);
        for (std::size_t i = 1; i < n; ++i) {
          Value v = random_value(rng, depth_budget - 1);
          list.push_back(v.kind() == first.kind() ? v : first);
        }
      }
      return Value(std::move(list));
    }
  }
}

// ---- random scenario generation (seeded, reference-valid) ----

inline scenario::Scenario random_scenario(std::uint64_t seed, int max_events = 40) {
  std::mt19937_64 rng(seed);
  scenario::Scenario s;
  s.name = "random-" + std::to_string(seed);
  s.seed = seed;

  const std::vector<std::string> pool = {"app.a", "app.b", "app.c", "app.d", "app.e", "app.f"};
  const std::vector<std::string> perms = {"LOCATION", "INTERNET", "SMS"};
  const std::vector<std::string> actions = {"NEWS", "PING"};
  std::vector<std::string> installed;
  std::vector<std::string> running;

  auto pkg_json = [&](const std::string& name) {
    nlohmann::ordered_json p;
    p["name"] = name;
    auto perm_list = nlohmann::ordered_json::array();
    for (const auto& perm : perms)
      if (rng() % 2 == 0) perm_list.push_back(perm);
    p["permissions"] = perm_list;
    auto comps = nlohmann::ordered_json::array();
    comps.push_back({{"kind", "activity"}, {"name", name + ".Main"}});
    comps.push_back({{"kind", "service"}, {"name", name + ".Svc"}});
    comps.push_back({{"kind", "receiver"}, {"name", actions[rng() % actions.size()]}});
    p["components"] = comps;
    return p;
  };
  auto push = [&](nlohmann::ordered_json j) {
    scenario::ScenarioEvent e;
    e.kind = j["kind"].get<std::string>();
    e.params = std::move(j);
    s.events.push_back(std::move(e));
  };
  auto pick = [&](const std::vector<std::string>& from) { return from[rng() % from.size()]; };

  int span = std::max(1, max_events - 5);
  int n = 5 + static_cast<int>(rng() % static_cast<std::uint64_t>(span));
  for (int i = 0; i < n; ++i) {
    int roll = static_cast<int>(rng() % 100);
    if (installed.empty() || roll < 15) {
      std::string name = pick(pool);
      push({{"kind", "install"}, {"package", pkg_json(name)}});
      if (std::find(installed.begin(), installed.end(), name) == installed.end())
        installed.push_back(name);
      continue;
    }
    if (running.empty() || roll < 30) {
      std::string name = pick(installed);
      push({{"kind", "spawn"}, {"package", name}});
      if (std::find(running.begin(), running.end(), name) == running.end())
        running.push_back(name);
      continue;
    }
    std::string app = pick(running);
    if (roll < 42) {
      push({{"kind", "broadcast"}, {"app", app}, {"action", pick(actions)}});
    } else if (roll < 50) {
      push({{"kind", "start_activity"}, {"app", app}, {"component", pick(installed) + ".Main"}});
    } else if (roll < 58) {
      push({{"kind", "bind_service"}, {"app", app}, {"component", pick(installed) + ".Svc"}});
    } else if (roll < 66) {
      push({{"kind", "get_location"}, {"app", app}});
    } else if (roll < 70) {
      push({{"kind", "report_location"},
            {"lat", static_cast<double>(rng() % 180) - 90.0},
            {"lon", static_cast<double>(rng() % 360) - 180.0}});
    } else if (roll < 78) {
      push({{"kind", "query_content"}, {"app", app}, {"store", "contacts"}});
    } else if (roll < 84) {
      push({{"kind", "get_device_id"}, {"app", app}});
    } else if (roll < 90) {
      if (rng() % 2 == 0) {
        push({{"kind", "clip_set"}, {"app", app}, {"text", "note-" + std::to_string(rng() % 10)}});
      } else {
        push({{"kind", "clip_get"}, {"app", app}});
      }
    } else if (roll < 95) {
      push({{"kind", "get_installed"}, {"app", app}});
    } else {
      std::string name = pick(installed);
      push({{"kind", "uninstall"}, {"package", name}});
      installed.erase(std::remove(installed.begin(), installed.end(), name), installed.end());
      running.erase(std::remove(running.begin(), running.end(), name), running.end());
    }
  }
  return s;
}

}  // namespace monitord::test
