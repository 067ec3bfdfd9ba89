#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/base64.hpp"
#include "monitord/bundle.hpp"
#include "monitord/decision.hpp"
#include "monitord/hooks.hpp"
#include "monitord/sim_types.hpp"

namespace monitord {

enum class PackageEventKind { installed, replaced, removed };

inline const char* package_event_name(PackageEventKind k) {
  switch (k) {
    case PackageEventKind::installed: return "installed";
    case PackageEventKind::replaced: return "replaced";
    case PackageEventKind::removed: return "removed";
  }
  return "?";
}

// Direct line from modules into framework-internal registries, bypassing the
// simulated API surface (pid resolution, package enumeration).
class FrameworkCallbacks {
 public:
  virtual ~FrameworkCallbacks() = default;
  virtual std::optional<std::string> package_for_pid(int pid) const = 0;
  virtual std::vector<std::string> installed_packages() const = 0;
  virtual std::optional<PackageInfo> package_info(const std::string& name) const = 0;
};

// Everything an enforcement function gets to see for one hook invocation.
struct HookContext {
  const HookDescriptor& hook;
  Credentials caller;
  const Bundle& args;
  // Present for edit-return and list-filter hooks: the value the service
  // would return if the module allows.
  const Value* candidate = nullptr;
};

// Security module SPI. The base class is the default-allow module: every
// non-overridden enforcement function allows, events are ignored and the
// proprietary channel answers "unsupported".
class SecurityModule {
 public:
  virtual ~SecurityModule() = default;

  virtual bool init(FrameworkCallbacks& callbacks) {
    (void)callbacks;
    return true;
  }

  virtual void shutdown() {}

  virtual PolicyDecision enforce(const HookContext& ctx) {
    (void)ctx;
    return PolicyDecision::allow();
  }

  virtual void on_package_event(PackageEventKind kind, const PackageInfo& pkg) {
    (void)kind;
    (void)pkg;
  }

  virtual Bundle call_module(const Bundle& request, const Credentials& caller) {
    (void)request;
    (void)caller;
    Bundle response;
    response.put_text("status", "unsupported");
    return response;
  }
};

enum class DispatchMode { serialized, concurrent };

struct ModuleResource {
  std::string name;
  Bytes data;
};

struct ModuleManifest {
  std::string name;
  std::string author;
  std::string version;
  std::string entry_point;  // resolved against the module catalog
  DispatchMode dispatch_mode = DispatchMode::serialized;
  std::vector<std::string> declared_hooks;
  std::vector<ModuleResource> resources;
  nlohmann::ordered_json config;  // free-form, passed to the module factory

  static ModuleManifest from_json(const nlohmann::ordered_json& j,
                                  const std::filesystem::path& base_dir = {}) {
    if (!j.is_object()) throw Error(Errc::parse_error, "manifest must be a json object");
    ModuleManifest m;
    auto text = [&](const char* key, bool required) -> std::string {
      if (!j.contains(key)) {
        if (required) throw Error(Errc::parse_error, std::string("manifest missing ") + key);
        return "";
      }
      if (!j[key].is_string()) throw Error(Errc::parse_error, std::string(key) + " must be a string");
      return j[key].get<std::string>();
    };
    m.name = text("name", true);
    m.author = text("author", false);
    m.version = text("version", false);
    m.entry_point = text("entry_point", true);
    std::string mode = text("dispatch_mode", false);
    if (mode.empty() || mode == "serialized") {
      m.dispatch_mode = DispatchMode::serialized;
    } else if (mode == "concurrent") {
      m.dispatch_mode = DispatchMode::concurrent;
    } else {
      throw Error(Errc::parse_error, "dispatch_mode must be serialized or concurrent");
    }
    if (j.contains("hooks")) {
      if (!j["hooks"].is_array()) throw Error(Errc::parse_error, "hooks must be an array");
      for (const auto& h : j["hooks"]) m.declared_hooks.push_back(h.get<std::string>());
    }
    if (j.contains("resources")) {
      for (const auto& r : j["resources"]) {
        m.resources.push_back(
            {r["name"].get<std::string>(), base64_decode(r["bytes"].get<std::string>())});
      }
    }
    if (j.contains("config")) {
      const auto& cfg = j["config"];
      if (cfg.is_string()) {
        // Indirection to a per-module config file, resolved next to the
        // manifest.
        std::filesystem::path p = cfg.get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw Error(Errc::config_error, "cannot open module config: " + p.string());
        try {
          m.config = nlohmann::ordered_json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(Errc::parse_error, std::string("module config: ") + e.what());
        }
      } else {
        m.config = cfg;
      }
    }
    return m;
  }

  static ModuleManifest load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config_error, "cannot open manifest: " + path.string());
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse_error, std::string("manifest: ") + e.what());
    }
    return from_json(j, path.parent_path());
  }
};

}  // namespace monitord
