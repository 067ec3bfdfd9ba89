#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "monitord/module_api.hpp"

namespace monitord::policy {

// Selects which app processes get an inlined monitor injected at startup.
// The instrumentApp answer names the monitor; the IRM runtime bootstraps it
// inside the fresh process before any app logic runs.
class IrmInjectorModule : public SecurityModule {
 public:
  explicit IrmInjectorModule(const nlohmann::ordered_json& config) {
    if (config.is_object() && config.contains("instrument")) {
      for (const auto& e : config["instrument"])
        monitors_[e["package"].get<std::string>()] = e["monitor"].get<std::string>();
    }
  }

  PolicyDecision enforce(const HookContext& ctx) override {
    if (ctx.hook.id != "generic.instrumentApp") return PolicyDecision::allow();
    auto it = monitors_.find(ctx.args.get_text("package").value_or(""));
    if (it == monitors_.end()) return PolicyDecision::allow();
    return PolicyDecision::edit(Value(it->second));
  }

  Bundle call_module(const Bundle& request, const Credentials& caller) override {
    (void)caller;
    Bundle response;
    if (request.get_text("cmd").value_or("") == "listInstrumented") {
      response.put_text("status", "ok");
      ValueList list;
      for (const auto& [pkg, monitor] : monitors_) {
        Bundle e;
        e.put_text("package", pkg);
        e.put_text("monitor", monitor);
        list.push_back(Value(std::move(e)));
      }
      response.put_list("instrumented", std::move(list));
      return response;
    }
    response.put_text("status", "unsupported");
    return response;
  }

 private:
  std::map<std::string, std::string> monitors_;
};

}  // namespace monitord::policy
