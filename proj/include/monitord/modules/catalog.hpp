#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "json.hpp"
#include "monitord/errors.hpp"
#include "monitord/module_api.hpp"

namespace monitord::policy {

// Built-in catalog that manifest entry points resolve against. Modules are
// in-process implementations; the reload flag on the framework stands in for
// dynamic loading of external code.
class ModuleCatalog {
 public:
  using Factory = std::function<std::unique_ptr<SecurityModule>(const nlohmann::ordered_json&)>;

  void register_factory(const std::string& entry_point, Factory f) {
    factories_[entry_point] = std::move(f);
  }

  bool resolvable(const std::string& entry_point) const {
    return factories_.count(entry_point) != 0;
  }

  std::unique_ptr<SecurityModule> instantiate(const std::string& entry_point,
                                              const nlohmann::ordered_json& config) const {
    auto it = factories_.find(entry_point);
    if (it == factories_.end()) throw Error(Errc::unresolvable_entry_point, entry_point);
    return it->second(config);
  }

 private:
  std::map<std::string, Factory> factories_;
};

void register_builtin_modules(ModuleCatalog& catalog);  // defined in modules/builtin.hpp

inline ModuleCatalog& catalog() {
  static ModuleCatalog instance = [] {
    ModuleCatalog c;
    register_builtin_modules(c);
    return c;
  }();
  return instance;
}

}  // namespace monitord::policy
