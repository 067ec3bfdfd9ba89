#pragma once

#include <memory>

#include "monitord/modules/catalog.hpp"
#include "monitord/modules/chinese_wall.hpp"
#include "monitord/modules/composition.hpp"
#include "monitord/modules/context_access.hpp"
#include "monitord/modules/data_shadow.hpp"
#include "monitord/modules/default_allow.hpp"
#include "monitord/modules/developer_policy.hpp"
#include "monitord/modules/install_gate.hpp"
#include "monitord/modules/irm_injector.hpp"
#include "monitord/modules/ops_firewall.hpp"
#include "monitord/modules/type_enforcement.hpp"

namespace monitord::policy {

inline void register_builtin_modules(ModuleCatalog& catalog) {
  using J = nlohmann::ordered_json;
  catalog.register_factory("builtin.default_allow", [](const J&) {
    return std::make_unique<DefaultAllowModule>();
  });
  catalog.register_factory("builtin.chinese_wall", [](const J& cfg) {
    return std::make_unique<ChineseWallModule>(cfg);
  });
  catalog.register_factory("builtin.type_enforcement", [](const J& cfg) {
    return std::make_unique<TypeEnforcementModule>(cfg);
  });
  catalog.register_factory("builtin.context_access", [](const J& cfg) {
    return std::make_unique<ContextAccessModule>(cfg);
  });
  catalog.register_factory("builtin.install_gate", [](const J& cfg) {
    return std::make_unique<InstallGateModule>(cfg);
  });
  catalog.register_factory("builtin.data_shadow", [](const J& cfg) {
    return std::make_unique<DataShadowModule>(cfg);
  });
  catalog.register_factory("builtin.ops_firewall", [](const J& cfg) {
    return std::make_unique<OpsFirewallModule>(cfg);
  });
  catalog.register_factory("builtin.developer_policy", [](const J& cfg) {
    return std::make_unique<DeveloperPolicyModule>(cfg);
  });
  catalog.register_factory("builtin.irm_injector", [](const J& cfg) {
    return std::make_unique<IrmInjectorModule>(cfg);
  });
  catalog.register_factory("builtin.composition", [](const J& cfg) {
    return std::make_unique<CompositionModule>(cfg);
  });
}

}  // namespace monitord::policy
