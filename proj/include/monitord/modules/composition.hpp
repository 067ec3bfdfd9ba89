#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/module_api.hpp"
#include "monitord/modules/catalog.hpp"

namespace monitord::policy {

enum class CompositionStrategy { consensus, priority };

// Reconciliation over an ordered child-decision vector.
//
//   consensus: any Deny wins; else a single Edit wins; two-or-more Edits
//              are irreconcilable and fail closed; else Allow.
//   priority:  the first non-Allow decision wins; else Allow.
inline PolicyDecision compose(CompositionStrategy strategy,
                              const std::vector<PolicyDecision>& votes) {
  if (strategy == CompositionStrategy::priority) {
    for (const auto& v : votes)
      if (!v.is_allow()) return v;
    return PolicyDecision::allow();
  }
  const PolicyDecision* edit = nullptr;
  int edits = 0;
  for (const auto& v : votes) {
    if (v.is_deny()) return v;
    if (v.is_edit()) {
      ++edits;
      edit = &v;
    }
  }
  if (edits >= 2) return PolicyDecision::deny("edit-conflict");
  if (edits == 1) return *edit;
  return PolicyDecision::allow();
}

// Stacking happens here, not in the framework: the composition module loads
// its children itself and multiplexes every framework entry across them in
// order. A faulting child votes Deny.
class CompositionModule : public SecurityModule {
 public:
  CompositionModule(CompositionStrategy strategy,
                    std::vector<std::unique_ptr<SecurityModule>> children,
                    std::vector<std::vector<std::string>> child_hooks)
      : strategy_(strategy), children_(std::move(children)), child_hooks_(std::move(child_hooks)) {
    if (children_.empty()) throw Error(Errc::config_error, "composition needs at least one child");
  }

  explicit CompositionModule(const nlohmann::ordered_json& config) {
    if (!config.is_object() || !config.contains("children"))
      throw Error(Errc::config_error, "composition config needs children");
    std::string strat = config.value("strategy", "consensus");
    if (strat == "consensus") {
      strategy_ = CompositionStrategy::consensus;
    } else if (strat == "priority") {
      strategy_ = CompositionStrategy::priority;
    } else {
      throw Error(Errc::config_error, "strategy must be consensus or priority");
    }
    for (const auto& child : config["children"]) {
      ModuleManifest manifest = ModuleManifest::from_json(child);
      children_.push_back(catalog().instantiate(manifest.entry_point, manifest.config));
      child_hooks_.push_back(manifest.declared_hooks);
    }
    if (children_.empty()) throw Error(Errc::config_error, "composition needs at least one child");
  }

  bool init(FrameworkCallbacks& callbacks) override {
    for (std::size_t i = 0; i < children_.size(); ++i) {
      bool ok = false;
      try {
        ok = children_[i]->init(callbacks);
      } catch (const std::exception&) {
        ok = false;
      }
      if (!ok) {
        for (std::size_t k = 0; k < i; ++k) children_[k]->shutdown();
        return false;
      }
    }
    return true;
  }

  void shutdown() override {
    for (auto& child : children_) child->shutdown();
  }

  PolicyDecision enforce(const HookContext& ctx) override {
    std::vector<PolicyDecision> votes;
    votes.reserve(children_.size());
    for (std::size_t i = 0; i < children_.size(); ++i) {
      if (!child_declares(i, ctx.hook.id)) {
        votes.push_back(PolicyDecision::allow());  // default-allow base
        continue;
      }
      try {
        votes.push_back(children_[i]->enforce(ctx));
      } catch (const std::exception& e) {
        votes.push_back(PolicyDecision::deny(std::string("module-fault:") + e.what()));
      }
    }
    return compose(strategy_, votes);
  }

  void on_package_event(PackageEventKind kind, const PackageInfo& pkg) override {
    for (auto& child : children_) {
      try {
        child->on_package_event(kind, pkg);
      } catch (const std::exception&) {
        // observe-only semantics: a child fault never blocks the fan-out
      }
    }
  }

  Bundle call_module(const Bundle& request, const Credentials& caller) override {
    // Route by child index when the request names one.
    if (auto idx = request.get_int("child")) {
      if (*idx >= 0 && static_cast<std::size_t>(*idx) < children_.size()) {
        const Bundle* inner = request.get_bundle("request");
        return children_[static_cast<std::size_t>(*idx)]->call_module(inner ? *inner : Bundle{},
                                                                      caller);
      }
    }
    Bundle response;
    response.put_text("status", "unsupported");
    return response;
  }

  std::size_t child_count() const { return children_.size(); }

 private:
  bool child_declares(std::size_t i, const std::string& hook_id) const {
    if (i >= child_hooks_.size()) return false;
    for (const auto& h : child_hooks_[i])
      if (h == hook_id) return true;
    return false;
  }

  CompositionStrategy strategy_ = CompositionStrategy::consensus;
  std::vector<std::unique_ptr<SecurityModule>> children_;
  std::vector<std::vector<std::string>> child_hooks_;
};

}  // namespace monitord::policy
