#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "monitord/module_api.hpp"

namespace monitord::policy {

// Undirected graph of granted IPC links between app uids.
class InteractionGraph {
 public:
  void add_vertex(int uid) { adjacency_.try_emplace(uid); }

  void remove_vertex(int uid) {
    adjacency_.erase(uid);
    for (auto& [v, neighbors] : adjacency_) neighbors.erase(uid);
  }

  bool has_vertex(int uid) const { return adjacency_.count(uid) != 0; }

  void add_edge(int a, int b) {
    add_vertex(a);
    add_vertex(b);
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
  }

  bool has_edge(int a, int b) const {
    auto it = adjacency_.find(a);
    return it != adjacency_.end() && it->second.count(b) != 0;
  }

  std::size_t vertex_count() const { return adjacency_.size(); }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& [v, neighbors] : adjacency_) twice += neighbors.size();
    return twice / 2;
  }

  std::vector<int> vertices() const {
    std::vector<int> out;
    for (const auto& [v, _] : adjacency_) out.push_back(v);
    return out;
  }

  bool connected(int a, int b) const {
    if (a == b) return has_vertex(a);
    if (!has_vertex(a) || !has_vertex(b)) return false;
    std::set<int> seen{a};
    std::vector<int> frontier{a};
    while (!frontier.empty()) {
      int v = frontier.back();
      frontier.pop_back();
      for (int n : adjacency_.at(v)) {
        if (n == b) return true;
        if (seen.insert(n).second) frontier.push_back(n);
      }
    }
    return false;
  }

  std::set<int> component_of(int a) const {
    std::set<int> seen;
    if (!has_vertex(a)) return seen;
    seen.insert(a);
    std::vector<int> frontier{a};
    while (!frontier.empty()) {
      int v = frontier.back();
      frontier.pop_back();
      for (int n : adjacency_.at(v)) {
        if (seen.insert(n).second) frontier.push_back(n);
      }
    }
    return seen;
  }

 private:
  std::map<int, std::set<int>> adjacency_;
};

using PermissionSets = std::map<int, std::set<std::string>>;

// Conflict policy: no connected component may contain a holder of p and a
// holder of q, for any forbidden pair {p, q}, where the two holders are
// distinct apps. In domain mode an edge is forbidden iff the endpoint
// domains differ.
struct ChineseWallPolicy {
  std::set<std::pair<std::string, std::string>> forbidden_pairs;  // normalized p < q
  bool domain_mode = false;
  std::map<std::string, std::string> package_domains;  // configuration
  std::map<int, std::string> uid_domains;              // derived at runtime

  void forbid(std::string p, std::string q) {
    if (q < p) std::swap(p, q);
    forbidden_pairs.insert({std::move(p), std::move(q)});
  }

  std::string domain_of_uid(int uid) const {
    auto it = uid_domains.find(uid);
    return it == uid_domains.end() ? "default" : it->second;
  }
};

namespace detail {

// A component violates {p, q} when two distinct members split the pair
// between them (one app holding both tags is its own business).
inline bool component_violates(const std::set<int>& component, const ChineseWallPolicy& policy,
                               const PermissionSets& perms) {
  for (const auto& [p, q] : policy.forbidden_pairs) {
    std::vector<int> p_holders, q_holders;
    for (int uid : component) {
      auto it = perms.find(uid);
      if (it == perms.end()) continue;
      if (it->second.count(p)) p_holders.push_back(uid);
      if (it->second.count(q)) q_holders.push_back(uid);
    }
    for (int u : p_holders)
      for (int v : q_holders)
        if (u != v) return true;
  }
  return false;
}

}  // namespace detail

// Decide one IPC request. Allow commits the edge; Deny leaves the graph
// untouched. Pure graph logic, shared by the module and by direct tests.
inline PolicyDecision cw_decide_ipc(InteractionGraph& graph, const ChineseWallPolicy& policy,
                                    int caller_uid, int callee_uid, const PermissionSets& perms) {
  if (policy.domain_mode) {
    if (policy.domain_of_uid(caller_uid) != policy.domain_of_uid(callee_uid))
      return PolicyDecision::deny("chinese-wall:domain " + policy.domain_of_uid(caller_uid) +
                                  " != " + policy.domain_of_uid(callee_uid));
    graph.add_edge(caller_uid, callee_uid);
    return PolicyDecision::allow();
  }
  InteractionGraph tentative = graph;
  tentative.add_edge(caller_uid, callee_uid);
  std::set<int> merged = tentative.component_of(caller_uid);
  if (detail::component_violates(merged, policy, perms)) {
    for (const auto& [p, q] : policy.forbidden_pairs) {
      // Name the first pair that the merged component would join.
      bool has_p = false, has_q = false;
      int up = 0, uq = 0;
      for (int uid : merged) {
        auto it = perms.find(uid);
        if (it == perms.end()) continue;
        if (it->second.count(p)) { has_p = true; up = uid; }
        if (it->second.count(q)) { has_q = true; uq = uid; }
      }
      if (has_p && has_q && up != uq)
        return PolicyDecision::deny("chinese-wall:" + p + "/" + q);
    }
    return PolicyDecision::deny("chinese-wall:conflict");
  }
  graph.add_edge(caller_uid, callee_uid);
  return PolicyDecision::allow();
}

// Independent verifier: brute force over all distinct vertex pairs, path
// existence checked per pair, forbidden-pair membership checked directly.
// Deliberately shares no logic with cw_decide_ipc.
inline bool cw_oracle(const InteractionGraph& graph, const ChineseWallPolicy& policy,
                      const PermissionSets& perms) {
  std::vector<int> vs = graph.vertices();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      if (i == j) continue;
      int u = vs[i], v = vs[j];
      if (!graph.connected(u, v)) continue;
      if (policy.domain_mode) {
        if (policy.domain_of_uid(u) != policy.domain_of_uid(v)) return true;
        continue;
      }
      auto pu = perms.find(u);
      auto pv = perms.find(v);
      if (pu == perms.end() || pv == perms.end()) continue;
      for (const auto& [p, q] : policy.forbidden_pairs) {
        if (pu->second.count(p) && pv->second.count(q)) return true;
        if (pu->second.count(q) && pv->second.count(p)) return true;
      }
    }
  }
  return false;
}

// IPC mediation over a transitive app-communication graph. Each granted
// broadcast delivery, bind or activity start commits an edge; a request is
// denied when the would-be component joins holders of a forbidden permission
// pair. The domain-mode configuration turns the same module into strict
// domain isolation, including hiding other-domain packages from package
// listings.
class ChineseWallModule : public SecurityModule {
 public:
  explicit ChineseWallModule(const nlohmann::ordered_json& config) {
    if (config.is_object() && config.contains("forbidden_pairs")) {
      for (const auto& pair : config["forbidden_pairs"]) {
        if (!pair.is_array() || pair.size() != 2)
          throw Error(Errc::config_error, "forbidden_pairs entries are [p, q]");
        policy_.forbid(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    }
    if (config.is_object() && config.contains("domains")) {
      policy_.domain_mode = true;
      for (const auto& [pkg, domain] : config["domains"].items())
        policy_.package_domains[pkg] = domain.get<std::string>();
    }
  }

  bool init(FrameworkCallbacks& callbacks) override {
    callbacks_ = &callbacks;
    for (const auto& name : callbacks.installed_packages()) {
      auto info = callbacks.package_info(name);
      if (info) index_package(*info);
    }
    return true;
  }

  PolicyDecision enforce(const HookContext& ctx) override {
    const std::string& hook = ctx.hook.id;
    if (hook == "broadcast.deliverToRegisteredReceiver" || hook == "ams.bindService" ||
        hook == "ams.startActivity") {
      int callee = static_cast<int>(ctx.args.get_int("target_uid").value_or(-1));
      int caller = ctx.caller.uid;
      if (callee < 0) return PolicyDecision::allow();
      if (caller == callee) return PolicyDecision::allow();
      return decide_cached(caller, callee);
    }
    if (hook == "pms.getInstalledPackages" && policy_.domain_mode) {
      // Domain isolation also hides other-domain packages.
      std::string caller_domain = policy_.domain_of_uid(ctx.caller.uid);
      ValueList filtered;
      for (const auto& v : ctx.candidate->as_list()) {
        const Bundle& pkg = v.as_bundle();
        std::string name = pkg.get_text("name").value_or("");
        auto it = policy_.package_domains.find(name);
        std::string domain = it == policy_.package_domains.end() ? "default" : it->second;
        if (domain == caller_domain) filtered.push_back(v);
      }
      return PolicyDecision::edit(Value(std::move(filtered)));
    }
    return PolicyDecision::allow();
  }

  void on_package_event(PackageEventKind kind, const PackageInfo& pkg) override {
    if (kind == PackageEventKind::removed) {
      graph_.remove_vertex(pkg.uid);
      perms_.erase(pkg.uid);
      policy_.uid_domains.erase(pkg.uid);
    } else {
      index_package(pkg);
    }
    ++version_;
    cache_.clear();
  }

  Bundle call_module(const Bundle& request, const Credentials& caller) override {
    (void)caller;
    Bundle response;
    if (request.get_text("cmd").value_or("") == "graph") {
      response.put_text("status", "ok");
      response.put_int("vertices", static_cast<std::int64_t>(graph_.vertex_count()));
      response.put_int("edges", static_cast<std::int64_t>(graph_.edge_count()));
      return response;
    }
    response.put_text("status", "unsupported");
    return response;
  }

  const InteractionGraph& graph() const { return graph_; }
  const ChineseWallPolicy& policy() const { return policy_; }

 private:
  void index_package(const PackageInfo& pkg) {
    graph_.add_vertex(pkg.uid);
    auto& set = perms_[pkg.uid];
    for (const auto& p : pkg.requested_permissions) set.insert(p);
    if (policy_.domain_mode) {
      auto it = policy_.package_domains.find(pkg.name);
      if (it != policy_.package_domains.end()) policy_.uid_domains[pkg.uid] = it->second;
    }
  }

  PolicyDecision decide_cached(int caller, int callee) {
    // Memo keyed by (edge, graph/policy version); the version bumps on every
    // package event and on every committed edge.
    auto key = std::make_pair(std::min(caller, callee), std::max(caller, callee));
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.first == version_) {
      if (it->second.second) {
        graph_.add_edge(caller, callee);  // re-granting an existing edge is a no-op
        return PolicyDecision::allow();
      }
      return PolicyDecision::deny("chinese-wall:cached");
    }
    bool existed = graph_.has_edge(caller, callee);
    PolicyDecision d = cw_decide_ipc(graph_, policy_, caller, callee, perms_);
    bool allowed = d.is_allow();
    if (allowed && !existed) {
      // cw_decide_ipc committed a new edge; future decisions see a new graph.
      ++version_;
      cache_.clear();
    }
    cache_[key] = {version_, allowed};
    return d;
  }

  ChineseWallPolicy policy_;
  InteractionGraph graph_;
  PermissionSets perms_;
  FrameworkCallbacks* callbacks_ = nullptr;
  std::uint64_t version_ = 0;
  std::map<std::pair<int, int>, std::pair<std::uint64_t, bool>> cache_;
};

}  // namespace monitord::policy
