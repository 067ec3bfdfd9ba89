#pragma once

#include <optional>
#include <string>
#include <utility>

#include "monitord/bundle.hpp"
#include "monitord/errors.hpp"

namespace monitord {

// Identity of an API caller as seen by every enforcement hook.
struct Credentials {
  int uid = 0;
  int pid = 0;
  std::optional<std::string> package;

  friend bool operator==(const Credentials& a, const Credentials& b) {
    return a.uid == b.uid && a.pid == b.pid && a.package == b.package;
  }
};

// Synthetic shell identity used by the CLI front-end channel.
inline Credentials shell_credentials() { return Credentials{2000, 2, std::nullopt}; }

enum class DecisionKind { allow, deny, edit };

// Outcome of one enforcement function: Allow, Deny(reason) or Edit(value).
// Edit is only meaningful for edit-return and list-filter hooks; the
// dispatcher rejects it elsewhere.
class PolicyDecision {
 public:
  static PolicyDecision allow() { return PolicyDecision(DecisionKind::allow, "", std::nullopt); }

  static PolicyDecision deny(std::string reason) {
    if (reason.empty()) throw Error(Errc::malformed_args, "deny reason must be non-empty");
    return PolicyDecision(DecisionKind::deny, std::move(reason), std::nullopt);
  }

  static PolicyDecision edit(Value replacement) {
    return PolicyDecision(DecisionKind::edit, "", std::move(replacement));
  }

  DecisionKind kind() const { return kind_; }
  bool is_allow() const { return kind_ == DecisionKind::allow; }
  bool is_deny() const { return kind_ == DecisionKind::deny; }
  bool is_edit() const { return kind_ == DecisionKind::edit; }

  const std::string& reason() const { return reason_; }
  const Value& replacement() const { return *replacement_; }

  std::string describe() const {
    switch (kind_) {
      case DecisionKind::allow: return "allow";
      case DecisionKind::deny: return "deny(" + reason_ + ")";
      case DecisionKind::edit: return "edit";
    }
    return "?";
  }

  friend bool operator==(const PolicyDecision& a, const PolicyDecision& b) {
    return a.kind_ == b.kind_ && a.reason_ == b.reason_ && a.replacement_ == b.replacement_;
  }

 private:
  PolicyDecision(DecisionKind kind, std::string reason, std::optional<Value> replacement)
      : kind_(kind), reason_(std::move(reason)), replacement_(std::move(replacement)) {}

  DecisionKind kind_;
  std::string reason_;
  std::optional<Value> replacement_;
};

// Result of an edit-capable dispatch: either the value the caller should see
// or a denial that the owning service surfaces as an access error.
struct EditResult {
  std::optional<Value> value;
  std::string deny_reason;

  bool denied() const { return !value.has_value(); }

  static EditResult of(Value v) { return EditResult{std::move(v), ""}; }
  static EditResult deny(std::string reason) { return EditResult{std::nullopt, std::move(reason)}; }
};

}  // namespace monitord
